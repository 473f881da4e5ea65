#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "impsel/bounds.hpp"
#include "impsel/experiments.hpp"
#include "impsel/impartiality.hpp"
#include "impsel/json_io.hpp"

namespace impsel {

// Exit codes: 0 success / all checks hold, 1 usage or runtime error, 2 a
// verification failed (bound violation or impartiality counterexample). CI
// can tell "the math failed" from "the invocation was wrong".
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerificationFailed = 2;

namespace cli_detail {

inline json parse_json_arg(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream in(arg.substr(1));
        if (!in) throw std::invalid_argument("cannot open config file '" + arg.substr(1) + "'");
        return json::parse(in);
    }
    return json::parse(arg);
}

inline void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
    out << text;
}

inline std::vector<std::int64_t> parse_n_list(const std::string& csv) {
    std::vector<std::int64_t> ns;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) ns.push_back(std::stoll(cell));
    return ns;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"impartial selection mechanisms: simulation and bound verification"};
    app.require_subcommand(1);

    // simulate
    std::string sim_prior, sim_mech, sim_out;
    std::uint64_t sim_trials = 1000, sim_seed = 0;
    std::uint32_t sim_workers = 1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo additive-approximation estimate");
    sim->add_option("--prior", sim_prior, "prior JSON (inline or @file)")->required();
    sim->add_option("--mechanism", sim_mech, "mechanism JSON (inline or @file)")->required();
    sim->add_option("--trials", sim_trials, "number of trials");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--workers", sim_workers, "worker threads");
    sim->add_option("--out", sim_out, "output JSON path ('-' for stdout)");

    // sweep
    std::string sw_family, sw_rule, sw_ns, sw_out;
    std::uint64_t sw_trials = 1000, sw_seed = 0;
    std::uint32_t sw_workers = 1;
    auto* sw = app.add_subcommand("sweep", "scaling sweep over n, CSV output");
    sw->add_option("--prior-family", sw_family, "uniform prior family JSON, e.g. {\"kind\":\"uniform\",\"p\":0.5}")
        ->required();
    sw->add_option("--mechanism-rule", sw_rule, "mechanism rule JSON; omit \"default\" to recompute per n")
        ->required();
    sw->add_option("--n", sw_ns, "comma-separated ascending n values")->required();
    sw->add_option("--trials", sw_trials, "trials per n");
    sw->add_option("--seed", sw_seed, "master seed");
    sw->add_option("--workers", sw_workers, "worker threads");
    sw->add_option("--out", sw_out, "output CSV path ('-' for stdout)");

    // check-impartial
    std::string ci_mech, ci_prior, ci_out;
    std::uint32_t ci_m = 4;
    bool ci_random = false;
    std::uint64_t ci_trials = 10000, ci_seed = 0;
    auto* ci = app.add_subcommand("check-impartial", "exhaustive or randomized deviation check");
    ci->add_option("--mechanism", ci_mech, "mechanism JSON")->required();
    ci->add_option("--m", ci_m, "node count (exhaustive mode enumerates all profiles)");
    ci->add_flag("--random", ci_random, "randomized search instead of exhaustive enumeration");
    ci->add_option("--prior", ci_prior, "prior JSON (random mode)");
    ci->add_option("--trials", ci_trials, "sampled profiles (random mode)");
    ci->add_option("--seed", ci_seed, "seed (random mode)");
    ci->add_option("--out", ci_out, "report JSON path ('-' for stdout)");

    // bounds verify
    std::string bv_suite, bv_out;
    std::int64_t bv_n = 0;
    std::vector<double> bv_ps;
    auto* bounds_cmd = app.add_subcommand("bounds", "tail-bound verification suites");
    auto* bv = bounds_cmd->add_subcommand("verify", "run one suite and write a report");
    bv->add_option("--suite", bv_suite, "tails|zones|technical|section5|event-d|two-node")
        ->required();
    bv->add_option("--n", bv_n, "binomial size parameter");
    bv->add_option("--p", bv_ps, "probability value(s); meaning depends on the suite");
    bv->add_option("--out", bv_out, "report JSON path ('-' for stdout)");

    // zones
    std::int64_t z_n = 0, z_threshold_n = 0;
    double z_p = 0.5;
    auto* zones_cmd = app.add_subcommand("zones", "comfort zone boundaries for Bin(n,p)");
    zones_cmd->add_option("--n", z_n, "trial count")->required();
    zones_cmd->add_option("--p", z_p, "success probability");
    zones_cmd->add_option("--threshold-n", z_threshold_n,
                          "size used in the n^-5.33 threshold (defaults to n)");

    // hazard
    std::int64_t h_n = 0, h_x = 0;
    double h_p = 0.5;
    auto* hazard_cmd = app.add_subcommand("hazard", "pmf/tail hazard ratio for Bin(n,p) at x");
    hazard_cmd->add_option("--n", h_n, "trial count")->required();
    hazard_cmd->add_option("--p", h_p, "success probability");
    hazard_cmd->add_option("--x", h_x, "evaluation point")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            const Prior prior = prior_from_json(cli_detail::parse_json_arg(sim_prior));
            const Mechanism mech =
                mechanism_from_json(cli_detail::parse_json_arg(sim_mech), prior);
            RunConfig cfg{prior, mech, sim_trials, sim_seed, sim_workers};
            const MCEstimate est = mc_additive(cfg);
            json out = {{"config",
                         {{"prior", prior_to_json(prior)},
                          {"mechanism", mechanism_to_json(mech)},
                          {"trials", sim_trials},
                          {"seed", sim_seed},
                          {"workers", sim_workers}}},
                        {"result", mc_estimate_to_json(est)}};
            cli_detail::write_text(sim_out, out.dump(2) + "\n");
            return kExitOk;
        }

        if (sw->parsed()) {
            const json family = cli_detail::parse_json_arg(sw_family);
            if (family.at("kind").get<std::string>() != "uniform")
                throw std::invalid_argument("sweep supports the uniform prior family");
            SweepSpec spec;
            spec.uniform_p = family.at("p").get<double>();
            spec.rule = mechanism_rule_from_json(cli_detail::parse_json_arg(sw_rule));
            spec.n_list = cli_detail::parse_n_list(sw_ns);
            spec.trials = sw_trials;
            spec.master_seed = sw_seed;
            spec.workers = sw_workers;
            cli_detail::write_text(sw_out, sweep_csv(sweep(spec)));
            return kExitOk;
        }

        if (ci->parsed()) {
            CheckReport rep;
            Mechanism mech;
            if (ci_random) {
                if (ci_prior.empty())
                    throw std::invalid_argument("--random needs --prior");
                const Prior prior = prior_from_json(cli_detail::parse_json_arg(ci_prior));
                mech = mechanism_from_json(cli_detail::parse_json_arg(ci_mech), prior);
                Rng rng(ci_seed);
                rep = check_random(mech, prior, ci_trials, rng);
            } else {
                const Prior probe{UniformPrior{ci_m, 0.5}};
                mech = mechanism_from_json(cli_detail::parse_json_arg(ci_mech), probe);
                rep = check_exhaustive(mech, ci_m);
            }
            cli_detail::write_text(ci_out.empty() ? "-" : ci_out,
                                   check_report_to_json(rep).dump(2) + "\n");
            return rep.pass ? kExitOk : kExitVerificationFailed;
        }

        if (bv->parsed()) {
            std::vector<BoundReport> reports;
            json extra = json::object();
            if (bv_suite == "tails") {
                if (bv_n < 2) throw std::invalid_argument("--n must be >= 2");
                std::vector<double> ps = bv_ps.empty()
                                             ? std::vector<double>{0.1, 0.2, 0.5, 0.8}
                                             : bv_ps;
                for (double p : ps)
                    for (auto& r : verify_tail_sandwich(bv_n, p)) reports.push_back(std::move(r));
            } else if (bv_suite == "zones" || bv_suite == "technical") {
                const double p_t = bv_ps.size() > 0 ? bv_ps[0] : 0.5;
                const double p_k = bv_ps.size() > 1 ? bv_ps[1] : p_t;
                reports.push_back(bv_suite == "zones" ? verify_zone_lemmas(bv_n, p_t, p_k)
                                                      : verify_technical_lemma(bv_n, p_t, p_k));
            } else if (bv_suite == "section5") {
                reports.push_back(verify_section5_lemmas(bv_n));
            } else if (bv_suite == "event-d") {
                const EventDResult res = event_d_lower_bound(bv_n);
                BoundReport r{"event-d-lower-bound",
                              "n=" + std::to_string(bv_n) + " L=" + std::to_string(res.lower) +
                                  " U=" + std::to_string(res.upper)};
                detail::record_le(r, "ln n / (6561 e^5 sqrt(6)) <= exact value", res.threshold,
                                  res.value);
                extra = {{"value", res.value}, {"threshold", res.threshold},
                         {"L", res.lower}, {"U", res.upper}};
                reports.push_back(std::move(r));
            } else if (bv_suite == "two-node") {
                std::vector<double> ps =
                    bv_ps.empty() ? std::vector<double>{0.1, 0.01, 0.001} : bv_ps;
                BoundReport r{"two-node-ratio", "p grid, avd_beats default 0"};
                json rows = json::array();
                for (double p : ps) {
                    const TwoNodeAnalysis a = two_node_analysis(p, AvdBeats{0});
                    detail::record_le(r, detail::fmt("winner degree <= p at p=%g", p),
                                      a.expected_winner_degree, p);
                    detail::record_le(r, detail::fmt("ratio <= 2 at p=%g", p), a.ratio, 2.0);
                    rows.push_back({{"p", p},
                                    {"expected_max", a.expected_max},
                                    {"expected_winner_degree", a.expected_winner_degree},
                                    {"ratio", a.ratio}});
                }
                extra = {{"rows", rows}};
                reports.push_back(std::move(r));
            } else {
                throw std::invalid_argument("unknown suite '" + bv_suite + "'");
            }

            bool all_hold = true;
            json jreports = json::array();
            for (const auto& r : reports) {
                all_hold = all_hold && r.holds();
                jreports.push_back(bound_report_to_json(r));
            }
            json out = {{"suite", bv_suite}, {"holds", all_hold}, {"reports", jreports}};
            if (!extra.empty()) out["detail"] = extra;
            cli_detail::write_text(bv_out.empty() ? "-" : bv_out, out.dump(2) + "\n");
            return all_hold ? kExitOk : kExitVerificationFailed;
        }

        if (zones_cmd->parsed()) {
            const BinomialSpec b{z_n, z_p};
            const ComfortZone z = comfort_zone(b, z_threshold_n > 0 ? z_threshold_n : z_n);
            json out = {{"n", z_n},       {"p", z_p},
                        {"L", z.lower},   {"U", z.upper},
                        {"mu", binom_mean(b)}, {"xi", binom_xi(b)}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }

        if (hazard_cmd->parsed()) {
            const BinomialSpec b{h_n, h_p};
            json out = {{"n", h_n},
                        {"p", h_p},
                        {"x", h_x},
                        {"log_pmf", binom_pmf_log(b, h_x)},
                        {"log_sf", binom_sf_log(b, h_x)},
                        {"hazard", hazard_ratio(b, h_x)}};
            std::cout << out.dump(2) << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace impsel
