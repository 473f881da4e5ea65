#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "impsel/mechanisms.hpp"
#include "impsel/priors.hpp"
#include "impsel/profile.hpp"
#include "impsel/rng.hpp"

namespace impsel {

struct RunConfig {
    Prior prior;
    Mechanism mechanism;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    std::uint32_t workers = 1;
};

// Gap statistics accumulate as integers (sum and sum of squares) and divide
// once at the end, so the estimate is bit-identical for any worker count.
struct MCEstimate {
    double mean_gap = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::map<int, std::uint64_t> gap_histogram;
    std::uint64_t gap_sum = 0;
    std::uint64_t gap_sq_sum = 0;
    std::uint64_t via_default_count = 0;
};

// Priors above this size take the lazy path (totals only, edges revealed on
// demand); below it, dense sampling is cheap and doubles as the oracle.
inline constexpr std::uint32_t kLazyPathThreshold = 4096;

namespace detail {

struct TrialAccumulator {
    std::uint64_t gap_sum = 0;
    std::uint64_t gap_sq_sum = 0;
    std::uint64_t via_default = 0;
    std::map<int, std::uint64_t> histogram;

    void add(int gap, bool via) {
        gap_sum += static_cast<std::uint64_t>(gap);
        gap_sq_sum += static_cast<std::uint64_t>(gap) * static_cast<std::uint64_t>(gap);
        via_default += via ? 1 : 0;
        histogram[gap] += 1;
    }
    void merge(const TrialAccumulator& o) {
        gap_sum += o.gap_sum;
        gap_sq_sum += o.gap_sq_sum;
        via_default += o.via_default;
        for (const auto& [g, c] : o.histogram) histogram[g] += c;
    }
};

inline bool lazy_eligible(const Prior& prior) {
    return (std::holds_alternative<UniformPrior>(prior.v) ||
            std::holds_alternative<PopularityPrior>(prior.v)) &&
           node_count(prior) > kLazyPathThreshold;
}

// One trial on its own substream. For lazily sampled trials the mechanisms
// that only need degree totals read them directly.
inline void run_trial(const RunConfig& cfg, std::uint64_t trial, TrialAccumulator& acc) {
    Rng rng = Rng::substream(cfg.master_seed, trial);
    if (detail::lazy_eligible(cfg.prior)) {
        LazySample s = sample_lazy(cfg.prior, rng);
        int delta = 0;
        for (std::int32_t d : s.totals) delta = std::max(delta, static_cast<int>(d));
        SelectionOutcome out;
        if (const auto* a = std::get_if<AvdBeats>(&cfg.mechanism)) {
            out = select_lazy(*a, s, rng);
            if (out.winner_degree < s.totals[a->t])
                throw std::logic_error("winner-degree floor violated in lazy AVD trial");
        } else if (const auto* c = std::get_if<Constant>(&cfg.mechanism)) {
            out = SelectionOutcome{c->t, static_cast<int>(s.totals[c->t]),
                                   delta - static_cast<int>(s.totals[c->t]), true};
        } else if (const auto* a2 = std::get_if<AvdTie>(&cfg.mechanism)) {
            NodeId arg = 0;
            int count = 0;
            for (NodeId j = 0; j < s.m; ++j)
                if (s.totals[j] == delta) {
                    if (count++ == 0) arg = j;
                }
            const NodeId w = count == 1 ? arg : a2->t;
            out = SelectionOutcome{w, static_cast<int>(s.totals[w]),
                                   delta - static_cast<int>(s.totals[w]), count != 1};
        } else {
            NodeId w = 0;
            for (NodeId j = 0; j < s.m; ++j)
                if (s.totals[j] == delta) {
                    w = j;
                    break;
                }
            out = SelectionOutcome{w, delta, 0, false};
        }
        acc.add(out.gap, out.via_default);
        return;
    }
    const NominationProfile prof = sample_profile(cfg.prior, rng);
    const SelectionOutcome out = select(cfg.mechanism, prof);
    if (const auto* a = std::get_if<AvdBeats>(&cfg.mechanism))
        if (out.winner_degree < prof.in_degree(a->t))
            throw std::logic_error("winner-degree floor violated in AVD trial");
    acc.add(out.gap, out.via_default);
}

}  // namespace detail

// Monte Carlo estimate of the expected additive approximation. Trial i always
// uses the substream derived from (master_seed, i), so the result does not
// depend on the worker count.
inline MCEstimate mc_additive(const RunConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("mc_additive needs trials >= 1");
    validate_prior(cfg.prior);
    const std::uint32_t m = node_count(cfg.prior);
    if (auto t = mechanism_default(cfg.mechanism); t && *t >= m)
        throw std::invalid_argument("mechanism default node out of range for this prior");

    const std::uint32_t workers = std::max<std::uint32_t>(1, cfg.workers);
    std::vector<detail::TrialAccumulator> parts(workers);
    if (workers == 1) {
        for (std::uint64_t i = 0; i < cfg.trials; ++i) detail::run_trial(cfg, i, parts[0]);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        pool.reserve(workers);
        for (std::uint32_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::uint64_t i = w; i < cfg.trials; i += workers)
                        detail::run_trial(cfg, i, parts[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    detail::TrialAccumulator total;
    for (const auto& p : parts) total.merge(p);

    MCEstimate est;
    est.trials = cfg.trials;
    est.seed = cfg.master_seed;
    est.gap_sum = total.gap_sum;
    est.gap_sq_sum = total.gap_sq_sum;
    est.via_default_count = total.via_default;
    est.gap_histogram = std::move(total.histogram);
    const double t = static_cast<double>(cfg.trials);
    est.mean_gap = static_cast<double>(total.gap_sum) / t;
    const double second_moment = static_cast<double>(total.gap_sq_sum) / t;
    const double variance = std::max(0.0, second_moment - est.mean_gap * est.mean_gap);
    est.std_error = cfg.trials > 1 ? std::sqrt(variance / t) : 0.0;
    return est;
}

// How the mechanism for a sweep point is built: a fixed default overrides the
// max-expected-degree rule.
struct MechanismRule {
    std::string kind;  // "constant" | "avd_beats" | "avd_tie" | "approval"
    std::optional<NodeId> forced_default;
};

inline Mechanism make_mechanism(const MechanismRule& rule, const Prior& prior) {
    if (rule.kind == "approval") return ApprovalVoting{};
    const NodeId t = rule.forced_default ? *rule.forced_default : default_node(prior);
    if (rule.kind == "constant") return Constant{t};
    if (rule.kind == "avd_beats") return AvdBeats{t};
    if (rule.kind == "avd_tie") return AvdTie{t};
    throw std::invalid_argument("unknown mechanism kind '" + rule.kind + "'");
}

struct SweepRow {
    std::int64_t n = 0;  // voters per candidate; the profile has n+1 nodes
    std::uint64_t trials = 0;
    double mean_gap = 0.0;
    double std_error = 0.0;
    double sqrt_nlogn = 0.0;
    double log_n = 0.0;
    double log2_n = 0.0;
    double ratio_sqrt_nlogn = 0.0;
    double ratio_log_n = 0.0;
    double ratio_log2_n = 0.0;
};

struct SweepSpec {
    double uniform_p = 0.5;
    MechanismRule rule;
    std::vector<std::int64_t> n_list;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    std::uint32_t workers = 1;
};

// One Monte Carlo run per n over Uniform(n+1, p), default node recomputed per
// point unless the rule forces one. Rows carry the reference rates for the
// scaling comparisons.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
    if (spec.n_list.empty()) throw std::invalid_argument("sweep needs a nonempty n list");
    for (std::size_t i = 1; i < spec.n_list.size(); ++i)
        if (spec.n_list[i] <= spec.n_list[i - 1])
            throw std::invalid_argument("sweep n list must be ascending");
    std::vector<SweepRow> rows;
    for (std::int64_t n : spec.n_list) {
        if (n < 1) throw std::invalid_argument("sweep points need n >= 1");
        RunConfig cfg;
        cfg.prior = Prior{UniformPrior{static_cast<std::uint32_t>(n) + 1, spec.uniform_p}};
        cfg.mechanism = make_mechanism(spec.rule, cfg.prior);
        cfg.trials = spec.trials;
        cfg.master_seed = spec.master_seed;
        cfg.workers = spec.workers;
        const MCEstimate est = mc_additive(cfg);

        SweepRow row;
        row.n = n;
        row.trials = est.trials;
        row.mean_gap = est.mean_gap;
        row.std_error = est.std_error;
        const double nd = static_cast<double>(n);
        row.sqrt_nlogn = std::sqrt(nd * std::log(nd));
        row.log_n = std::log(nd);
        row.log2_n = std::log(nd) * std::log(nd);
        row.ratio_sqrt_nlogn = row.mean_gap / row.sqrt_nlogn;
        row.ratio_log_n = row.mean_gap / row.log_n;
        row.ratio_log2_n = row.mean_gap / row.log2_n;
        rows.push_back(row);
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "n,trials,mean_gap,stderr,sqrt_nlogn,log_n,log2_n,gap_over_sqrt_nlogn,gap_over_log_n,"
        "gap_over_log2_n\n";
    char buf[320];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%lld,%llu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      static_cast<long long>(r.n), static_cast<unsigned long long>(r.trials),
                      r.mean_gap, r.std_error, r.sqrt_nlogn, r.log_n, r.log2_n,
                      r.ratio_sqrt_nlogn, r.ratio_log_n, r.ratio_log2_n);
        out += buf;
    }
    return out;
}

// AVD on the duplicated uniform construction: every node has a voteless twin
// with an identical in-neighborhood, so nobody beats everyone and the run
// must fall back to the default in every trial. The paired run is the
// constant mechanism on the base instance, whose gap it should track.
struct DuplicationResult {
    MCEstimate avd_on_duplicated;
    MCEstimate constant_on_base;
    double via_default_frequency = 0.0;
};

inline DuplicationResult scenario_duplication(std::int64_t n, std::uint64_t trials,
                                              std::uint64_t seed, std::uint32_t workers = 1) {
    const Prior base{UniformPrior{static_cast<std::uint32_t>(n) + 1, 0.5}};
    const Prior dup = duplicate(base);

    RunConfig avd_cfg;
    avd_cfg.prior = dup;
    avd_cfg.mechanism = AvdBeats{default_node(dup)};
    avd_cfg.trials = trials;
    avd_cfg.master_seed = seed;
    avd_cfg.workers = workers;

    RunConfig const_cfg;
    const_cfg.prior = base;
    const_cfg.mechanism = Constant{default_node(base)};
    const_cfg.trials = trials;
    const_cfg.master_seed = seed + 1;  // independent stream for an honest comparison
    const_cfg.workers = workers;

    DuplicationResult out;
    out.avd_on_duplicated = mc_additive(avd_cfg);
    out.constant_on_base = mc_additive(const_cfg);
    out.via_default_frequency =
        static_cast<double>(out.avd_on_duplicated.via_default_count) /
        static_cast<double>(trials);
    return out;
}

enum class AvdVariant { kBeats, kTie };

// The correlated two-block construction. Case frequencies count how many of
// the two blocks approved; the exact four-case enumeration is reported next
// to the Monte Carlo estimate because the two AVD variants behave differently
// here.
struct Example1Result {
    MCEstimate estimate;
    std::array<double, 3> case_frequencies{};  // neither / exactly one / both
    std::array<int, 4> exact_case_gaps{};      // neither, A-only, B-only, both
    double exact_mean_gap = 0.0;
    NodeId default_used = 0;
};

inline Example1Result scenario_example1(std::uint32_t k, AvdVariant variant,
                                        std::optional<NodeId> forced_default,
                                        std::uint64_t trials, std::uint64_t seed,
                                        std::uint32_t workers = 1) {
    if (k < 1) throw std::invalid_argument("block construction needs k >= 1");
    const Prior prior{BlockCorrelatedPrior{k}};
    const NodeId t = forced_default ? *forced_default : default_node(prior);
    const Mechanism mech =
        variant == AvdVariant::kBeats ? Mechanism{AvdBeats{t}} : Mechanism{AvdTie{t}};

    Example1Result out;
    out.default_used = t;

    const std::uint32_t m = 8 * k + 2;
    for (int mask = 0; mask < 4; ++mask) {
        NominationProfile prof(m);
        if (mask & 1)
            for (NodeId i = 0; i < 4 * k; ++i) prof.set_edge(i, 8 * k, true);
        if (mask & 2)
            for (NodeId i = 4 * k; i < 8 * k; ++i) prof.set_edge(i, 8 * k + 1, true);
        out.exact_case_gaps[mask] = select(mech, prof).gap;
    }
    out.exact_mean_gap = (out.exact_case_gaps[0] + out.exact_case_gaps[1] +
                          out.exact_case_gaps[2] + out.exact_case_gaps[3]) /
                         4.0;

    RunConfig cfg;
    cfg.prior = prior;
    cfg.mechanism = mech;
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.workers = workers;
    out.estimate = mc_additive(cfg);

    // Case split, re-deriving each trial's profile from its substream.
    std::array<std::uint64_t, 3> counts{};
    for (std::uint64_t i = 0; i < trials; ++i) {
        Rng rng = Rng::substream(seed, i);
        const NominationProfile prof = sample_profile(prior, rng);
        const bool a_on = prof.in_degree(8 * k) > 0;
        const bool b_on = prof.in_degree(8 * k + 1) > 0;
        counts[(a_on ? 1 : 0) + (b_on ? 1 : 0)] += 1;
    }
    for (int c = 0; c < 3; ++c)
        out.case_frequencies[c] = static_cast<double>(counts[c]) / static_cast<double>(trials);
    return out;
}

}  // namespace impsel
