#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "impsel/bounds.hpp"
#include "impsel/experiments.hpp"
#include "impsel/impartiality.hpp"
#include "impsel/mechanisms.hpp"
#include "impsel/priors.hpp"
#include "impsel/profile.hpp"

namespace impsel {

using nlohmann::json;

inline json profile_to_json(const NominationProfile& p) {
    json edges = json::array();
    for (const auto& [src, dst] : p.edges()) edges.push_back({src, dst});
    return {{"m", p.node_count()}, {"edges", edges}};
}

inline NominationProfile profile_from_json(const json& j) {
    const auto m = j.at("m").get<std::uint32_t>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges"))
        edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    return NominationProfile::from_edges(m, edges);
}

namespace detail {

// "p_csv": one float per cell, comma separated, one row per line.
inline std::vector<std::vector<double>> read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open CSV file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<double> number_vector(const json& j, const char* inline_key,
                                         const char* csv_key) {
    if (j.contains(inline_key)) return j.at(inline_key).get<std::vector<double>>();
    if (j.contains(csv_key)) {
        std::vector<double> flat;
        for (const auto& row : read_csv_matrix(j.at(csv_key).get<std::string>()))
            flat.insert(flat.end(), row.begin(), row.end());
        return flat;
    }
    throw std::invalid_argument(std::string("prior config needs '") + inline_key + "' or '" +
                                csv_key + "'");
}

}  // namespace detail

inline json prior_to_json(const Prior& prior) {
    struct Visitor {
        json operator()(const UniformPrior& u) const {
            return {{"kind", "uniform"}, {"m", u.m}, {"p", u.p}};
        }
        json operator()(const PopularityPrior& p) const {
            return {{"kind", "popularity"}, {"p", p.p}};
        }
        json operator()(const EdgeMatrixPrior& e) const {
            return {{"kind", "edge_matrix"}, {"q", e.q}};
        }
        json operator()(const SubsetTablePrior& s) const {
            json rows = json::array();
            for (const auto& row : s.rows) {
                json jrow = json::array();
                for (const auto& entry : row) jrow.push_back({entry.subset, entry.prob});
                rows.push_back(jrow);
            }
            return {{"kind", "subset_table"}, {"rows", rows}};
        }
        json operator()(const DuplicatedPrior& d) const {
            return {{"kind", "duplicated"}, {"base", prior_to_json(*d.base)}};
        }
        json operator()(const BlockCorrelatedPrior& b) const {
            return {{"kind", "block_correlated"}, {"k", b.k}};
        }
    };
    return std::visit(Visitor{}, prior.v);
}

inline Prior prior_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    Prior prior;
    if (kind == "uniform") {
        prior.v = UniformPrior{j.at("m").get<std::uint32_t>(), j.at("p").get<double>()};
    } else if (kind == "popularity") {
        prior.v = PopularityPrior{detail::number_vector(j, "p", "p_csv")};
    } else if (kind == "edge_matrix") {
        if (j.contains("q"))
            prior.v = EdgeMatrixPrior{j.at("q").get<std::vector<std::vector<double>>>()};
        else
            prior.v = EdgeMatrixPrior{detail::read_csv_matrix(j.at("q_csv").get<std::string>())};
    } else if (kind == "subset_table") {
        SubsetTablePrior st;
        for (const auto& jrow : j.at("rows")) {
            std::vector<SubsetTablePrior::Entry> row;
            for (const auto& jentry : jrow)
                row.push_back({jentry.at(0).get<std::vector<NodeId>>(), jentry.at(1).get<double>()});
            st.rows.push_back(std::move(row));
        }
        prior.v = std::move(st);
    } else if (kind == "duplicated") {
        prior.v = DuplicatedPrior{std::make_shared<Prior>(prior_from_json(j.at("base")))};
    } else if (kind == "block_correlated") {
        prior.v = BlockCorrelatedPrior{j.at("k").get<std::uint32_t>()};
    } else {
        throw std::invalid_argument("unknown prior kind '" + kind + "'");
    }
    validate_prior(prior);
    return prior;
}

inline json mechanism_to_json(const Mechanism& mech) {
    json j;
    if (std::holds_alternative<Constant>(mech)) j["kind"] = "constant";
    if (std::holds_alternative<AvdBeats>(mech)) j["kind"] = "avd_beats";
    if (std::holds_alternative<AvdTie>(mech)) j["kind"] = "avd_tie";
    if (std::holds_alternative<ApprovalVoting>(mech)) j["kind"] = "approval";
    if (auto t = mechanism_default(mech)) j["default"] = *t;
    return j;
}

// A mechanism config whose "default" is optional: absent means "use the node
// of highest expected in-degree of the prior at hand".
inline MechanismRule mechanism_rule_from_json(const json& j) {
    MechanismRule rule;
    rule.kind = j.at("kind").get<std::string>();
    if (rule.kind != "constant" && rule.kind != "avd_beats" && rule.kind != "avd_tie" &&
        rule.kind != "approval")
        throw std::invalid_argument("unknown mechanism kind '" + rule.kind + "'");
    if (j.contains("default")) rule.forced_default = j.at("default").get<NodeId>();
    return rule;
}

inline Mechanism mechanism_from_json(const json& j, const Prior& prior) {
    return make_mechanism(mechanism_rule_from_json(j), prior);
}

inline json counterexample_to_json(const Counterexample& cex) {
    return {{"profile", profile_to_json(cex.profile)},
            {"deviator", cex.deviator},
            {"alternative_out_edges", cex.alternative_out_edges},
            {"winner_before", cex.winner_before},
            {"winner_after", cex.winner_after}};
}

inline json check_report_to_json(const CheckReport& rep) {
    json j = {{"verdict", rep.pass ? "pass" : "fail"},
              {"profiles_checked", rep.profiles_checked}};
    if (rep.counterexample) j["counterexample"] = counterexample_to_json(*rep.counterexample);
    return j;
}

inline json bound_report_to_json(const BoundReport& rep) {
    json points = json::array();
    for (const auto& c : rep.checks)
        points.push_back(
            {{"point", c.point}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"margin", c.rhs - c.lhs}});
    json violations = json::array();
    for (const auto& v : rep.violations)
        violations.push_back(
            {{"point", v.point}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"margin", v.rhs - v.lhs}});
    return {{"inequality", rep.inequality}, {"grid", rep.grid},
            {"points_checked", rep.points_checked}, {"holds", rep.holds()},
            {"violations", violations}, {"skipped", rep.skipped},
            {"points", points}};
}

inline json mc_estimate_to_json(const MCEstimate& est) {
    json histogram = json::object();
    for (const auto& [gap, count] : est.gap_histogram)
        histogram[std::to_string(gap)] = count;
    return {{"mean_gap", est.mean_gap},
            {"stderr", est.std_error},
            {"trials", est.trials},
            {"seed", est.seed},
            {"gap_sum", est.gap_sum},
            {"gap_sq_sum", est.gap_sq_sum},
            {"via_default_frequency",
             est.trials ? static_cast<double>(est.via_default_count) /
                              static_cast<double>(est.trials)
                        : 0.0},
            {"gap_histogram", histogram}};
}

}  // namespace impsel
