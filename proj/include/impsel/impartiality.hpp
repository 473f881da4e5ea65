#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "impsel/mechanisms.hpp"
#include "impsel/priors.hpp"
#include "impsel/profile.hpp"
#include "impsel/rng.hpp"

namespace impsel {

// A witnessed impartiality violation: the deviator's own report flips whether
// the deviator wins. Re-verifiable by running the mechanism on both profiles.
struct Counterexample {
    NominationProfile profile;
    NodeId deviator = 0;
    std::vector<NodeId> alternative_out_edges;
    NodeId winner_before = 0;
    NodeId winner_after = 0;
};

struct CheckReport {
    bool pass = true;
    std::uint64_t profiles_checked = 0;
    std::optional<Counterexample> counterexample;
};

inline bool reverify(const Mechanism& mech, const Counterexample& cex) {
    const NodeId before = select(mech, cex.profile).winner;
    NominationProfile deviated = cex.profile;
    for (NodeId j = 0; j < deviated.node_count(); ++j)
        if (j != cex.deviator) deviated.set_edge(cex.deviator, j, false);
    for (NodeId j : cex.alternative_out_edges) deviated.set_edge(cex.deviator, j, true);
    const NodeId after = select(mech, deviated).winner;
    return before == cex.winner_before && after == cex.winner_after &&
           (before == cex.deviator) != (after == cex.deviator);
}

namespace detail {

inline std::vector<NodeId> mask_targets(NodeId voter, std::uint32_t mask, std::uint32_t m) {
    std::vector<NodeId> ts;
    for (std::uint32_t b = 0; b + 1 < m; ++b)
        if ((mask >> b) & 1u) ts.push_back(b < voter ? b : b + 1);
    return ts;
}

inline void apply_out_mask(NominationProfile& prof, NodeId voter, std::uint32_t mask) {
    const std::uint32_t m = prof.node_count();
    for (std::uint32_t b = 0; b + 1 < m; ++b) {
        const NodeId target = b < voter ? b : b + 1;
        prof.set_edge(voter, target, (mask >> b) & 1u);
    }
}

}  // namespace detail

// Checks the impartiality condition ("i wins at x iff i wins after replacing
// x_i") over every profile on m nodes and every alternative report. Stops at
// the first violation in enumeration order; deviations are tried empty set
// first, then full set, then lexicographically.
inline CheckReport check_exhaustive(const Mechanism& mech, std::uint32_t m) {
    if (m < 2 || m > 5)
        throw std::invalid_argument(
            "exhaustive check is limited to 2 <= m <= 5; (2^(m-1))^m profiles otherwise explode");
    if (auto t = mechanism_default(mech); t && *t >= m)
        throw std::invalid_argument("mechanism default node out of range");

    const std::uint32_t per = 1u << (m - 1);  // out-edge sets per node
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < m; ++i) total *= per;

    std::vector<std::uint32_t> deviation_order;
    deviation_order.push_back(0);
    if (per > 1) deviation_order.push_back(per - 1);
    for (std::uint32_t a = 1; a + 1 < per; ++a) deviation_order.push_back(a);

    CheckReport rep;
    NominationProfile prof(m);
    std::vector<std::uint32_t> masks(m);
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (std::uint32_t i = 0; i < m; ++i) {
            masks[i] = static_cast<std::uint32_t>(c % per);
            c /= per;
        }
        prof.clear();
        for (NodeId i = 0; i < m; ++i) detail::apply_out_mask(prof, i, masks[i]);
        rep.profiles_checked += 1;

        const NodeId before = select(mech, prof).winner;
        for (NodeId i = 0; i < m; ++i) {
            for (std::uint32_t alt : deviation_order) {
                detail::apply_out_mask(prof, i, alt);
                const NodeId after = select(mech, prof).winner;
                detail::apply_out_mask(prof, i, masks[i]);
                if ((before == i) != (after == i)) {
                    rep.pass = false;
                    rep.counterexample = Counterexample{
                        prof, i, detail::mask_targets(i, alt, m), before, after};
                    return rep;
                }
            }
        }
    }
    return rep;
}

// Randomized deviation search: samples profiles from the prior and, for every
// node, tries the empty report, the full report, all single-edge flips, and a
// few random reports.
inline CheckReport check_random(const Mechanism& mech, const Prior& prior, std::uint64_t trials,
                                Rng& rng) {
    const std::uint32_t m = node_count(prior);
    if (auto t = mechanism_default(mech); t && *t >= m)
        throw std::invalid_argument("mechanism default node out of range");

    CheckReport rep;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        NominationProfile prof = sample_profile(prior, rng);
        rep.profiles_checked += 1;
        const NodeId before = select(mech, prof).winner;

        for (NodeId i = 0; i < m; ++i) {
            const std::vector<NodeId> original = prof.out_edges_of(i);
            auto try_deviation = [&](const std::vector<NodeId>& alt) {
                for (NodeId j = 0; j < m; ++j)
                    if (j != i) prof.set_edge(i, j, false);
                for (NodeId j : alt) prof.set_edge(i, j, true);
                const NodeId after = select(mech, prof).winner;
                const bool violation = (before == i) != (after == i);
                if (violation) {
                    // Restore before capturing the original profile.
                    for (NodeId j = 0; j < m; ++j)
                        if (j != i) prof.set_edge(i, j, false);
                    for (NodeId j : original) prof.set_edge(i, j, true);
                    rep.pass = false;
                    rep.counterexample = Counterexample{prof, i, alt, before, after};
                }
                return violation;
            };

            std::vector<std::vector<NodeId>> deviations;
            deviations.emplace_back();  // empty report
            std::vector<NodeId> full;
            for (NodeId j = 0; j < m; ++j)
                if (j != i) full.push_back(j);
            deviations.push_back(full);
            for (NodeId j = 0; j < m; ++j) {  // single-edge flips
                if (j == i) continue;
                std::vector<NodeId> flip = original;
                if (auto it = std::find(flip.begin(), flip.end(), j); it != flip.end())
                    flip.erase(it);
                else
                    flip.push_back(j);
                deviations.push_back(std::move(flip));
            }
            for (int r = 0; r < 4; ++r) {  // random reports
                std::vector<NodeId> random_set;
                for (NodeId j = 0; j < m; ++j)
                    if (j != i && rng.bernoulli_ratio(1, 2)) random_set.push_back(j);
                deviations.push_back(std::move(random_set));
            }

            for (const auto& alt : deviations)
                if (try_deviation(alt)) return rep;

            for (NodeId j = 0; j < m; ++j)
                if (j != i) prof.set_edge(i, j, false);
            for (NodeId j : original) prof.set_edge(i, j, true);
        }
    }
    return rep;
}

}  // namespace impsel
