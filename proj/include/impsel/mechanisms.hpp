#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "impsel/priors.hpp"
#include "impsel/profile.hpp"

namespace impsel {

// Ignores the profile and returns t.
struct Constant {
    NodeId t = 0;
};

// Returns the unique node that beats every other node (the default itself may
// qualify), or t when no such node exists.
struct AvdBeats {
    NodeId t = 0;
};

// Returns the unique maximum-degree node when there is one, else t. Kept as a
// deliberately manipulable foil for the deviation checker.
struct AvdTie {
    NodeId t = 0;
};

// Plain approval voting, ties broken to the lowest index. Not impartial.
struct ApprovalVoting {};

using Mechanism = std::variant<Constant, AvdBeats, AvdTie, ApprovalVoting>;

inline std::optional<NodeId> mechanism_default(const Mechanism& mech) {
    if (const auto* c = std::get_if<Constant>(&mech)) return c->t;
    if (const auto* a = std::get_if<AvdBeats>(&mech)) return a->t;
    if (const auto* a = std::get_if<AvdTie>(&mech)) return a->t;
    return std::nullopt;
}

// The node of highest expected in-degree; ties break to the lowest index.
inline NodeId default_node(const Prior& prior) {
    const std::vector<double> e = expected_in_degrees(prior);
    std::size_t best = 0;
    for (std::size_t j = 1; j < e.size(); ++j)
        if (e[j] > e[best]) best = j;
    return static_cast<NodeId>(best);
}

struct SelectionOutcome {
    NodeId winner = 0;
    int winner_degree = 0;
    int gap = 0;  // max in-degree minus winner degree
    bool via_default = false;
};

namespace detail {

inline void check_default(NodeId t, std::uint32_t m) {
    if (t >= m) throw std::invalid_argument("default node out of range for this profile");
}

// Restricted-degree comparison against precomputed full degrees; the
// exclusion sets only ever hold two or three nodes.
struct BeatsEval {
    const NominationProfile& prof;
    const std::vector<int>& deg;

    bool edge(NodeId src, NodeId dst) const {
        return (prof.row(dst)[src >> 6] >> (src & 63)) & 1u;
    }
    // k beats j with default t.
    bool operator()(NodeId k, NodeId j, NodeId t) const {
        if (j == t || k == t) {
            const NodeId nd = (k == t) ? j : k;  // the non-default side
            const int d_nd = deg[nd] - (edge(t, nd) ? 1 : 0);
            const int d_t = deg[t] - (edge(nd, t) ? 1 : 0);
            return (k == t) ? d_t > d_nd : d_nd > d_t;
        }
        const int dk = deg[k] - (edge(j, k) ? 1 : 0) - (edge(t, k) ? 1 : 0);
        const int dj = deg[j] - (edge(k, j) ? 1 : 0) - (edge(t, j) ? 1 : 0);
        return dk > dj;
    }
};

}  // namespace detail

inline SelectionOutcome select(const Mechanism& mech, const NominationProfile& prof) {
    const std::uint32_t m = prof.node_count();
    const std::vector<int> deg = prof.degree_vector();
    int delta = 0;
    for (int d : deg) delta = std::max(delta, d);

    auto outcome = [&](NodeId w, bool via_default) {
        return SelectionOutcome{w, deg[w], delta - deg[w], via_default};
    };

    if (const auto* c = std::get_if<Constant>(&mech)) {
        detail::check_default(c->t, m);
        return outcome(c->t, true);
    }
    if (const auto* a = std::get_if<AvdBeats>(&mech)) {
        detail::check_default(a->t, m);
        const detail::BeatsEval beats{prof, deg};
        // Only nodes of degree >= delta-1 (plus the default) can beat every
        // other node; anything else already loses some comparison on counts.
        for (NodeId c = 0; c < m; ++c) {
            if (deg[c] < delta - 1 && c != a->t) continue;
            bool all = true;
            for (NodeId j = 0; j < m && all; ++j)
                if (j != c) all = beats(c, j, a->t);
            if (all) return outcome(c, false);
        }
        return outcome(a->t, true);
    }
    if (const auto* a = std::get_if<AvdTie>(&mech)) {
        detail::check_default(a->t, m);
        NodeId arg = 0;
        int count = 0;
        for (NodeId j = 0; j < m; ++j)
            if (deg[j] == delta) {
                if (count++ == 0) arg = j;
            }
        return count == 1 ? outcome(arg, false) : outcome(a->t, true);
    }
    // Approval voting: lowest-index maximum.
    for (NodeId j = 0; j < m; ++j)
        if (deg[j] == delta) return outcome(j, false);
    throw std::logic_error("unreachable: empty profile");
}

// Exact AVD over a lazily revealed popularity sample. Candidates are the
// nodes whose totals reach delta-1, plus the default; comparisons whose total
// difference is at least 3 are settled without reveals (the exclusion
// adjustment on each side is at most 2), so only near-tied pairs touch edges.
inline SelectionOutcome select_lazy(const AvdBeats& mech, LazySample& s, Rng& rng) {
    const std::uint32_t m = s.m;
    detail::check_default(mech.t, m);
    int delta = 0;
    for (std::int32_t d : s.totals) delta = std::max(delta, static_cast<int>(d));

    auto x = [&](NodeId src, NodeId dst) { return reveal_edge(s, src, dst, rng) ? 1 : 0; };
    auto beats_lazy = [&](NodeId k, NodeId j) {
        const int diff = s.totals[k] - s.totals[j];
        if (diff >= 3) return true;
        if (diff <= -3) return false;
        if (k == mech.t || j == mech.t) {
            const NodeId nd = (k == mech.t) ? j : k;
            const int d_nd = s.totals[nd] - x(mech.t, nd);
            const int d_t = s.totals[mech.t] - x(nd, mech.t);
            return (k == mech.t) ? d_t > d_nd : d_nd > d_t;
        }
        const int dk = s.totals[k] - x(j, k) - x(mech.t, k);
        const int dj = s.totals[j] - x(k, j) - x(mech.t, j);
        return dk > dj;
    };

    auto outcome = [&](NodeId w, bool via_default) {
        return SelectionOutcome{w, static_cast<int>(s.totals[w]),
                                delta - static_cast<int>(s.totals[w]), via_default};
    };
    for (NodeId c = 0; c < m; ++c) {
        if (s.totals[c] < delta - 1 && c != mech.t) continue;
        bool all = true;
        for (NodeId j = 0; j < m && all; ++j)
            if (j != c) all = beats_lazy(c, j);
        if (all) return outcome(c, false);
    }
    return outcome(mech.t, true);
}

}  // namespace impsel
