#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace impsel {

using NodeId = std::uint32_t;

// A nomination profile: a directed graph without self-loops. Stored as one
// incoming-edge bitset per node, so restricted in-degree queries are popcounts
// and the checker can enumerate millions of small profiles cheaply. Immutable
// in normal use; the mutating entry points exist for samplers and the
// deviation checker.
class NominationProfile {
public:
    explicit NominationProfile(std::uint32_t m)
        : m_(m), words_((m + 63) / 64), in_bits_(static_cast<std::size_t>(m) * words_, 0) {
        if (m < 1) throw std::invalid_argument("profile needs at least one node");
    }

    static NominationProfile from_edges(std::uint32_t m,
                                        std::span<const std::pair<NodeId, NodeId>> edges) {
        NominationProfile p(m);
        for (const auto& [src, dst] : edges) p.add_edge(src, dst);
        return p;
    }

    std::uint32_t node_count() const { return m_; }

    bool has_edge(NodeId src, NodeId dst) const {
        check_node(src);
        check_node(dst);
        return (row(dst)[src >> 6] >> (src & 63)) & 1u;
    }

    void add_edge(NodeId src, NodeId dst) {
        validate_edge(src, dst);
        std::uint64_t& w = row(dst)[src >> 6];
        const std::uint64_t bit = 1ULL << (src & 63);
        if (w & bit)
            throw std::invalid_argument("duplicate edge (" + std::to_string(src) + "," +
                                        std::to_string(dst) + ")");
        w |= bit;
    }

    // Idempotent set/clear, used by samplers and the deviation enumerator.
    void set_edge(NodeId src, NodeId dst, bool present) {
        validate_edge(src, dst);
        std::uint64_t& w = row(dst)[src >> 6];
        const std::uint64_t bit = 1ULL << (src & 63);
        if (present)
            w |= bit;
        else
            w &= ~bit;
    }

    void clear() { std::fill(in_bits_.begin(), in_bits_.end(), 0); }

    int in_degree(NodeId j) const {
        check_node(j);
        const std::uint64_t* r = row(j);
        int c = 0;
        for (std::uint32_t w = 0; w < words_; ++w) c += std::popcount(r[w]);
        return c;
    }

    // In-degree of j counting only voters outside `exclude` (j itself never
    // counts; listing it in `exclude` is harmless).
    int in_degree(NodeId j, std::span<const NodeId> exclude) const {
        int c = in_degree(j);
        const std::uint64_t* r = row(j);
        for (NodeId e : exclude) {
            check_node(e);
            c -= static_cast<int>((r[e >> 6] >> (e & 63)) & 1u);
        }
        return c;
    }

    std::pair<int, std::vector<NodeId>> max_in_degree() const {
        int best = -1;
        std::vector<NodeId> argmax;
        for (NodeId j = 0; j < m_; ++j) {
            const int d = in_degree(j);
            if (d > best) {
                best = d;
                argmax.assign(1, j);
            } else if (d == best) {
                argmax.push_back(j);
            }
        }
        return {best, std::move(argmax)};
    }

    std::vector<int> degree_vector() const {
        std::vector<int> d(m_);
        for (NodeId j = 0; j < m_; ++j) d[j] = in_degree(j);
        return d;
    }

    // k beats j relative to default node t. Both counts always drop the votes
    // of the two compared nodes and of t; that exclusion is what makes the
    // derived mechanism impartial.
    bool beats(NodeId k, NodeId j, NodeId t) const {
        if (k == j) throw std::invalid_argument("beats() needs two distinct nodes");
        if (j == t) {
            const NodeId ex[2] = {k, t};
            return in_degree(k, ex) > in_degree(t, ex);
        }
        if (k == t) {
            const NodeId ex[2] = {j, t};
            return in_degree(t, ex) > in_degree(j, ex);
        }
        const NodeId ex[3] = {j, k, t};
        return in_degree(k, ex) > in_degree(j, ex);
    }

    int additive_gap(NodeId w) const {
        check_node(w);
        return max_in_degree().first - in_degree(w);
    }

    // Edges in lexicographic (src, dst) order; the canonical serialization.
    std::vector<std::pair<NodeId, NodeId>> edges() const {
        std::vector<std::pair<NodeId, NodeId>> es;
        for (NodeId src = 0; src < m_; ++src)
            for (NodeId dst = 0; dst < m_; ++dst)
                if (src != dst && ((row(dst)[src >> 6] >> (src & 63)) & 1u)) es.emplace_back(src, dst);
        return es;
    }

    std::vector<NodeId> out_edges_of(NodeId i) const {
        check_node(i);
        std::vector<NodeId> ts;
        for (NodeId dst = 0; dst < m_; ++dst)
            if (dst != i && ((row(dst)[i >> 6] >> (i & 63)) & 1u)) ts.push_back(dst);
        return ts;
    }

    bool operator==(const NominationProfile& o) const {
        return m_ == o.m_ && in_bits_ == o.in_bits_;
    }

    // Raw row access for samplers (row j = bitset of voters approving j).
    std::uint64_t* row(NodeId j) { return in_bits_.data() + static_cast<std::size_t>(j) * words_; }
    const std::uint64_t* row(NodeId j) const {
        return in_bits_.data() + static_cast<std::size_t>(j) * words_;
    }
    std::uint32_t row_words() const { return words_; }

private:
    void check_node(NodeId v) const {
        if (v >= m_)
            throw std::invalid_argument("node " + std::to_string(v) + " out of range for m=" +
                                        std::to_string(m_));
    }

    void validate_edge(NodeId src, NodeId dst) const {
        if (src == dst)
            throw std::invalid_argument("self-loop edge (" + std::to_string(src) + "," +
                                        std::to_string(dst) + ")");
        check_node(src);
        check_node(dst);
    }

    std::uint32_t m_;
    std::uint32_t words_;
    std::vector<std::uint64_t> in_bits_;
};

inline NominationProfile new_profile(std::uint32_t m,
                                     std::span<const std::pair<NodeId, NodeId>> edges) {
    return NominationProfile::from_edges(m, edges);
}

}  // namespace impsel
