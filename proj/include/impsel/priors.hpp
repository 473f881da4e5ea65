#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "impsel/binomial.hpp"
#include "impsel/profile.hpp"
#include "impsel/rng.hpp"

namespace impsel {

struct Prior;

// All candidates share one approval probability.
struct UniformPrior {
    std::uint32_t m = 0;
    double p = 0.0;
};

// Edge (i, j) appears independently with probability p[j]; in-degrees are
// Bin(m-1, p[j]) and independent across candidates.
struct PopularityPrior {
    std::vector<double> p;
};

// Independent edges with per-pair probabilities q[i][j] (diagonal zero).
struct EdgeMatrixPrior {
    std::vector<std::vector<double>> q;
};

// Full per-voter subset distributions; exact but exponential, so only small
// tables are supported (<= 2^15 entries per voter).
struct SubsetTablePrior {
    struct Entry {
        std::vector<NodeId> subset;
        double prob = 0.0;
    };
    std::vector<std::vector<Entry>> rows;
};

// Every node j of the base prior gets a voteless copy j' = m + j that mirrors
// each realized edge (i, j) as (i, j').
struct DuplicatedPrior {
    std::shared_ptr<const Prior> base;
};

// 8k+2 nodes: blocks A = [0,4k) and B = [4k,8k) plus candidates a = 8k and
// b = 8k+1. One fair coin sends all of A to a, an independent coin all of B
// to b. Within-block votes are perfectly correlated.
struct BlockCorrelatedPrior {
    std::uint32_t k = 0;
};

struct Prior {
    std::variant<UniformPrior, PopularityPrior, EdgeMatrixPrior, SubsetTablePrior, DuplicatedPrior,
                 BlockCorrelatedPrior>
        v;
};

inline constexpr std::uint32_t kEdgeMatrixSampleCap = 1u << 14;
inline constexpr std::size_t kSubsetTableRowCap = std::size_t{1} << 15;

inline std::uint32_t node_count(const Prior& prior);

namespace detail {
struct NodeCountVisitor {
    std::uint32_t operator()(const UniformPrior& u) const { return u.m; }
    std::uint32_t operator()(const PopularityPrior& p) const {
        return static_cast<std::uint32_t>(p.p.size());
    }
    std::uint32_t operator()(const EdgeMatrixPrior& e) const {
        return static_cast<std::uint32_t>(e.q.size());
    }
    std::uint32_t operator()(const SubsetTablePrior& s) const {
        return static_cast<std::uint32_t>(s.rows.size());
    }
    std::uint32_t operator()(const DuplicatedPrior& d) const { return 2 * node_count(*d.base); }
    std::uint32_t operator()(const BlockCorrelatedPrior& b) const { return 8 * b.k + 2; }
};
}  // namespace detail

inline std::uint32_t node_count(const Prior& prior) {
    return std::visit(detail::NodeCountVisitor{}, prior.v);
}

inline void validate_prior(const Prior& prior) {
    auto check01 = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument(std::string(what) + " must be in [0,1]");
    };
    if (const auto* u = std::get_if<UniformPrior>(&prior.v)) {
        if (u->m < 1) throw std::invalid_argument("uniform prior needs m >= 1");
        check01(u->p, "uniform probability");
    } else if (const auto* pp = std::get_if<PopularityPrior>(&prior.v)) {
        if (pp->p.empty()) throw std::invalid_argument("popularity prior needs m >= 1");
        for (double p : pp->p) check01(p, "popularity");
    } else if (const auto* em = std::get_if<EdgeMatrixPrior>(&prior.v)) {
        const std::size_t m = em->q.size();
        if (m < 1) throw std::invalid_argument("edge matrix prior needs m >= 1");
        for (std::size_t i = 0; i < m; ++i) {
            if (em->q[i].size() != m) throw std::invalid_argument("edge matrix must be square");
            for (std::size_t j = 0; j < m; ++j) check01(em->q[i][j], "edge probability");
            if (em->q[i][i] != 0.0)
                throw std::invalid_argument("edge matrix diagonal must be exactly 0");
        }
    } else if (const auto* st = std::get_if<SubsetTablePrior>(&prior.v)) {
        const std::size_t m = st->rows.size();
        if (m < 1) throw std::invalid_argument("subset table prior needs m >= 1");
        for (std::size_t i = 0; i < m; ++i) {
            if (st->rows[i].size() > kSubsetTableRowCap)
                throw std::invalid_argument("subset table row exceeds 2^15 entries");
            double total = 0.0;
            for (const auto& e : st->rows[i]) {
                check01(e.prob, "subset probability");
                total += e.prob;
                for (NodeId t : e.subset) {
                    if (t >= m) throw std::invalid_argument("subset target out of range");
                    if (t == i) throw std::invalid_argument("subset contains the voter itself");
                }
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw std::invalid_argument("subset table row " + std::to_string(i) +
                                            " does not sum to 1");
        }
    } else if (const auto* d = std::get_if<DuplicatedPrior>(&prior.v)) {
        if (!d->base) throw std::invalid_argument("duplicated prior needs a base");
        if (!std::holds_alternative<UniformPrior>(d->base->v) &&
            !std::holds_alternative<PopularityPrior>(d->base->v) &&
            !std::holds_alternative<EdgeMatrixPrior>(d->base->v))
            throw std::invalid_argument(
                "duplicated prior supports uniform, popularity, or edge-matrix bases");
        validate_prior(*d->base);
    } else if (const auto* bc = std::get_if<BlockCorrelatedPrior>(&prior.v)) {
        if (bc->k < 1) throw std::invalid_argument("block-correlated prior needs k >= 1");
    }
}

inline std::vector<double> expected_in_degrees(const Prior& prior) {
    struct Visitor {
        std::vector<double> operator()(const UniformPrior& u) const {
            return std::vector<double>(u.m, (u.m - 1) * u.p);
        }
        std::vector<double> operator()(const PopularityPrior& pp) const {
            const double n = static_cast<double>(pp.p.size()) - 1.0;
            std::vector<double> e(pp.p.size());
            for (std::size_t j = 0; j < pp.p.size(); ++j) e[j] = n * pp.p[j];
            return e;
        }
        std::vector<double> operator()(const EdgeMatrixPrior& em) const {
            const std::size_t m = em.q.size();
            std::vector<double> e(m, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) e[j] += em.q[i][j];
            return e;
        }
        std::vector<double> operator()(const SubsetTablePrior& st) const {
            const std::size_t m = st.rows.size();
            std::vector<double> e(m, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                for (const auto& entry : st.rows[i])
                    for (NodeId t : entry.subset) e[t] += entry.prob;
            return e;
        }
        std::vector<double> operator()(const DuplicatedPrior& d) const {
            std::vector<double> base = expected_in_degrees(*d.base);
            std::vector<double> e(base.size() * 2);
            for (std::size_t j = 0; j < base.size(); ++j) e[j] = e[base.size() + j] = base[j];
            return e;
        }
        std::vector<double> operator()(const BlockCorrelatedPrior& bc) const {
            std::vector<double> e(8 * bc.k + 2, 0.0);
            e[8 * bc.k] = 2.0 * bc.k;
            e[8 * bc.k + 1] = 2.0 * bc.k;
            return e;
        }
    };
    return std::visit(Visitor{}, prior.v);
}

// Exact Bin(n, p) draw by inversion, walking outward from the mode so the
// expected work is O(sqrt(n p (1-p))).
inline std::int64_t binomial_sample(std::int64_t n, double p, Rng& rng) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const std::int64_t mode = detail::binom_mode(n, p);
    const double pivot = std::exp(static_cast<double>(detail::lpmf_ld(n, p, mode)));
    double u = rng.uniform01() - pivot;
    if (u < 0) return mode;
    const double odds = p / (1.0 - p);
    double up_pmf = pivot, down_pmf = pivot;
    std::int64_t up_k = mode, down_k = mode;
    while (up_k < n || down_k > 0) {
        if (up_k < n) {
            up_pmf *= (static_cast<double>(n - up_k) / static_cast<double>(up_k + 1)) * odds;
            ++up_k;
            u -= up_pmf;
            if (u < 0) return up_k;
        }
        if (down_k > 0) {
            down_pmf *= (static_cast<double>(down_k) / static_cast<double>(n - down_k + 1)) / odds;
            --down_k;
            u -= down_pmf;
            if (u < 0) return down_k;
        }
    }
    return mode;  // residual rounding mass
}

namespace detail {

// Floyd's algorithm: a uniform d-subset of the m-1 potential voters for
// `target`, written straight into the profile row. Integer-only draws.
inline void sample_in_neighbors(NominationProfile& prof, NodeId target, std::int64_t d, Rng& rng) {
    const std::int64_t n_src = static_cast<std::int64_t>(prof.node_count()) - 1;
    std::uint64_t* row = prof.row(target);
    auto to_source = [target](std::uint64_t idx) -> NodeId {
        return static_cast<NodeId>(idx < target ? idx : idx + 1);
    };
    for (std::int64_t i = n_src - d; i < n_src; ++i) {
        const std::uint64_t r = rng.below(static_cast<std::uint64_t>(i) + 1);
        NodeId pick = to_source(r);
        if ((row[pick >> 6] >> (pick & 63)) & 1u) pick = to_source(static_cast<std::uint64_t>(i));
        row[pick >> 6] |= 1ULL << (pick & 63);
    }
}

inline void sample_binomial_rows(NominationProfile& prof, const std::vector<double>& pop,
                                 Rng& rng) {
    const auto m = prof.node_count();
    for (NodeId j = 0; j < m; ++j) {
        const std::int64_t d = binomial_sample(m - 1, pop[j], rng);
        sample_in_neighbors(prof, j, d, rng);
    }
}

}  // namespace detail

inline NominationProfile sample_profile(const Prior& prior, Rng& rng) {
    struct Visitor {
        Rng& rng;
        NominationProfile operator()(const UniformPrior& u) const {
            NominationProfile prof(u.m);
            detail::sample_binomial_rows(prof, std::vector<double>(u.m, u.p), rng);
            return prof;
        }
        NominationProfile operator()(const PopularityPrior& pp) const {
            NominationProfile prof(static_cast<std::uint32_t>(pp.p.size()));
            detail::sample_binomial_rows(prof, pp.p, rng);
            return prof;
        }
        NominationProfile operator()(const EdgeMatrixPrior& em) const {
            const auto m = static_cast<std::uint32_t>(em.q.size());
            if (m > kEdgeMatrixSampleCap)
                throw std::invalid_argument("edge-matrix sampling is capped at m <= 2^14");
            NominationProfile prof(m);
            for (NodeId j = 0; j < m; ++j) {
                std::uint64_t* row = prof.row(j);
                for (NodeId i = 0; i < m; ++i)
                    if (i != j && rng.bernoulli(em.q[i][j])) row[i >> 6] |= 1ULL << (i & 63);
            }
            return prof;
        }
        NominationProfile operator()(const SubsetTablePrior& st) const {
            const auto m = static_cast<std::uint32_t>(st.rows.size());
            NominationProfile prof(m);
            for (NodeId i = 0; i < m; ++i) {
                if (st.rows[i].empty()) continue;
                double u = rng.uniform01();
                const auto& row = st.rows[i];
                std::size_t pick = row.size() - 1;  // final entry absorbs rounding slack
                for (std::size_t e = 0; e < row.size(); ++e) {
                    u -= row[e].prob;
                    if (u < 0) {
                        pick = e;
                        break;
                    }
                }
                for (NodeId t : row[pick].subset) prof.set_edge(i, t, true);
            }
            return prof;
        }
        NominationProfile operator()(const DuplicatedPrior& d) const {
            const NominationProfile base = sample_profile(*d.base, rng);
            const std::uint32_t m = base.node_count();
            NominationProfile prof(2 * m);
            for (NodeId j = 0; j < m; ++j) {
                const std::uint64_t* src = base.row(j);
                std::uint64_t* orig = prof.row(j);
                std::uint64_t* copy = prof.row(m + j);
                for (std::uint32_t w = 0; w < base.row_words(); ++w) orig[w] = copy[w] = src[w];
            }
            return prof;
        }
        NominationProfile operator()(const BlockCorrelatedPrior& bc) const {
            const std::uint32_t k = bc.k;
            NominationProfile prof(8 * k + 2);
            if (rng.bernoulli_ratio(1, 2))
                for (NodeId i = 0; i < 4 * k; ++i) prof.set_edge(i, 8 * k, true);
            if (rng.bernoulli_ratio(1, 2))
                for (NodeId i = 4 * k; i < 8 * k; ++i) prof.set_edge(i, 8 * k + 1, true);
            return prof;
        }
    };
    return std::visit(Visitor{rng}, prior.v);
}

inline Prior duplicate(const Prior& base) {
    Prior d{DuplicatedPrior{std::make_shared<Prior>(base)}};
    validate_prior(d);
    return d;
}

// A popularity sample with only the in-degree totals drawn; which voters cast
// them is revealed edge by edge on demand. The conditional reveal keeps every
// revealed set a uniform subset of the right size, so fully revealing
// reproduces the dense distribution exactly.
struct LazySample {
    std::uint32_t m = 0;
    std::vector<std::int32_t> totals;
    std::vector<std::int32_t> revealed;
    std::vector<std::int32_t> revealed_positive;
    std::unordered_map<std::uint64_t, bool> memo;
};

inline LazySample sample_lazy(const Prior& prior, Rng& rng) {
    std::vector<double> pop;
    if (const auto* u = std::get_if<UniformPrior>(&prior.v)) {
        pop.assign(u->m, u->p);
    } else if (const auto* pp = std::get_if<PopularityPrior>(&prior.v)) {
        pop = pp->p;
    } else {
        throw std::invalid_argument("lazy sampling needs a uniform or popularity prior");
    }
    LazySample s;
    s.m = static_cast<std::uint32_t>(pop.size());
    s.totals.resize(s.m);
    s.revealed.assign(s.m, 0);
    s.revealed_positive.assign(s.m, 0);
    for (NodeId j = 0; j < s.m; ++j)
        s.totals[j] = static_cast<std::int32_t>(binomial_sample(s.m - 1, pop[j], rng));
    return s;
}

// Indicator of edge (i, j), consistent with totals[j]: the reveal probability
// is remaining positives over remaining unrevealed voters. Memoized, so
// overlapping queries see one consistent profile.
inline bool reveal_edge(LazySample& s, NodeId i, NodeId j, Rng& rng) {
    if (i == j) throw std::invalid_argument("self-loop reveal query");
    if (i >= s.m || j >= s.m) throw std::invalid_argument("reveal query out of range");
    const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | j;
    if (auto it = s.memo.find(key); it != s.memo.end()) return it->second;
    const std::int32_t remaining_positive = s.totals[j] - s.revealed_positive[j];
    const std::int32_t remaining = static_cast<std::int32_t>(s.m) - 1 - s.revealed[j];
    const bool present = rng.bernoulli_ratio(static_cast<std::uint64_t>(remaining_positive),
                                             static_cast<std::uint64_t>(remaining));
    s.memo.emplace(key, present);
    s.revealed[j] += 1;
    s.revealed_positive[j] += present ? 1 : 0;
    return present;
}

}  // namespace impsel
