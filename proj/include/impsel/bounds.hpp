#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "impsel/binomial.hpp"
#include "impsel/mechanisms.hpp"

namespace impsel {

// Analytic bounds can exceed 1; they are reported capped with the raw value
// kept alongside.
struct BoundValue {
    double raw = 0.0;
    double capped = 0.0;
};

inline BoundValue capped_bound(double raw) { return {raw, std::min(1.0, raw)}; }

// Two-sided Hoeffding bound 2 exp(-2 nu^2 / sum (b_j - a_j)^2) for a sum of
// independent variables confined to the given ranges.
inline BoundValue hoeffding_bound(std::span<const std::pair<double, double>> ranges, double nu) {
    if (nu < 0) throw std::invalid_argument("hoeffding deviation must be >= 0");
    double denom = 0.0;
    for (const auto& [a, b] : ranges) {
        if (b < a) throw std::invalid_argument("hoeffding range with b < a");
        denom += (b - a) * (b - a);
    }
    if (denom == 0.0) return nu > 0 ? BoundValue{0.0, 0.0} : BoundValue{1.0, 1.0};
    return capped_bound(2.0 * std::exp(-2.0 * nu * nu / denom));
}

// The four tail bounds for Bin(n, p); each is present only when its regime
// condition holds. The okamoto_* pair covers the mean on the respective far
// side of n/2, the chernoff_* pair the near side.
struct ChernoffBounds {
    std::optional<BoundValue> okamoto_upper;   // Pr[B >= x], x >= mu, mu >= n/2
    std::optional<BoundValue> chernoff_upper;  // Pr[B >= x], x >= mu, mu < n/2, x <= 2 mu
    std::optional<BoundValue> okamoto_lower;   // Pr[B <= x], x <= mu, mu <= n/2
    std::optional<BoundValue> chernoff_lower;  // Pr[B <= x], x <= mu, mu > n/2, x >= 2 mu - n
};

inline ChernoffBounds chernoff_bounds(const BinomialSpec& b, std::int64_t x) {
    detail::check_spec(b);
    const double n = static_cast<double>(b.n);
    const double mu = binom_mean(b);
    const double xd = static_cast<double>(x);
    ChernoffBounds out;
    if (xd >= mu) {
        if (mu >= n / 2) {
            const double denom = 2.0 * mu * (n - mu);
            out.okamoto_upper =
                capped_bound(denom > 0 ? std::exp(-(xd - mu) * (xd - mu) * n / denom) : 1.0);
        }
        if (mu < n / 2 && xd <= 2 * mu)
            out.chernoff_upper =
                capped_bound(mu > 0 ? std::exp(-(xd - mu) * (xd - mu) / (3.0 * mu)) : 1.0);
    }
    if (xd <= mu) {
        if (mu <= n / 2) {
            const double denom = 2.0 * mu * (n - mu);
            out.okamoto_lower =
                capped_bound(denom > 0 ? std::exp(-(mu - xd) * (mu - xd) * n / denom) : 1.0);
        }
        if (mu > n / 2 && xd >= 2 * mu - n)
            out.chernoff_lower = capped_bound(
                n - mu > 0 ? std::exp(-(mu - xd) * (mu - xd) / (3.0 * (n - mu))) : 1.0);
    }
    return out;
}

// Lower bound on Pr[B >= n(1/2 + delta)] for Bin(n, 1/2), delta in [0, 1/10]:
// exp(-3 delta^2 n) / sqrt(2n).
inline double inverse_chernoff(std::int64_t n, double delta) {
    if (!(delta >= 0.0 && delta <= 0.1))
        throw std::domain_error("inverse Chernoff bound needs delta in [0, 1/10]");
    return std::exp(-3.0 * delta * delta * static_cast<double>(n)) /
           std::sqrt(2.0 * static_cast<double>(n));
}

// Lower bound on Pr[B >= n(p + delta)] for Bin(n, p), delta in [0, 1-p),
// evaluated in log space.
inline double reverse_chernoff(std::int64_t n, double p, double delta) {
    if (!(delta >= 0.0 && delta < 1.0 - p))
        throw std::domain_error("reverse Chernoff bound needs delta in [0, 1-p)");
    const double pd = p + delta;
    const double qd = 1.0 - p - delta;
    if (pd <= 0.0) return 1.0;  // threshold 0: the trivial bound
    const double log_prefactor = -0.5 * std::log(8.0 * static_cast<double>(n) * pd * qd);
    double log_power = 0.0;
    if (delta > 0.0)
        log_power = static_cast<double>(n) * (pd * (std::log(p) - std::log(pd)) +
                                              qd * (std::log1p(-p) - std::log(qd)));
    return std::exp(log_prefactor + log_power);
}

struct CheckLine {
    std::string point;
    double lhs = 0.0;
    double rhs = 0.0;
};

// Outcome of checking one inequality over a parameter grid. Every checked
// point is retained (lhs must be <= rhs); precondition-gated checks land in
// `skipped` with their reason rather than passing silently.
struct BoundReport {
    std::string inequality;
    std::string grid;
    std::uint64_t points_checked = 0;
    std::vector<CheckLine> checks;
    std::vector<CheckLine> violations;
    std::vector<std::string> skipped;
    bool holds() const { return violations.empty(); }
};

namespace detail {

inline void record_le(BoundReport& r, std::string point, double lhs, double rhs) {
    r.points_checked += 1;
    r.checks.push_back({point, lhs, rhs});
    if (!(lhs <= rhs)) r.violations.push_back({std::move(point), lhs, rhs});
}

inline std::string fmt(const char* format, ...) {
    char buf[160];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

inline void require_standing_assumption(std::int64_t n, double p_t, double p_k) {
    const BinomialSpec bt{n, p_t};
    const double xi_t = binom_xi(bt);
    const double need = 8200.0 * std::log(static_cast<double>(n));
    if (xi_t < need)
        throw std::invalid_argument(fmt(
            "standing assumption xi_t >= 8200 ln n fails: xi_t=%.1f < %.1f at n=%lld (for "
            "p_t=1/2 the smallest feasible n is about 2e5)",
            xi_t, need, static_cast<long long>(n)));
    if (static_cast<double>(n) * p_k > static_cast<double>(n) * p_t + 1e-9)
        throw std::invalid_argument("p_t must give the maximum expected degree (mu_k <= mu_t)");
}

}  // namespace detail

// One report per bound family: exact Bin(n, p) tails against every applicable
// upper bound, and the two lower bounds against the exact tails. The x range
// spans mu +- 4 sqrt(xi ln n).
inline std::vector<BoundReport> verify_tail_sandwich(std::int64_t n, double p) {
    if (n < 2) throw std::invalid_argument("tail sandwich needs n >= 2");
    const BinomialSpec b{n, p};
    const double mu = binom_mean(b);
    const double xi = binom_xi(b);
    const double w = 4.0 * std::sqrt(std::max(xi, 1.0) * std::log(static_cast<double>(n)));
    const auto x_lo = static_cast<std::int64_t>(std::max(0.0, std::ceil(mu - w)));
    const auto x_hi = static_cast<std::int64_t>(
        std::min(static_cast<double>(n), std::floor(mu + w)));
    const std::string grid =
        detail::fmt("n=%lld p=%g x in [%lld,%lld]", static_cast<long long>(n), p,
                    static_cast<long long>(x_lo), static_cast<long long>(x_hi));

    BoundReport up_ok{"okamoto-upper", grid};
    BoundReport up_ch{"chernoff-upper", grid};
    BoundReport lo_ok{"okamoto-lower", grid};
    BoundReport lo_ch{"chernoff-lower", grid};
    BoundReport rev{"reverse-chernoff", grid};
    BoundReport inv{"inverse-chernoff", grid};
    BoundReport hoef{"hoeffding", grid};

    const std::vector<std::pair<double, double>> unit_ranges(static_cast<std::size_t>(n),
                                                             {0.0, 1.0});
    for (std::int64_t x = x_lo; x <= x_hi; ++x) {
        const auto cb = chernoff_bounds(b, x);
        const auto xd = static_cast<double>(x);
        if (xd >= mu) {
            const double sf = binom_sf(b, x);
            const auto point = detail::fmt("x=%lld", static_cast<long long>(x));
            if (cb.okamoto_upper) detail::record_le(up_ok, point, sf, cb.okamoto_upper->capped);
            if (cb.chernoff_upper) detail::record_le(up_ch, point, sf, cb.chernoff_upper->capped);
            const double delta = xd / static_cast<double>(n) - p;
            if (delta < 1.0 - p)
                detail::record_le(rev, point, reverse_chernoff(n, p, delta), sf);
            if (p == 0.5 && delta <= 0.1)
                detail::record_le(inv, point, inverse_chernoff(n, delta), sf);
            // Two-sided deviation at nu = x - mu against Hoeffding. At nu = 0
            // the two one-sided tails overlap in the atom at mu, so the exact
            // probability is 1, not their sum.
            const double nu = xd - mu;
            const double exact_two_sided =
                nu == 0.0 ? 1.0
                          : binom_sf(b, x) +
                                binom_cdf(b, static_cast<std::int64_t>(std::floor(mu - nu)));
            detail::record_le(hoef, point, exact_two_sided,
                              hoeffding_bound(unit_ranges, nu).capped);
        }
        if (xd <= mu) {
            const double cdf = binom_cdf(b, x);
            const auto point = detail::fmt("x=%lld", static_cast<long long>(x));
            if (cb.okamoto_lower) detail::record_le(lo_ok, point, cdf, cb.okamoto_lower->capped);
            if (cb.chernoff_lower) detail::record_le(lo_ch, point, cdf, cb.chernoff_lower->capped);
        }
    }
    return {up_ok, up_ch, lo_ok, lo_ch, rev, inv, hoef};
}

// Comfort-zone width bounds for the default node and, when the two zones
// almost intersect (inter-zone gap <= 2 in both directions), the mean and xi
// ratio bounds.
inline BoundReport verify_zone_lemmas(std::int64_t n, double p_t, double p_k) {
    detail::require_standing_assumption(n, p_t, p_k);
    const BinomialSpec bt{n, p_t}, bk{n, p_k};
    const double log_n = std::log(static_cast<double>(n));
    const double mu_t = binom_mean(bt), mu_k = binom_mean(bk);
    const double xi_t = binom_xi(bt), xi_k = binom_xi(bk);
    BoundReport r{"zone-lemmas",
                  detail::fmt("n=%lld p_t=%g p_k=%g", static_cast<long long>(n), p_t, p_k)};

    const ComfortZone zt = comfort_zone(bt, n);
    const ComfortZone zk = comfort_zone(bk, n);
    const double width = 4.0 * std::sqrt(xi_t * log_n);
    detail::record_le(r, "U_t <= mu_t + 4 sqrt(xi_t ln n)",
                      static_cast<double>(zt.upper), mu_t + width);
    detail::record_le(r, "mu_t - 4 sqrt(xi_t ln n) <= L_t", mu_t - width,
                      static_cast<double>(zt.lower));

    const bool almost_intersect =
        zk.lower - zt.upper <= 2 && zt.lower - zk.upper <= 2;
    if (almost_intersect) {
        detail::record_le(r, "(3/4) mu_k <= mu_t", 0.75 * mu_k, mu_t);
        detail::record_le(r, "mu_t <= (4/3) mu_k", mu_t, 4.0 * mu_k / 3.0);
        detail::record_le(r, "(16/25) xi_k <= xi_t", 0.64 * xi_k, xi_t);
        detail::record_le(r, "xi_t <= (25/16) xi_k", xi_t, 25.0 * xi_k / 16.0);
    } else {
        r.skipped.push_back(detail::fmt(
            "ratio checks skipped: zones do not almost intersect (Z_t=[%lld,%lld], "
            "Z_k=[%lld,%lld])",
            static_cast<long long>(zt.lower), static_cast<long long>(zt.upper),
            static_cast<long long>(zk.lower), static_cast<long long>(zk.upper)));
    }
    return r;
}

// The hazard bound at the heart of the polylog analysis: for every h in Z_t
// with h-2 in Z_k and l in {0,1,2},
//   Pr[B_k = h-l] <= 264 e sqrt(ln n / xi_t) Pr[B_k > h],
// checked in log space against exact tails.
inline BoundReport verify_technical_lemma(std::int64_t n, double p_t, double p_k) {
    detail::require_standing_assumption(n, p_t, p_k);
    const BinomialSpec bt{n, p_t}, bk{n, p_k};
    const double log_n = std::log(static_cast<double>(n));
    const double xi_t = binom_xi(bt);
    BoundReport r{"hazard-technical",
                  detail::fmt("n=%lld p_t=%g p_k=%g l in {0,1,2}", static_cast<long long>(n), p_t,
                              p_k)};

    const ComfortZone zt = comfort_zone(bt, n);
    const ComfortZone zk = comfort_zone(bk, n);
    const std::int64_t h_lo = std::max(zt.lower, zk.lower + 2);
    const std::int64_t h_hi = std::min(zt.upper, zk.upper + 2);
    if (h_lo > h_hi) {
        r.skipped.push_back(detail::fmt(
            "no h with h in Z_t and h-2 in Z_k (Z_t=[%lld,%lld], Z_k=[%lld,%lld]); zones do "
            "not almost intersect",
            static_cast<long long>(zt.lower), static_cast<long long>(zt.upper),
            static_cast<long long>(zk.lower), static_cast<long long>(zk.upper)));
        return r;
    }
    const double log_factor = std::log(264.0) + 1.0 + 0.5 * (std::log(log_n) - std::log(xi_t));
    for (std::int64_t h = h_lo; h <= h_hi; ++h) {
        const double lsf = binom_sf_log(bk, h + 1);  // log Pr[B_k > h]
        for (int l = 0; l <= 2; ++l)
            detail::record_le(r,
                              detail::fmt("h=%lld l=%d (log domain)",
                                          static_cast<long long>(h), l),
                              binom_pmf_log(bk, h - l), log_factor + lsf);
    }
    return r;
}

// The Bin(n, 1/2) lemma family behind the logarithmic lower bound, with L and
// U from lb_thresholds(n): the threshold placement bounds, the pdf-vs-tail
// floor above L, the pmf decay claim, the pmf size at U, and the n-1 vs n
// pmf comparison on [L+1, U]. All log-domain against exact tails.
inline BoundReport verify_section5_lemmas(std::int64_t n) {
    if (n < 80) throw std::invalid_argument("the lower-bound lemmas assume n >= 80");
    const auto [big_l, big_u] = lb_thresholds(n);
    const BinomialSpec b{n, 0.5};
    const BinomialSpec b1{n - 1, 0.5};
    const double nd = static_cast<double>(n);
    const double log_n = std::log(nd);
    BoundReport r{"section5-lemmas",
                  detail::fmt("n=%lld L=%lld U=%lld", static_cast<long long>(n),
                              static_cast<long long>(big_l), static_cast<long long>(big_u))};

    detail::record_le(r, "n/2 + sqrt(n ln n / 6) <= L", nd / 2 + std::sqrt(nd * log_n / 6.0),
                      static_cast<double>(big_l));
    detail::record_le(r, "U <= n/2 + sqrt(n ln n)", static_cast<double>(big_u),
                      nd / 2 + std::sqrt(nd * log_n));
    detail::record_le(r, "(1/6) sqrt(n / ln n) <= U - L", std::sqrt(nd / log_n) / 6.0,
                      static_cast<double>(big_u - big_l));

    // pdf-vs-tail floor: Pr[B=x] >= ((2L-n)/n) Pr[B>=x] for all x >= L.
    const double coef = (2.0 * static_cast<double>(big_l) - nd) / nd;
    const double log_coef = coef > 0 ? std::log(coef) : detail::kNegInf;
    for (std::int64_t x = big_l; x <= n; ++x)
        detail::record_le(r, detail::fmt("pdf-floor x=%lld (log domain)",
                                         static_cast<long long>(x)),
                          log_coef + binom_sf_log(b, x), binom_pmf_log(b, x));

    // pmf decay: Pr[B=x] <= (y/(n-y))^(y-x) Pr[B=y] on a grid of x <= y < n,
    // dense inside the [L-3, U+3] window.
    std::set<std::int64_t> grid_points;
    for (int frac = 0; frac <= 7; ++frac) grid_points.insert(n * frac / 8);
    grid_points.insert(n - 1);
    for (std::int64_t v :
         {big_l - 2, big_l - 1, big_l, big_l + 1, (big_l + big_u) / 2, big_u - 1, big_u, big_u + 1})
        grid_points.insert(v);
    for (std::int64_t v = std::max<std::int64_t>(0, big_l - 3); v <= std::min(n - 1, big_u + 3);
         ++v)
        grid_points.insert(v);
    std::vector<std::int64_t> grid;
    for (std::int64_t v : grid_points)
        if (v >= 0 && v < n) grid.push_back(v);
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const std::int64_t x = grid[a];
        const double lpx = binom_pmf_log(b, x);
        for (std::size_t c = a; c < grid.size(); ++c) {
            const std::int64_t y = grid[c];
            const double step =
                y == x ? 0.0
                       : static_cast<double>(y - x) *
                             (std::log(static_cast<double>(y)) -
                              std::log(static_cast<double>(n - y)));
            detail::record_le(r,
                              detail::fmt("pmf-decay x=%lld y=%lld (log domain)",
                                          static_cast<long long>(x), static_cast<long long>(y)),
                              lpx, step + binom_pmf_log(b, y));
        }
    }

    // pmf at the upper threshold: Pr[B=U] <= (8/(3 e sqrt(6))) sqrt(ln n) / n^1.5.
    detail::record_le(r, "pmf-at-U (log domain)", binom_pmf_log(b, big_u),
                      std::log(8.0) - std::log(3.0) - 1.0 - 0.5 * std::log(6.0) +
                          0.5 * std::log(log_n) - 1.5 * log_n);

    // n-1 comparison: Pr[B'=x] >= (2/3) Pr[B=x] on [L+1, U].
    for (std::int64_t x = big_l + 1; x <= big_u; ++x)
        detail::record_le(r, detail::fmt("n-1-pmf x=%lld (log domain)",
                                         static_cast<long long>(x)),
                          std::log(2.0 / 3.0) + binom_pmf_log(b, x), binom_pmf_log(b1, x));
    return r;
}

// Exact value of the lower-bound expression
//   (1/2)(L - n/2) sum_{d=L+1}^{U} C(n,2) Pr[B'=d]^2 Pr[B <= d-1]^(n-2)
// together with the closed-form floor (ln n)/(6561 e^5 sqrt(6)) it must beat.
struct EventDResult {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    double value = 0.0;
    double threshold = 0.0;
};

inline EventDResult event_d_lower_bound(std::int64_t n) {
    if (n < 80) throw std::invalid_argument("the event-D bound assumes n >= 80");
    const auto [big_l, big_u] = lb_thresholds(n);
    const BinomialSpec b{n, 0.5};
    const BinomialSpec b1{n - 1, 0.5};
    const double nd = static_cast<double>(n);
    const double log_pairs = std::log(nd) + std::log(nd - 1.0) - std::log(2.0);

    std::vector<double> log_terms;
    for (std::int64_t d = big_l + 1; d <= big_u; ++d)
        log_terms.push_back(log_pairs + 2.0 * binom_pmf_log(b1, d) +
                            (nd - 2.0) * binom_cdf_log(b, d - 1));
    double max_term = detail::kNegInf;
    for (double t : log_terms) max_term = std::max(max_term, t);
    double sum = 0.0;
    for (double t : log_terms) sum += std::exp(t - max_term);
    const double log_sum = max_term + std::log(sum);

    EventDResult out;
    out.lower = big_l;
    out.upper = big_u;
    out.value = 0.5 * (static_cast<double>(big_l) - nd / 2) * std::exp(log_sum);
    out.threshold = std::log(nd) / (6561.0 * std::exp(5.0) * std::sqrt(6.0));
    return out;
}

// Exact enumeration of the four two-node profiles under a common popularity
// p. expected_max is 2p - p^2; the ratio is expected_max over the mechanism's
// expected winner degree.
struct TwoNodeAnalysis {
    double expected_max = 0.0;
    double expected_winner_degree = 0.0;
    double ratio = 0.0;
};

inline TwoNodeAnalysis two_node_analysis(double p, const Mechanism& mech) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::domain_error("two-node analysis needs p in (0,1]; the ratio is undefined at 0");
    TwoNodeAnalysis out;
    for (int mask = 0; mask < 4; ++mask) {
        NominationProfile prof(2);
        if (mask & 1) prof.add_edge(0, 1);
        if (mask & 2) prof.add_edge(1, 0);
        const int votes = (mask & 1 ? 1 : 0) + (mask & 2 ? 1 : 0);
        const double weight = std::pow(p, votes) * std::pow(1.0 - p, 2 - votes);
        out.expected_max += weight * prof.max_in_degree().first;
        out.expected_winner_degree += weight * select(mech, prof).winner_degree;
    }
    out.ratio = out.expected_max / out.expected_winner_degree;
    return out;
}

}  // namespace impsel
