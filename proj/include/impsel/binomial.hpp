#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace impsel {

// Bin(n, p). Tail probabilities here are evaluated by explicit log-space
// summation of pmf terms rather than incomplete-beta routines: the verifier
// compares tails down to ~1e-280 against analytic bounds and needs controlled,
// reproducible error. Internal accumulation is 80-bit long double; pmf anchors
// come from lgammal.
struct BinomialSpec {
    std::int64_t n = 0;
    double p = 0.0;
};

inline double binom_mean(const BinomialSpec& b) { return static_cast<double>(b.n) * b.p; }

// xi = min(mu, n - mu); the scale controlling tail behavior on both sides.
inline double binom_xi(const BinomialSpec& b) {
    const double mu = binom_mean(b);
    return std::min(mu, static_cast<double>(b.n) - mu);
}

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline void check_spec(const BinomialSpec& b) {
    if (b.n < 0) throw std::invalid_argument("binomial trial count must be >= 0");
    if (!(b.p >= 0.0 && b.p <= 1.0))
        throw std::invalid_argument("binomial probability must be in [0,1]");
}

inline long double lpmf_ld(std::int64_t n, long double p, std::int64_t x) {
    if (p <= 0.0L) return x == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
    if (p >= 1.0L) return x == n ? 0.0L : -std::numeric_limits<long double>::infinity();
    const long double lc = lgammal(static_cast<long double>(n) + 1.0L) -
                           lgammal(static_cast<long double>(x) + 1.0L) -
                           lgammal(static_cast<long double>(n - x) + 1.0L);
    return lc + static_cast<long double>(x) * logl(p) +
           static_cast<long double>(n - x) * log1pl(-p);
}

inline std::int64_t binom_mode(std::int64_t n, double p) {
    auto m = static_cast<std::int64_t>(std::floor((static_cast<double>(n) + 1.0) * p));
    return std::clamp<std::int64_t>(m, 0, n);
}

// sum_{k=x}^{n} pmf(k)/pmf(x); requires x >= mode so terms are non-increasing.
// Terms are generated by the exact pmf ratio recurrence and added smallest
// first.
inline long double upper_ratio_sum(std::int64_t n, long double p, std::int64_t x) {
    thread_local std::vector<long double> terms;
    terms.clear();
    terms.push_back(1.0L);
    const long double odds = p / (1.0L - p);
    long double t = 1.0L;
    for (std::int64_t k = x; k < n; ++k) {
        t *= (static_cast<long double>(n - k) / static_cast<long double>(k + 1)) * odds;
        if (t < 1e-26L) break;
        terms.push_back(t);
    }
    long double s = 0.0L;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) s += *it;
    return s;
}

// sum_{k=0}^{x} pmf(k)/pmf(x); requires x <= mode.
inline long double lower_ratio_sum(std::int64_t n, long double p, std::int64_t x) {
    thread_local std::vector<long double> terms;
    terms.clear();
    terms.push_back(1.0L);
    const long double inv_odds = (1.0L - p) / p;
    long double t = 1.0L;
    for (std::int64_t k = x; k > 0; --k) {
        t *= (static_cast<long double>(k) / static_cast<long double>(n - k + 1)) * inv_odds;
        if (t < 1e-26L) break;
        terms.push_back(t);
    }
    long double s = 0.0L;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) s += *it;
    return s;
}

}  // namespace detail

// log Pr[B = x]; exact -inf conventions at the p in {0,1} boundaries.
inline double binom_pmf_log(const BinomialSpec& b, std::int64_t x) {
    detail::check_spec(b);
    if (x < 0 || x > b.n)
        throw std::invalid_argument("pmf point x=" + std::to_string(x) + " outside [0," +
                                    std::to_string(b.n) + "]");
    return static_cast<double>(detail::lpmf_ld(b.n, b.p, x));
}

// log Pr[B >= x]. x clamps: x <= 0 -> log 1, x > n -> -inf.
inline double binom_sf_log(const BinomialSpec& b, std::int64_t x) {
    detail::check_spec(b);
    if (x <= 0) return 0.0;
    if (x > b.n) return detail::kNegInf;
    if (b.p <= 0.0) return detail::kNegInf;
    if (b.p >= 1.0) return 0.0;
    const std::int64_t mode = detail::binom_mode(b.n, b.p);
    const auto p = static_cast<long double>(b.p);
    if (x > mode) {
        const long double l = detail::lpmf_ld(b.n, p, x) + logl(detail::upper_ratio_sum(b.n, p, x));
        return static_cast<double>(l);
    }
    // 1 - Pr[B <= x-1]; the lower tail is bounded away from 1 here.
    const long double lc =
        detail::lpmf_ld(b.n, p, x - 1) + logl(detail::lower_ratio_sum(b.n, p, x - 1));
    return static_cast<double>(log1pl(-expl(lc)));
}

inline double binom_sf(const BinomialSpec& b, std::int64_t x) {
    return std::exp(binom_sf_log(b, x));
}

// log Pr[B <= x].
inline double binom_cdf_log(const BinomialSpec& b, std::int64_t x) {
    detail::check_spec(b);
    if (x < 0) return detail::kNegInf;
    if (x >= b.n) return 0.0;
    if (b.p <= 0.0) return 0.0;
    if (b.p >= 1.0) return detail::kNegInf;
    const std::int64_t mode = detail::binom_mode(b.n, b.p);
    const auto p = static_cast<long double>(b.p);
    if (x < mode) {
        const long double l = detail::lpmf_ld(b.n, p, x) + logl(detail::lower_ratio_sum(b.n, p, x));
        return static_cast<double>(l);
    }
    const long double ls =
        detail::lpmf_ld(b.n, p, x + 1) + logl(detail::upper_ratio_sum(b.n, p, x + 1));
    return static_cast<double>(log1pl(-expl(ls)));
}

inline double binom_cdf(const BinomialSpec& b, std::int64_t x) {
    return std::exp(binom_cdf_log(b, x));
}

// Pr[B = x] / Pr[B >= x]. Errors when the denominator is zero.
inline double hazard_ratio(const BinomialSpec& b, std::int64_t x) {
    const double lsf = binom_sf_log(b, x);
    if (lsf == detail::kNegInf) throw std::domain_error("hazard ratio: Pr[B >= x] is zero");
    const double lp = binom_pmf_log(b, x);
    return std::min(1.0, std::exp(lp - lsf));
}

// Integer interval [lower, upper] around the mean outside which the point
// probabilities drop below n_for_threshold^-5.33. `lower` is the highest c
// with Pr[B < c] <= threshold (0 if none beyond c=0); `upper` the lowest c
// with Pr[B > c] <= threshold (n if none below c=n). Found by bisection over
// the exact tails.
struct ComfortZone {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
};

inline ComfortZone comfort_zone(const BinomialSpec& b, std::int64_t n_for_threshold) {
    detail::check_spec(b);
    if (n_for_threshold < 2) throw std::invalid_argument("comfort zone threshold size must be >= 2");
    const double log_tau = -5.33 * std::log(static_cast<double>(n_for_threshold));

    std::int64_t lo = 0, hi = b.n;
    while (lo < hi) {  // largest c with Pr[B < c] <= tau
        const std::int64_t mid = lo + (hi - lo + 1) / 2;
        if (binom_cdf_log(b, mid - 1) <= log_tau)
            lo = mid;
        else
            hi = mid - 1;
    }
    const std::int64_t lower = lo;

    lo = 0;
    hi = b.n;
    while (lo < hi) {  // smallest c with Pr[B > c] <= tau
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (binom_sf_log(b, mid + 1) <= log_tau)
            hi = mid;
        else
            lo = mid + 1;
    }
    return {lower, lo};
}

// The two tail thresholds used by the lower-bound construction for
// Bin(n, 1/2): U is the lowest c with Pr[B > c] <= 1/(3 e^2 n sqrt(6)), and L
// the lowest c with Pr[B > c] < 1/(n sqrt(2)).
inline std::pair<std::int64_t, std::int64_t> lb_thresholds(std::int64_t n) {
    if (n < 2) throw std::invalid_argument("lb_thresholds needs n >= 2");
    const BinomialSpec b{n, 0.5};
    const double log_tau_u =
        -(std::log(3.0) + 2.0 + std::log(static_cast<double>(n)) + 0.5 * std::log(6.0));
    const double log_tau_l = -(std::log(static_cast<double>(n)) + 0.5 * std::log(2.0));

    auto lowest_with = [&](auto pred) {
        std::int64_t lo = 0, hi = n;
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (pred(mid))
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    };
    const std::int64_t upper =
        lowest_with([&](std::int64_t c) { return binom_sf_log(b, c + 1) <= log_tau_u; });
    const std::int64_t lower =
        lowest_with([&](std::int64_t c) { return binom_sf_log(b, c + 1) < log_tau_l; });
    return {lower, upper};
}

}  // namespace impsel
