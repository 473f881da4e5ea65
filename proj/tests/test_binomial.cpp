#include <doctest.h>

#include <cmath>
#include <limits>

#include "impsel/binomial.hpp"
#include "test_util.hpp"

using namespace impsel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("pmf log values") {
    CHECK(binom_pmf_log({10, 0.5}, 5) == doctest::Approx(std::log(252.0 / 1024.0)).epsilon(1e-13));
    CHECK(binom_pmf_log({7, 0.0}, 0) == 0.0);
    CHECK(binom_pmf_log({7, 0.0}, 3) == -kInf);
    CHECK(binom_pmf_log({7, 1.0}, 7) == 0.0);
    CHECK(binom_pmf_log({7, 1.0}, 6) == -kInf);
    CHECK(binom_pmf_log({0, 0.3}, 0) == 0.0);
    CHECK_THROWS_AS(binom_pmf_log({10, 0.5}, 11), std::invalid_argument);
    CHECK_THROWS_AS(binom_pmf_log({10, 0.5}, -1), std::invalid_argument);
    CHECK_THROWS_AS(binom_pmf_log({10, 1.5}, 1), std::invalid_argument);
}

TEST_CASE("survival function against exact enumeration") {
    CHECK(binom_sf({10, 0.5}, 5) == doctest::Approx(638.0 / 1024.0).epsilon(1e-13));
    CHECK(binom_sf({10, 0.5}, 0) == 1.0);
    CHECK(binom_sf({10, 0.5}, -4) == 1.0);
    CHECK(binom_sf({10, 0.5}, 11) == 0.0);

    const double sf60 = binom_sf({100, 0.5}, 60);
    const auto oracle = static_cast<double>(testing::exact_sf_half(100, 60));
    CHECK(sf60 == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(sf60 - 0.0284) < 5e-4);

    for (int x = 0; x <= 100; ++x)
        CHECK(binom_sf({100, 0.5}, x) ==
              doctest::Approx(static_cast<double>(testing::exact_sf_half(100, x)))
                  .epsilon(1e-12));

    for (int x = 0; x <= 90; ++x)
        CHECK(binom_sf({90, 0.27}, x) ==
              doctest::Approx(static_cast<double>(testing::exact_sf(90, 0.27L, x)))
                  .epsilon(1e-11));
}

TEST_CASE("cdf and sf are complementary and self-consistent") {
    const BinomialSpec specs[] = {{10, 0.5}, {57, 0.2}, {100, 0.83}, {1000, 0.5}, {997, 0.31}};
    for (const auto& b : specs) {
        for (std::int64_t x = 0; x <= b.n; ++x) {
            const double sf = binom_sf(b, x);
            const double sf_next = binom_sf(b, x + 1);
            const double pmf = std::exp(binom_pmf_log(b, x));
            CHECK(sf == doctest::Approx(sf_next + pmf).epsilon(1e-12));
            CHECK(binom_cdf(b, x - 1) == doctest::Approx(1.0 - sf).epsilon(1e-12));
        }
    }
}

TEST_CASE("deep tails stay accurate in log space") {
    // Bin(1000, 1/2) at x=800: far tail, checked against exact summation with
    // 80-bit arithmetic over integer-ratio terms.
    const double lsf = binom_sf_log({1000, 0.5}, 800);
    CHECK(lsf < -150.0);
    long double direct = 0.0L;
    for (int x = 1000; x >= 800; --x) {
        long double lp = impsel::detail::lpmf_ld(1000, 0.5L, x);
        direct += expl(lp - lsf);
    }
    CHECK(static_cast<double>(direct) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("hazard ratio") {
    CHECK(hazard_ratio({10, 0.5}, 5) == doctest::Approx(252.0 / 638.0).epsilon(1e-12));
    CHECK(hazard_ratio({10, 0.5}, 10) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(hazard_ratio({10, 0.3}, 0) ==
          doctest::Approx(std::exp(binom_pmf_log({10, 0.3}, 0))).epsilon(1e-13));
    CHECK_THROWS_AS(hazard_ratio({10, 0.0}, 4), std::domain_error);
}

TEST_CASE("hazard is nondecreasing above the mean at p=1/2 (exploratory, not a stated bound)") {
    for (std::int64_t n : {10, 100, 1000}) {
        const BinomialSpec b{n, 0.5};
        double prev = 0.0;
        for (std::int64_t x = (n + 1) / 2; x <= n; ++x) {
            const double h = hazard_ratio(b, x);
            CHECK(h > 0.0);
            CHECK(h <= 1.0);
            CHECK(h >= prev - 1e-12);
            prev = h;
        }
    }
}

TEST_CASE("comfort zone boundaries") {
    CHECK(comfort_zone({50, 0.0}, 50).lower == 0);
    CHECK(comfort_zone({50, 0.0}, 50).upper == 0);

    for (std::int64_t n : {100, 101, 1000}) {
        const ComfortZone z = comfort_zone({n, 0.5}, n);
        CHECK(z.lower + z.upper == n);  // symmetry of Bin(n, 1/2)
        CHECK(z.lower <= n / 2);
        CHECK(z.upper >= (n + 1) / 2);
    }

    for (const BinomialSpec spec : {BinomialSpec{1000, 0.837}, BinomialSpec{512, 0.03}}) {
        const ComfortZone z = comfort_zone(spec, spec.n);
        CHECK(z.lower >= 0);
        CHECK(static_cast<double>(z.lower) <= std::floor(binom_mean(spec)));
        CHECK(static_cast<double>(z.upper) >= std::ceil(binom_mean(spec)));
        CHECK(z.upper <= spec.n);
    }

    const std::int64_t n = 10000;
    const BinomialSpec b{n, 0.5};
    const ComfortZone z = comfort_zone(b, n);
    const double tau = std::pow(static_cast<double>(n), -5.33);
    // Boundary definitions re-verify.
    CHECK(binom_cdf(b, z.lower - 1) <= tau);
    CHECK(binom_cdf(b, z.lower) > tau);
    CHECK(binom_sf(b, z.upper + 1) <= tau);
    CHECK(binom_sf(b, z.upper) > tau);
    // Width bound.
    const double w = 4.0 * std::sqrt(binom_xi(b) * std::log(static_cast<double>(n)));
    CHECK(static_cast<double>(z.upper) <= binom_mean(b) + w);
    CHECK(static_cast<double>(z.lower) >= binom_mean(b) - w);
}

TEST_CASE("lower-bound thresholds") {
    for (std::int64_t n : {100, 1000, 10000}) {
        const auto [lo, up] = lb_thresholds(n);
        CHECK(lo <= up);
        const BinomialSpec b{n, 0.5};
        const double tau_u = 1.0 / (3.0 * std::exp(2.0) * n * std::sqrt(6.0));
        const double tau_l = 1.0 / (n * std::sqrt(2.0));
        CHECK(binom_sf(b, up + 1) <= tau_u);
        CHECK(binom_sf(b, up) > tau_u);
        CHECK(binom_sf(b, lo + 1) < tau_l);
        CHECK(binom_sf(b, lo) >= tau_l);
    }
}
