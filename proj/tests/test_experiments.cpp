#include <doctest.h>

#include <cmath>

#include "impsel/experiments.hpp"
#include "test_util.hpp"

using namespace impsel;

TEST_CASE("degenerate priors give exactly zero gap") {
    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{17, 0.0}};
    cfg.mechanism = AvdBeats{0};
    cfg.trials = 200;
    cfg.master_seed = 5;
    const auto est = mc_additive(cfg);
    CHECK(est.mean_gap == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.gap_histogram.at(0) == 200);

    cfg.prior = Prior{UniformPrior{17, 1.0}};
    cfg.mechanism = Constant{3};
    CHECK(mc_additive(cfg).mean_gap == 0.0);
}

TEST_CASE("invalid default is rejected") {
    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{4, 0.5}};
    cfg.mechanism = Constant{9};
    cfg.trials = 10;
    CHECK_THROWS_AS(mc_additive(cfg), std::invalid_argument);
}

TEST_CASE("malformed priors are rejected before any trial runs") {
    EdgeMatrixPrior ragged;
    ragged.q.resize(kEdgeMatrixSampleCap + 1);
    RunConfig cfg;
    cfg.prior = Prior{ragged};
    cfg.mechanism = Constant{0};
    cfg.trials = 8;
    cfg.workers = 4;
    CHECK_THROWS_AS(mc_additive(cfg), std::invalid_argument);
}

TEST_CASE("estimates are identical for any worker count") {
    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{65, 0.5}};
    cfg.mechanism = AvdBeats{0};
    cfg.trials = 4000;
    cfg.master_seed = 99;
    cfg.workers = 1;
    const auto one = mc_additive(cfg);
    cfg.workers = 2;
    const auto two = mc_additive(cfg);
    cfg.workers = 8;
    const auto eight = mc_additive(cfg);
    CHECK(one.gap_sum == two.gap_sum);
    CHECK(one.gap_sq_sum == two.gap_sq_sum);
    CHECK(one.gap_histogram == two.gap_histogram);
    CHECK(one.mean_gap == eight.mean_gap);
    CHECK(one.gap_histogram == eight.gap_histogram);
    CHECK(one.via_default_count == eight.via_default_count);
}

TEST_CASE("histogram support stays within [0, n]") {
    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{33, 0.5}};
    cfg.mechanism = AvdTie{0};
    cfg.trials = 3000;
    cfg.master_seed = 17;
    const auto est = mc_additive(cfg);
    for (const auto& [gap, count] : est.gap_histogram) {
        CHECK(gap >= 0);
        CHECK(gap <= 32);
        CHECK(count > 0);
    }
}

TEST_CASE("lazy path and dense path give compatible estimates") {
    // Same prior family straddling the lazy threshold is not directly
    // comparable; instead force lazy usage via a big m and sanity-check the
    // constant mechanism whose gap is max - totals[t], a pure totals
    // computation.
    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{5001, 0.5}};
    cfg.mechanism = Constant{0};
    cfg.trials = 50;
    cfg.master_seed = 3;
    cfg.workers = 2;
    const auto est = mc_additive(cfg);
    // E[max] - n/2 is near sqrt(n ln n / 2) ~ 146 at n=5000; allow wide slack.
    CHECK(est.mean_gap > 50.0);
    CHECK(est.mean_gap < 300.0);
}

TEST_CASE("single-point sweep reproduces mc_additive") {
    SweepSpec spec;
    spec.uniform_p = 0.5;
    spec.rule = {"avd_beats", std::nullopt};
    spec.n_list = {64};
    spec.trials = 500;
    spec.master_seed = 21;
    const auto rows = sweep(spec);
    REQUIRE(rows.size() == 1);

    RunConfig cfg;
    cfg.prior = Prior{UniformPrior{65, 0.5}};
    cfg.mechanism = AvdBeats{default_node(cfg.prior)};
    cfg.trials = 500;
    cfg.master_seed = 21;
    const auto est = mc_additive(cfg);
    CHECK(rows[0].mean_gap == est.mean_gap);
    CHECK(rows[0].std_error == est.std_error);
    CHECK(rows[0].ratio_sqrt_nlogn ==
          doctest::Approx(est.mean_gap / std::sqrt(64.0 * std::log(64.0))).epsilon(1e-12));
}

TEST_CASE("sweep validates its n list") {
    SweepSpec spec;
    spec.rule = {"constant", std::nullopt};
    spec.n_list = {};
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);
    spec.n_list = {64, 32};
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);
}

TEST_CASE("AVD never trails the constant mechanism by more than noise") {
    SweepSpec spec;
    spec.uniform_p = 0.5;
    spec.rule = {"constant", std::nullopt};
    spec.n_list = {64, 128};
    spec.trials = 800;
    spec.master_seed = 31;
    const auto constant_rows = sweep(spec);
    spec.rule = {"avd_beats", std::nullopt};
    const auto avd_rows = sweep(spec);
    for (std::size_t i = 0; i < avd_rows.size(); ++i) {
        const double slack =
            3.0 * (avd_rows[i].std_error + constant_rows[i].std_error);
        CHECK(avd_rows[i].mean_gap <= constant_rows[i].mean_gap + slack);
    }
}

TEST_CASE("sweep CSV is stable and parseable") {
    SweepSpec spec;
    spec.uniform_p = 0.5;
    spec.rule = {"constant", std::nullopt};
    spec.n_list = {32, 64};
    spec.trials = 200;
    spec.master_seed = 7;
    const std::string csv = sweep_csv(sweep(spec));
    CHECK(csv.find("n,trials,mean_gap,stderr,sqrt_nlogn,log_n,log2_n") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    spec.workers = 4;
    CHECK(sweep_csv(sweep(spec)) == csv);  // byte-identical across worker counts
}

TEST_CASE("duplication scenario always falls back to the default") {
    const auto res = scenario_duplication(8, 2000, 77, 2);
    CHECK(res.via_default_frequency == 1.0);
    const double combined =
        3.0 * (res.avd_on_duplicated.std_error + res.constant_on_base.std_error);
    CHECK(std::abs(res.avd_on_duplicated.mean_gap - res.constant_on_base.mean_gap) <=
          combined);
}

TEST_CASE("correlated block scenario") {
    {
        const auto res =
            scenario_example1(3, AvdVariant::kTie, NodeId{0}, 4000, 123, 2);
        CHECK(res.exact_case_gaps == std::array<int, 4>{0, 0, 0, 12});
        CHECK(res.exact_mean_gap == doctest::Approx(3.0));
        CHECK(std::abs(res.estimate.mean_gap - 3.0) <= 3.0 * res.estimate.std_error);
        const auto& freq = res.case_frequencies;
        CHECK(std::abs(freq[0] - 0.25) < 0.03);
        CHECK(std::abs(freq[1] - 0.5) < 0.03);
        CHECK(std::abs(freq[2] - 0.25) < 0.03);
    }
    {
        // The beats-based variant resolves every case without a positive gap;
        // reported as the divergence measurement.
        const auto res =
            scenario_example1(3, AvdVariant::kBeats, std::nullopt, 1000, 123);
        CHECK(res.default_used == 24);  // node a has the highest expected degree
        CHECK(res.exact_case_gaps == std::array<int, 4>{0, 0, 0, 0});
        CHECK(res.estimate.mean_gap == 0.0);
    }
}
