#include <doctest.h>

#include <cmath>
#include <vector>

#include "impsel/priors.hpp"
#include "test_util.hpp"

using namespace impsel;

TEST_CASE("expected in-degrees per family") {
    CHECK(expected_in_degrees(Prior{UniformPrior{5, 0.5}}) ==
          std::vector<double>{2, 2, 2, 2, 2});
    CHECK(expected_in_degrees(Prior{PopularityPrior{{0.1, 0.9, 0.5}}}) ==
          std::vector<double>{0.2, 1.8, 1.0});

    EdgeMatrixPrior em{{{0.0, 0.5, 0.0}, {0.25, 0.0, 1.0}, {0.25, 0.5, 0.0}}};
    CHECK(expected_in_degrees(Prior{em}) == std::vector<double>{0.5, 1.0, 1.0});

    SubsetTablePrior st;
    st.rows = {{{{1, 2}, 0.5}, {{}, 0.5}}, {{{0}, 1.0}}, {{{}, 1.0}}};
    CHECK(expected_in_degrees(Prior{st}) == std::vector<double>{1.0, 0.5, 0.5});

    const auto dup = expected_in_degrees(duplicate(Prior{PopularityPrior{{0.1, 0.9, 0.5}}}));
    CHECK(dup == std::vector<double>{0.2, 1.8, 1.0, 0.2, 1.8, 1.0});

    const auto bc = expected_in_degrees(Prior{BlockCorrelatedPrior{3}});
    CHECK(bc.size() == 26);
    CHECK(bc[24] == 6.0);
    CHECK(bc[25] == 6.0);
    for (std::size_t j = 0; j < 24; ++j) CHECK(bc[j] == 0.0);
}

TEST_CASE("prior validation") {
    CHECK_THROWS_AS(validate_prior(Prior{UniformPrior{5, 1.5}}), std::invalid_argument);
    CHECK_THROWS_AS(validate_prior(Prior{EdgeMatrixPrior{{{0.1}}}}), std::invalid_argument);
    SubsetTablePrior bad;
    bad.rows = {{{{1}, 0.7}}, {{{0}, 1.0}}};  // row 0 sums to 0.7
    CHECK_THROWS_AS(validate_prior(Prior{bad}), std::invalid_argument);
    SubsetTablePrior self_vote;
    self_vote.rows = {{{{0}, 1.0}}, {{{0}, 1.0}}};
    CHECK_THROWS_AS(validate_prior(Prior{self_vote}), std::invalid_argument);
    CHECK_THROWS_AS(validate_prior(Prior{BlockCorrelatedPrior{0}}), std::invalid_argument);
    SubsetTablePrior fine;
    fine.rows = {{{{1}, 1.0}}, {{{0}, 1.0}}};
    CHECK_THROWS_AS(duplicate(Prior{fine}), std::invalid_argument);

    SubsetTablePrior oversized;
    oversized.rows = {std::vector<SubsetTablePrior::Entry>(kSubsetTableRowCap + 1),
                      {{{0}, 1.0}}};
    CHECK_THROWS_AS(validate_prior(Prior{oversized}), std::invalid_argument);
}

TEST_CASE("edge-matrix sampling refuses oversized instances") {
    Rng rng(2);
    EdgeMatrixPrior huge;
    huge.q.resize(kEdgeMatrixSampleCap + 1);  // rows stay empty; the cap fires first
    CHECK_THROWS_AS(sample_profile(Prior{huge}, rng), std::invalid_argument);

    EdgeMatrixPrior tiny{{{0.0, 1.0}, {0.0, 0.0}}};
    const auto prof = sample_profile(Prior{tiny}, rng);
    CHECK(prof.has_edge(0, 1));
    CHECK_FALSE(prof.has_edge(1, 0));
}

TEST_CASE("degenerate sampling") {
    Rng rng(7);
    const auto empty = sample_profile(Prior{UniformPrior{9, 0.0}}, rng);
    for (NodeId j = 0; j < 9; ++j) CHECK(empty.in_degree(j) == 0);

    const auto full = sample_profile(Prior{UniformPrior{9, 1.0}}, rng);
    for (NodeId j = 0; j < 9; ++j) CHECK(full.in_degree(j) == 8);
}

TEST_CASE("uniform sampling matches the binomial marginal") {
    Rng rng(11);
    const Prior prior{UniformPrior{21, 0.3}};
    const int trials = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < trials; ++i) {
        const auto prof = sample_profile(prior, rng);
        const int d = prof.in_degree(5);
        sum += d;
        sum_sq += static_cast<double>(d) * d;
    }
    const double mean = sum / trials;
    const double expected_mean = 20 * 0.3;
    const double sd_of_mean = std::sqrt(20 * 0.3 * 0.7 / trials);
    CHECK(std::abs(mean - expected_mean) < 4 * sd_of_mean);
    const double var = sum_sq / trials - mean * mean;
    CHECK(var == doctest::Approx(20 * 0.3 * 0.7).epsilon(0.1));
}

TEST_CASE("block-correlated support and balance") {
    Rng rng(13);
    const std::uint32_t k = 3;
    const Prior prior{BlockCorrelatedPrior{k}};
    int a_on = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const auto prof = sample_profile(prior, rng);
        const int da = prof.in_degree(8 * k);
        const int db = prof.in_degree(8 * k + 1);
        CHECK((da == 0 || da == static_cast<int>(4 * k)));
        CHECK((db == 0 || db == static_cast<int>(4 * k)));
        for (NodeId j = 0; j < 8 * k; ++j) CHECK(prof.in_degree(j) == 0);
        a_on += da > 0 ? 1 : 0;
    }
    const double freq = static_cast<double>(a_on) / trials;
    CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("subset table sampling and voter independence") {
    SubsetTablePrior st;
    st.rows = {{{{1, 2}, 0.25}, {{2}, 0.75}},
               {{{0}, 0.5}, {{}, 0.5}},
               {{{}, 1.0}}};
    const Prior prior{st};
    validate_prior(prior);
    Rng rng(17);
    const int trials = 40000;
    int v0_both = 0, v1_votes = 0, joint = 0;
    for (int i = 0; i < trials; ++i) {
        const auto prof = sample_profile(prior, rng);
        const bool both = prof.has_edge(0, 1);  // only the {1,2} entry votes for 1
        const bool v1 = prof.has_edge(1, 0);
        CHECK(prof.has_edge(0, 2));  // both entries for voter 0 include 2
        v0_both += both;
        v1_votes += v1;
        joint += both && v1;
    }
    const double f0 = static_cast<double>(v0_both) / trials;
    const double f1 = static_cast<double>(v1_votes) / trials;
    const double fj = static_cast<double>(joint) / trials;
    CHECK(std::abs(f0 - 0.25) < 0.01);
    CHECK(std::abs(f1 - 0.5) < 0.01);
    CHECK(std::abs(fj - f0 * f1) < 0.01);  // product law across voters
}

TEST_CASE("duplicated instances mirror every edge") {
    Rng rng(19);
    const auto complete = sample_profile(duplicate(Prior{UniformPrior{3, 1.0}}), rng);
    CHECK(complete.node_count() == 6);
    for (NodeId j = 0; j < 3; ++j) {
        CHECK(complete.in_degree(j) == 2);
        CHECK(complete.in_degree(3 + j) == 2);
    }

    const auto empty = sample_profile(duplicate(Prior{UniformPrior{4, 0.0}}), rng);
    CHECK(empty.node_count() == 8);
    for (NodeId j = 0; j < 8; ++j) CHECK(empty.in_degree(j) == 0);

    const Prior dup = duplicate(Prior{UniformPrior{101, 0.5}});
    for (int rep = 0; rep < 20; ++rep) {
        const auto prof = sample_profile(dup, rng);
        for (NodeId j = 0; j < 101; ++j) {
            CHECK(prof.in_degree(j) == prof.in_degree(101 + j));
            // Twins share in-neighborhoods, so equality survives any common
            // exclusion set.
            std::vector<NodeId> excl;
            for (int e = 0; e < 5; ++e)
                excl.push_back(static_cast<NodeId>(rng.below(202)));
            CHECK(prof.in_degree(j, excl) == prof.in_degree(101 + j, excl));
        }
        // Copies are sinks.
        for (NodeId copy = 101; copy < 202; ++copy) CHECK(prof.out_edges_of(copy).empty());
    }
}

TEST_CASE("lazy totals follow the marginal binomial law") {
    Rng rng(23);
    const Prior zero{PopularityPrior{{0.0, 0.5, 1.0}}};
    for (int i = 0; i < 50; ++i) {
        const LazySample s = sample_lazy(zero, rng);
        CHECK(s.totals[0] == 0);
        CHECK(s.totals[2] == 2);
    }

    const Prior big{UniformPrior{10001, 0.5}};
    double sum = 0.0;
    const int samples = 1000;
    for (int i = 0; i < samples; ++i) {
        const LazySample s = sample_lazy(big, rng);
        sum += s.totals[0];
    }
    const double mean = sum / samples;
    const double sd_of_mean = std::sqrt(10000 * 0.25 / samples);
    CHECK(std::abs(mean - 5000.0) < 3 * sd_of_mean);
}

TEST_CASE("lazy reveal is exact and consistent") {
    Rng rng(29);
    const Prior prior{UniformPrior{4, 0.5}};

    // totals pinned at the extremes force the reveal outcome.
    LazySample s = sample_lazy(prior, rng);
    s.totals = {0, 3, 1, 2};
    s.memo.clear();
    s.revealed.assign(4, 0);
    s.revealed_positive.assign(4, 0);
    CHECK_FALSE(reveal_edge(s, 1, 0, rng));
    CHECK(reveal_edge(s, 0, 1, rng));
    CHECK(reveal_edge(s, 2, 1, rng));
    CHECK(reveal_edge(s, 3, 1, rng));
    CHECK_THROWS_AS(reveal_edge(s, 2, 2, rng), std::invalid_argument);

    // Memoization: the same query twice gives the same answer.
    const bool first = reveal_edge(s, 0, 3, rng);
    CHECK(reveal_edge(s, 0, 3, rng) == first);

    // Revealing everything for a target recovers exactly totals[j] positives.
    int positives = 0;
    for (NodeId i = 0; i < 4; ++i)
        if (i != 3) positives += reveal_edge(s, i, 3, rng) ? 1 : 0;
    CHECK(positives == 2);

    // Exchangeability: with 2 potential voters and one positive, the first
    // reveal is positive half the time.
    int hits = 0;
    const int trials = 10000;
    const Prior small{UniformPrior{3, 0.5}};
    for (int t = 0; t < trials; ++t) {
        LazySample ls = sample_lazy(small, rng);
        ls.totals = {1, 0, 0};
        ls.memo.clear();
        ls.revealed.assign(3, 0);
        ls.revealed_positive.assign(3, 0);
        hits += reveal_edge(ls, 1, 0, rng) ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / trials;
    CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("dense and lazy sampling agree in distribution") {
    // Degree histograms from sample_profile vs fully revealed lazy samples.
    const Prior prior{PopularityPrior{{0.05, 0.3, 0.5, 0.7, 0.95, 0.5}}};
    const int trials = 100000;
    const std::uint32_t m = 6;
    std::vector<std::vector<std::uint64_t>> dense(m, std::vector<std::uint64_t>(m, 0));
    std::vector<std::vector<std::uint64_t>> lazy(m, std::vector<std::uint64_t>(m, 0));

    Rng rng_dense(31), rng_lazy(37);
    for (int t = 0; t < trials; ++t) {
        const auto prof = sample_profile(prior, rng_dense);
        for (NodeId j = 0; j < m; ++j) dense[j][prof.in_degree(j)] += 1;

        LazySample s = sample_lazy(prior, rng_lazy);
        for (NodeId j = 0; j < m; ++j) {
            int d = 0;
            for (NodeId i = 0; i < m; ++i)
                if (i != j) d += reveal_edge(s, i, j, rng_lazy) ? 1 : 0;
            CHECK(d == s.totals[j]);
            lazy[j][d] += 1;
        }
    }
    double chi2 = 0.0;
    for (NodeId j = 0; j < m; ++j) chi2 += testing::chi2_two_sample(dense[j], lazy[j]);
    CHECK(chi2 < 100.0);  // ~30 effective dof; far beyond any sane quantile
}

TEST_CASE("identical seeds give identical samples") {
    const Prior prior{PopularityPrior{{0.2, 0.8, 0.5, 0.1}}};
    Rng a(99), b(99);
    for (int i = 0; i < 10; ++i) {
        CHECK(sample_profile(prior, a) == sample_profile(prior, b));
    }
}
