#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <vector>

#include "clue/consistency.hpp"
#include "clue/rng.hpp"

using namespace clue;

TEST_CASE("aggregate_mean") {
    CHECK(aggregate_mean({"a", {0.9, 0.8, 0.9, 0.2, 0.9}}) ==
          doctest::Approx(0.74).epsilon(1e-12));
    CHECK(aggregate_mean({"b", {0.5}}) == 0.5);
    CHECK(aggregate_mean({"c", {0.3, 0.3, 0.3}}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(aggregate_mean({"d", {}}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_mean({"e", {1.2}}), std::invalid_argument);
}

TEST_CASE("aggregate_max returns the majority-side mean") {
    // four positive votes, one negative
    CHECK(aggregate_max({"a", {0.9, 0.8, 0.9, 0.2, 0.9}}) ==
          doctest::Approx(0.875).epsilon(1e-12));
    // unanimous negative
    CHECK(aggregate_max({"b", {0.1, 0.2, 0.3}}) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(aggregate_max({"c", {0.7, 0.7}}) == doctest::Approx(0.7).epsilon(1e-12));
    // even split resolves to the positive side
    CHECK(aggregate_max({"d", {0.6, 0.4}}) == doctest::Approx(0.6).epsilon(1e-12));
    // a vote at exactly 0.5 counts as positive
    CHECK(aggregate_max({"e", {0.5}}) == 0.5);
    CHECK_THROWS_AS(aggregate_max({"f", {}}), std::invalid_argument);
}

TEST_CASE("aggregators are permutation invariant and bounded") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        VoteSet votes{"x", {}};
        const int k = 1 + static_cast<int>(rng.integer(9));
        for (int i = 0; i < k; ++i) {
            votes.votes.push_back(rng.uniform());
        }
        VoteSet shuffled = votes;
        rng.shuffle(shuffled.votes);

        const double mean_a = aggregate_mean(votes);
        const double mean_b = aggregate_mean(shuffled);
        REQUIRE(std::abs(mean_a - mean_b) <= 1e-12);
        REQUIRE(std::abs(aggregate_max(votes) - aggregate_max(shuffled)) <= 1e-12);

        const double lo = *std::min_element(votes.votes.begin(), votes.votes.end());
        const double hi = *std::max_element(votes.votes.begin(), votes.votes.end());
        REQUIRE(mean_a >= lo);
        REQUIRE(mean_a <= hi);

        // majority-side hull
        std::vector<double> majority;
        int pos = 0;
        for (double v : votes.votes) {
            pos += v >= 0.5 ? 1 : 0;
        }
        const bool positive_side = 2 * pos >= k;
        for (double v : votes.votes) {
            if ((v >= 0.5) == positive_side) {
                majority.push_back(v);
            }
        }
        const double vmax = aggregate_max(votes);
        REQUIRE(vmax >= *std::min_element(majority.begin(), majority.end()) - 1e-12);
        REQUIRE(vmax <= *std::max_element(majority.begin(), majority.end()) + 1e-12);
    }
}

TEST_CASE("noiseless teacher echoes the truths") {
    const std::vector<double> truths{0.1, 0.5, 0.9, 0.0, 1.0};
    const auto votesets = simulate_teacher(truths, {0.0, 0.0, 0.0, 123}, 3);
    REQUIRE(votesets.size() == truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
        for (double v : votesets[i].votes) {
            CHECK(v == truths[i]);
        }
    }
}

TEST_CASE("forced flips land on the wrong side") {
    const std::vector<double> truths(50, 0.9);
    TeacherSpec spec;
    spec.flip_prob = 1.0;
    spec.seed = 5;
    for (const auto& votes : simulate_teacher(truths, spec, 5)) {
        for (double v : votes.votes) {
            CHECK(v < 0.5);
        }
    }
}

TEST_CASE("simulate_teacher is deterministic and validates inputs") {
    const std::vector<double> truths{0.2, 0.7};
    TeacherSpec spec;
    spec.noise_sd = 0.1;
    spec.flip_prob = 0.2;
    spec.seed = 77;
    const auto a = simulate_teacher(truths, spec, 5);
    const auto b = simulate_teacher(truths, spec, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].votes == b[i].votes);
    }
    CHECK_THROWS_AS(simulate_teacher(truths, spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(simulate_teacher(std::vector<double>{1.5}, spec, 1),
                    std::invalid_argument);
    spec.flip_prob = 1.5;
    CHECK_THROWS_AS(simulate_teacher(truths, spec, 1), std::invalid_argument);
}

TEST_CASE("vote averaging beats a single vote on a noisy teacher") {
    TeacherSpec spec;
    spec.noise_sd = 0.1;
    spec.flip_prob = 0.2;
    spec.seed = 2024;
    const std::vector<double> truths = [&] {
        Rng rng(2025);
        std::vector<double> out(1000);
        for (double& y : out) {
            y = rng.uniform();
        }
        return out;
    }();
    const auto votesets = simulate_teacher(truths, spec, 5);
    const MetricsReport report = evaluate_aggregation(truths, votesets);
    CHECK(report.values.at("mse_mean") < report.values.at("mse_single"));
}

TEST_CASE("unbiased symmetric noise: k-mean variance reduction") {
    TeacherSpec spec;
    spec.noise_sd = 0.15;
    spec.seed = 31337;
    const std::vector<double> truths = [&] {
        Rng rng(404);
        std::vector<double> out(10000);
        for (double& y : out) {
            y = rng.uniform();
        }
        return out;
    }();
    const auto votesets = simulate_teacher(truths, spec, 5);
    const MetricsReport report = evaluate_aggregation(truths, votesets);
    // one-sided margin
    CHECK(report.values.at("mse_mean") < report.values.at("mse_single") * 0.5);
}

TEST_CASE("evaluate_aggregation on perfect votes") {
    const std::vector<double> truths{0.9, 0.1, 0.6};
    const auto votesets = simulate_teacher(truths, {0.0, 0.0, 0.0, 1}, 5);
    const MetricsReport report = evaluate_aggregation(truths, votesets);
    CHECK(report.values.at("accuracy_single") == 1.0);
    CHECK(report.values.at("accuracy_max") == 1.0);
    CHECK(report.values.at("accuracy_mean") == 1.0);
    CHECK(report.values.at("mse_single") == 0.0);
    CHECK(report.values.at("mse_max") == 0.0);
    CHECK(report.values.at("mse_mean") == 0.0);
}

TEST_CASE("evaluate_aggregation degenerate and error cases") {
    const std::vector<double> one_truth{0.8};
    const std::vector<VoteSet> one_vote{{"a", {0.3}}};
    const MetricsReport report = evaluate_aggregation(one_truth, one_vote);
    const double acc = report.values.at("accuracy_single");
    CHECK((acc == 0.0 || acc == 1.0));

    const std::vector<double> two{0.1, 0.9};
    CHECK_THROWS_AS(evaluate_aggregation(two, one_vote), std::invalid_argument);
    CHECK_THROWS_AS(evaluate_aggregation({}, {}), std::invalid_argument);
}
