#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clue/metrics.hpp"

namespace clue {

// k independent teacher judgments for one record.
struct VoteSet {
    std::string record_id;
    std::vector<double> votes;
};

// Parameters of a simulated noisy teacher.
struct TeacherSpec {
    double bias = 0.0;
    double noise_sd = 0.0;
    double flip_prob = 0.0;
    std::uint64_t seed = 0;
};

// Arithmetic mean of the votes.
double aggregate_mean(const VoteSet& votes);

// Majority-side mean: votes are binarized at 0.5 (>= 0.5 positive), the
// majority side wins (ties go positive), and the mean of that side's votes
// is returned.
double aggregate_max(const VoteSet& votes);

// For each truth, emits k votes: with probability flip_prob a vote drawn
// uniformly from the wrong side of 0.5, otherwise truth + bias + Gaussian
// noise clamped to [0, 1]. Deterministic given spec.seed.
std::vector<VoteSet> simulate_teacher(std::span<const double> truths, const TeacherSpec& spec,
                                      int k);

// Accuracy (0.5 threshold on both sides) and MSE against the truths for
// three strategies: the first vote alone, k-max, and k-mean. Keys:
// accuracy_single/mse_single/accuracy_max/mse_max/accuracy_mean/mse_mean.
MetricsReport evaluate_aggregation(std::span<const double> truths,
                                   std::span<const VoteSet> votesets);

} // namespace clue
