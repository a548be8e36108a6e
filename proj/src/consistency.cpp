#include "clue/consistency.hpp"

#include <algorithm>
#include <stdexcept>

#include "clue/rng.hpp"

namespace clue {

namespace {

void validate(const VoteSet& votes) {
    if (votes.votes.empty()) {
        throw std::invalid_argument("VoteSet: vote list is empty");
    }
    for (double v : votes.votes) {
        if (v < 0.0 || v > 1.0) {
            throw std::invalid_argument("VoteSet: votes must lie in [0, 1]");
        }
    }
}

} // namespace

double aggregate_mean(const VoteSet& votes) {
    validate(votes);
    double total = 0.0;
    for (double v : votes.votes) {
        total += v;
    }
    return total / static_cast<double>(votes.votes.size());
}

double aggregate_max(const VoteSet& votes) {
    validate(votes);
    double pos_sum = 0.0, neg_sum = 0.0;
    int pos_count = 0, neg_count = 0;
    for (double v : votes.votes) {
        if (v >= 0.5) {
            pos_sum += v;
            ++pos_count;
        } else {
            neg_sum += v;
            ++neg_count;
        }
    }
    // Ties resolve to the positive side.
    if (pos_count >= neg_count) {
        return pos_sum / pos_count;
    }
    return neg_sum / neg_count;
}

std::vector<VoteSet> simulate_teacher(std::span<const double> truths, const TeacherSpec& spec,
                                      int k) {
    if (k < 1) {
        throw std::invalid_argument("simulate_teacher: k must be >= 1");
    }
    if (spec.noise_sd < 0.0 || spec.flip_prob < 0.0 || spec.flip_prob > 1.0) {
        throw std::invalid_argument("simulate_teacher: invalid teacher spec");
    }
    for (double y : truths) {
        if (y < 0.0 || y > 1.0) {
            throw std::invalid_argument("simulate_teacher: truths must lie in [0, 1]");
        }
    }

    Rng rng(spec.seed);
    std::vector<VoteSet> out;
    out.reserve(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
        VoteSet votes;
        votes.record_id = "r" + std::to_string(i);
        votes.votes.reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            double vote;
            if (spec.flip_prob > 0.0 && rng.uniform() < spec.flip_prob) {
                vote = truths[i] >= 0.5 ? rng.uniform(0.0, 0.5) : rng.uniform(0.5, 1.0);
            } else {
                vote = std::clamp(truths[i] + spec.bias + rng.gaussian(0.0, spec.noise_sd),
                                  0.0, 1.0);
            }
            votes.votes.push_back(vote);
        }
        out.push_back(std::move(votes));
    }
    return out;
}

MetricsReport evaluate_aggregation(std::span<const double> truths,
                                   std::span<const VoteSet> votesets) {
    if (truths.empty() || truths.size() != votesets.size()) {
        throw std::invalid_argument("evaluate_aggregation: truths and votesets must align");
    }
    const double n = static_cast<double>(truths.size());
    double mse_single = 0.0, mse_max = 0.0, mse_mean = 0.0;
    double acc_single = 0.0, acc_max = 0.0, acc_mean = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double truth = truths[i];
        const bool truth_pos = truth >= 0.5;
        if (votesets[i].votes.empty()) {
            throw std::invalid_argument("evaluate_aggregation: empty vote set");
        }
        const double single = votesets[i].votes.front();
        const double vmax = aggregate_max(votesets[i]);
        const double vmean = aggregate_mean(votesets[i]);
        mse_single += (single - truth) * (single - truth);
        mse_max += (vmax - truth) * (vmax - truth);
        mse_mean += (vmean - truth) * (vmean - truth);
        acc_single += (single >= 0.5) == truth_pos ? 1.0 : 0.0;
        acc_max += (vmax >= 0.5) == truth_pos ? 1.0 : 0.0;
        acc_mean += (vmean >= 0.5) == truth_pos ? 1.0 : 0.0;
    }
    MetricsReport report;
    report.values["mse_single"] = mse_single / n;
    report.values["mse_max"] = mse_max / n;
    report.values["mse_mean"] = mse_mean / n;
    report.values["accuracy_single"] = acc_single / n;
    report.values["accuracy_max"] = acc_max / n;
    report.values["accuracy_mean"] = acc_mean / n;
    report.values["n"] = n;
    return report;
}

} // namespace clue
