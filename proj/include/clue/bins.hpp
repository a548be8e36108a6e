#pragma once

#include <vector>

namespace clue {

// N-way discretization of [0, 1]. Bin i covers [i/N, (i+1)/N), with the
// last bin closed at 1; representatives[i] is the value the bin decodes to.
struct Binning {
    int n_bins = 0;
    std::vector<double> representatives;
};

// Probability vector over the bins of a Binning.
struct BinDistribution {
    Binning binning;
    std::vector<double> probs;
};

// Scalar label plus the standard deviation of its Gaussian supervision target.
struct GaussianTargetSpec {
    double y = 0.0;
    double sigma = 0.0;
};

// Builds a binning whose representatives are the bin centers (i + 0.5) / N.
// Rejects n_bins < 2.
Binning make_binning(int n_bins);

// Index of the bin containing value; half-open intervals, last bin closed.
int bin_index(const Binning& binning, double value);

bool same_binning(const Binning& a, const Binning& b);

// Throws std::invalid_argument when the distribution is unnormalized,
// negative, or inconsistent with its binning.
void validate(const BinDistribution& dist);

// Discretizes N(y, sigma^2) over the bins by CDF differences and
// renormalizes over [0, 1] (truncated-Gaussian treatment).
BinDistribution gaussian_target(const GaussianTargetSpec& spec, const Binning& binning);

// D_KL(q || p) = sum_i q_i ln(q_i / p_i), with p clamped to 1e-12 before the
// log and 0 * ln(0 / .) taken as 0. Both distributions must share a binning.
double kl_divergence(const BinDistribution& q, const BinDistribution& p);

// Expectation sum_i representatives[i] * probs[i] mapping a distribution
// back to a scalar estimate.
double decode_estimate(const BinDistribution& p);

} // namespace clue
