#include "clue/bins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace clue {

namespace {

double normal_cdf(double x) {
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
}

} // namespace

Binning make_binning(int n_bins) {
    if (n_bins < 2) {
        throw std::invalid_argument("make_binning: n_bins must be >= 2, got " +
                                    std::to_string(n_bins));
    }
    Binning binning;
    binning.n_bins = n_bins;
    binning.representatives.resize(static_cast<std::size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        binning.representatives[static_cast<std::size_t>(i)] =
            (static_cast<double>(i) + 0.5) / static_cast<double>(n_bins);
    }
    return binning;
}

int bin_index(const Binning& binning, double value) {
    const int n = binning.n_bins;
    const int i = static_cast<int>(std::floor(value * n));
    return std::clamp(i, 0, n - 1);
}

bool same_binning(const Binning& a, const Binning& b) {
    return a.n_bins == b.n_bins && a.representatives == b.representatives;
}

void validate(const BinDistribution& dist) {
    if (dist.binning.n_bins < 2 ||
        dist.probs.size() != static_cast<std::size_t>(dist.binning.n_bins)) {
        throw std::invalid_argument("BinDistribution: size does not match binning");
    }
    double total = 0.0;
    for (double p : dist.probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("BinDistribution: negative or NaN entry");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("BinDistribution: probabilities sum to " +
                                    std::to_string(total) + ", expected 1");
    }
}

BinDistribution gaussian_target(const GaussianTargetSpec& spec, const Binning& binning) {
    if (spec.y < 0.0 || spec.y > 1.0) {
        throw std::invalid_argument("gaussian_target: y must lie in [0, 1]");
    }
    if (!(spec.sigma > 0.0)) {
        throw std::invalid_argument("gaussian_target: sigma must be positive");
    }

    const int n = binning.n_bins;
    BinDistribution dist;
    dist.binning = binning;
    dist.probs.resize(static_cast<std::size_t>(n));

    double total = 0.0;
    double lower_cdf = normal_cdf((0.0 - spec.y) / spec.sigma);
    for (int i = 0; i < n; ++i) {
        const double upper = static_cast<double>(i + 1) / static_cast<double>(n);
        const double upper_cdf = normal_cdf((upper - spec.y) / spec.sigma);
        const double mass = std::max(upper_cdf - lower_cdf, 0.0);
        dist.probs[static_cast<std::size_t>(i)] = mass;
        total += mass;
        lower_cdf = upper_cdf;
    }

    if (total <= 0.0) {
        // All CDF differences underflowed; concentrate on the bin holding y.
        std::fill(dist.probs.begin(), dist.probs.end(), 0.0);
        dist.probs[static_cast<std::size_t>(bin_index(binning, spec.y))] = 1.0;
        return dist;
    }
    for (double& p : dist.probs) {
        p /= total;
    }
    return dist;
}

double kl_divergence(const BinDistribution& q, const BinDistribution& p) {
    validate(q);
    validate(p);
    if (!same_binning(q.binning, p.binning)) {
        throw std::invalid_argument("kl_divergence: distributions use different binnings");
    }
    constexpr double eps = 1e-12;
    double total = 0.0;
    for (std::size_t i = 0; i < q.probs.size(); ++i) {
        const double qi = q.probs[i];
        if (qi <= 0.0) {
            continue;
        }
        const double pi = std::max(p.probs[i], eps);
        total += qi * std::log(qi / pi);
    }
    return std::max(total, 0.0);
}

double decode_estimate(const BinDistribution& p) {
    validate(p);
    double estimate = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        estimate += p.binning.representatives[i] * p.probs[i];
    }
    return estimate;
}

} // namespace clue
