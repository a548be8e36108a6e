#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clue/bins.hpp"

namespace clue {

// Parameters of the softmax confidence head: a (n_bins x feature_dim)
// weight matrix in row-major order plus a bias per bin.
struct HeadParams {
    int n_bins = 0;
    int feature_dim = 0;
    std::vector<double> weight;
    std::vector<double> bias;
};

HeadParams zero_params(int n_bins, int feature_dim);

struct TrainConfig {
    double learning_rate = 15.0;
    int epochs = 50;
    std::uint64_t seed = 0;
    double sigma = 0.05;
    int batch_size = 1;
};

struct LabeledExample {
    std::vector<double> features;
    double label = 0.0; // in [0, 1]
};

// softmax(weight x features + bias) over the binning.
BinDistribution forward(const HeadParams& params, const Binning& binning,
                        std::span<const double> features);

struct LossGrad {
    double loss = 0.0;
    HeadParams grad; // same shape as the evaluated params
};

// Batch-mean KL(Q_j || P_j) against Gaussian targets N(label_j, sigma^2),
// with its exact gradient: dL/dlogits_j = (P_j - Q_j) / |batch|,
// back-propagated through the affine layer.
LossGrad kl_loss_and_grad(const HeadParams& params, const Binning& binning,
                          std::span<const LabeledExample> batch, double sigma);

// Seeded mini-batch gradient descent with a fixed learning rate. Same seed
// and data give bitwise-identical parameters.
HeadParams train(const TrainConfig& config, const std::vector<LabeledExample>& data,
                 const Binning& binning);

// Parses a decimal numeral in [0, 1] the way a token-emitting baseline
// would produce it; rejects anything else.
double token_baseline_decode(const std::string& text);

// JSON serialization of HeadParams ({"n_bins", "feature_dim", "weight"
// row-major, "bias"}).
std::string params_to_json(const HeadParams& params);
HeadParams params_from_json(const std::string& json_text);
void save_params(const HeadParams& params, const std::string& path);
HeadParams load_params(const std::string& path);

// --- synthetic task -------------------------------------------------------
// Stand-in for the multimodal encoders: features are a seeded random unit
// projection of the centered label plus Gaussian noise.

struct FeatureMap {
    std::vector<double> projection; // unit norm
    double noise_sd = 0.0;
};

FeatureMap make_feature_map(int feature_dim, double noise_sd, std::uint64_t seed);

std::vector<LabeledExample> sample_examples(const FeatureMap& map, std::span<const double> labels,
                                            std::uint64_t seed);

std::vector<double> uniform_labels(int n, std::uint64_t seed);

// n_pos labels drawn from [0.7, 0.95] followed by n_neg from [0.05, 0.3].
std::vector<double> two_class_labels(int n_pos, int n_neg, std::uint64_t seed);

} // namespace clue
