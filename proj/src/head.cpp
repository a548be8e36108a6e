#include "clue/head.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "clue/rng.hpp"

namespace clue {

namespace {

void check_shapes(const HeadParams& params, const Binning& binning) {
    if (params.n_bins != binning.n_bins) {
        throw std::invalid_argument("HeadParams: row count does not match binning");
    }
    if (params.weight.size() !=
            static_cast<std::size_t>(params.n_bins) * static_cast<std::size_t>(params.feature_dim) ||
        params.bias.size() != static_cast<std::size_t>(params.n_bins)) {
        throw std::invalid_argument("HeadParams: inconsistent parameter shapes");
    }
}

// logits = weight x features + bias
std::vector<double> affine(const HeadParams& params, std::span<const double> features) {
    if (features.size() != static_cast<std::size_t>(params.feature_dim)) {
        throw std::invalid_argument("forward: feature dimension mismatch");
    }
    std::vector<double> logits(params.bias);
    for (int i = 0; i < params.n_bins; ++i) {
        const double* row = params.weight.data() +
                            static_cast<std::size_t>(i) * static_cast<std::size_t>(params.feature_dim);
        double dot = 0.0;
        for (int j = 0; j < params.feature_dim; ++j) {
            dot += row[j] * features[static_cast<std::size_t>(j)];
        }
        logits[static_cast<std::size_t>(i)] += dot;
    }
    return logits;
}

void softmax_inplace(std::vector<double>& logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        total += z;
    }
    for (double& z : logits) {
        z /= total;
    }
}

} // namespace

HeadParams zero_params(int n_bins, int feature_dim) {
    if (n_bins < 2 || feature_dim < 1) {
        throw std::invalid_argument("zero_params: need n_bins >= 2 and feature_dim >= 1");
    }
    HeadParams params;
    params.n_bins = n_bins;
    params.feature_dim = feature_dim;
    params.weight.assign(static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(feature_dim),
                         0.0);
    params.bias.assign(static_cast<std::size_t>(n_bins), 0.0);
    return params;
}

BinDistribution forward(const HeadParams& params, const Binning& binning,
                        std::span<const double> features) {
    check_shapes(params, binning);
    std::vector<double> logits = affine(params, features);
    softmax_inplace(logits);
    BinDistribution dist;
    dist.binning = binning;
    dist.probs = std::move(logits);
    return dist;
}

LossGrad kl_loss_and_grad(const HeadParams& params, const Binning& binning,
                          std::span<const LabeledExample> batch, double sigma) {
    check_shapes(params, binning);
    if (batch.empty()) {
        throw std::invalid_argument("kl_loss_and_grad: empty batch");
    }
    LossGrad out;
    out.grad = zero_params(params.n_bins, params.feature_dim);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (const auto& example : batch) {
        std::vector<double> probs = affine(params, example.features);
        softmax_inplace(probs);
        const BinDistribution target = gaussian_target({example.label, sigma}, binning);

        // loss term
        constexpr double eps = 1e-12;
        for (int i = 0; i < params.n_bins; ++i) {
            const double qi = target.probs[static_cast<std::size_t>(i)];
            if (qi > 0.0) {
                out.loss +=
                    inv_batch * qi *
                    std::log(qi / std::max(probs[static_cast<std::size_t>(i)], eps));
            }
        }

        // dL/dlogits = (P - Q) / |batch|, pushed through the affine map
        for (int i = 0; i < params.n_bins; ++i) {
            const double g =
                (probs[static_cast<std::size_t>(i)] - target.probs[static_cast<std::size_t>(i)]) *
                inv_batch;
            out.grad.bias[static_cast<std::size_t>(i)] += g;
            double* grow = out.grad.weight.data() +
                           static_cast<std::size_t>(i) * static_cast<std::size_t>(params.feature_dim);
            for (int j = 0; j < params.feature_dim; ++j) {
                grow[j] += g * example.features[static_cast<std::size_t>(j)];
            }
        }
    }
    out.loss = std::max(out.loss, 0.0);
    return out;
}

HeadParams train(const TrainConfig& config, const std::vector<LabeledExample>& data,
                 const Binning& binning) {
    if (data.empty()) {
        throw std::invalid_argument("train: empty data");
    }
    if (!(config.learning_rate > 0.0)) {
        throw std::invalid_argument("train: learning_rate must be positive");
    }
    if (config.epochs < 1) {
        throw std::invalid_argument("train: epochs must be >= 1");
    }
    if (config.batch_size < 1) {
        throw std::invalid_argument("train: batch_size must be >= 1");
    }

    const int feature_dim = static_cast<int>(data.front().features.size());
    for (const auto& example : data) {
        if (static_cast<int>(example.features.size()) != feature_dim) {
            throw std::invalid_argument("train: ragged feature dimensions");
        }
        if (example.label < 0.0 || example.label > 1.0) {
            throw std::invalid_argument("train: labels must lie in [0, 1]");
        }
        for (double f : example.features) {
            if (!std::isfinite(f)) {
                throw std::invalid_argument("train: features must be finite");
            }
        }
    }

    HeadParams params = zero_params(binning.n_bins, feature_dim);
    Rng rng(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LabeledExample> batch;
    batch.reserve(static_cast<std::size_t>(config.batch_size));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(data[order[i]]);
            }
            const LossGrad step = kl_loss_and_grad(params, binning, batch, config.sigma);
            for (std::size_t i = 0; i < params.weight.size(); ++i) {
                params.weight[i] -= config.learning_rate * step.grad.weight[i];
            }
            for (std::size_t i = 0; i < params.bias.size(); ++i) {
                params.bias[i] -= config.learning_rate * step.grad.bias[i];
            }
        }
    }
    return params;
}

double token_baseline_decode(const std::string& text) {
    std::size_t begin = text.find_first_not_of(" \t");
    std::size_t end = text.find_last_not_of(" \t");
    if (begin == std::string::npos) {
        throw std::invalid_argument("token_baseline_decode: empty text");
    }
    const std::string body = text.substr(begin, end - begin + 1);
    for (char c : body) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.')) {
            throw std::invalid_argument("token_baseline_decode: not a decimal numeral: " + text);
        }
    }
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(body, &consumed);
    } catch (const std::exception&) {
        throw std::invalid_argument("token_baseline_decode: not a decimal numeral: " + text);
    }
    if (consumed != body.size()) {
        throw std::invalid_argument("token_baseline_decode: trailing characters: " + text);
    }
    if (value < 0.0 || value > 1.0) {
        throw std::invalid_argument("token_baseline_decode: value out of [0, 1]: " + text);
    }
    return value;
}

std::string params_to_json(const HeadParams& params) {
    nlohmann::json j;
    j["n_bins"] = params.n_bins;
    j["feature_dim"] = params.feature_dim;
    j["weight"] = params.weight;
    j["bias"] = params.bias;
    return j.dump();
}

HeadParams params_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    HeadParams params;
    params.n_bins = j.at("n_bins").get<int>();
    params.feature_dim = j.at("feature_dim").get<int>();
    params.weight = j.at("weight").get<std::vector<double>>();
    params.bias = j.at("bias").get<std::vector<double>>();
    if (params.weight.size() !=
            static_cast<std::size_t>(params.n_bins) * static_cast<std::size_t>(params.feature_dim) ||
        params.bias.size() != static_cast<std::size_t>(params.n_bins)) {
        throw std::invalid_argument("params_from_json: inconsistent shapes");
    }
    for (const auto& values : {params.weight, params.bias}) {
        for (double v : values) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("params_from_json: non-finite entry");
            }
        }
    }
    return params;
}

void save_params(const HeadParams& params, const std::string& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("save_params: cannot open " + path);
    }
    file << params_to_json(params) << "\n";
}

HeadParams load_params(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("load_params: cannot open " + path);
    }
    std::stringstream buffer;
    buffer << file.rdbuf();
    return params_from_json(buffer.str());
}

FeatureMap make_feature_map(int feature_dim, double noise_sd, std::uint64_t seed) {
    if (feature_dim < 1) {
        throw std::invalid_argument("make_feature_map: feature_dim must be >= 1");
    }
    if (noise_sd < 0.0) {
        throw std::invalid_argument("make_feature_map: noise_sd must be >= 0");
    }
    Rng rng(seed);
    FeatureMap map;
    map.noise_sd = noise_sd;
    map.projection.resize(static_cast<std::size_t>(feature_dim));
    double norm_sq = 0.0;
    for (double& p : map.projection) {
        p = rng.gaussian();
        norm_sq += p * p;
    }
    const double norm = std::sqrt(norm_sq);
    for (double& p : map.projection) {
        p /= norm;
    }
    return map;
}

std::vector<LabeledExample> sample_examples(const FeatureMap& map, std::span<const double> labels,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledExample> out;
    out.reserve(labels.size());
    for (double y : labels) {
        LabeledExample example;
        example.label = y;
        example.features.resize(map.projection.size());
        for (std::size_t j = 0; j < map.projection.size(); ++j) {
            example.features[j] = map.projection[j] * (y - 0.5);
            if (map.noise_sd > 0.0) {
                example.features[j] += rng.gaussian(0.0, map.noise_sd);
            }
        }
        out.push_back(std::move(example));
    }
    return out;
}

std::vector<double> uniform_labels(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> labels(static_cast<std::size_t>(n));
    for (double& y : labels) {
        y = rng.uniform();
    }
    return labels;
}

std::vector<double> two_class_labels(int n_pos, int n_neg, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> labels;
    labels.reserve(static_cast<std::size_t>(n_pos + n_neg));
    for (int i = 0; i < n_pos; ++i) {
        labels.push_back(rng.uniform(0.7, 0.95));
    }
    for (int i = 0; i < n_neg; ++i) {
        labels.push_back(rng.uniform(0.05, 0.3));
    }
    return labels;
}

} // namespace clue
