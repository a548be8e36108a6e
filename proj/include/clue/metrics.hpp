#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clue/bins.hpp"

namespace clue {

// Aligned (prediction, label) pairs, all values in [0, 1].
struct PredictionSet {
    std::vector<double> preds;
    std::vector<double> labels;
};

// One row of a reliability table: bucket [lower, upper), its mean
// prediction, observed positive rate, and population.
struct ReliabilityBin {
    double lower = 0.0;
    double upper = 0.0;
    double mean_pred = 0.0;
    double positive_rate = 0.0;
    int count = 0;
};

// Named scalar metrics plus optional per-bucket reliability data.
struct MetricsReport {
    std::map<std::string, double> values;
    std::vector<ReliabilityBin> reliability;
};

// Sparse item x rater score matrix; missing cells simply absent.
struct AnnotationMatrix {
    std::vector<std::string> items;
    std::vector<std::string> raters;
    std::map<std::pair<std::string, std::string>, double> scores; // (item, rater)

    void add(const std::string& item, const std::string& rater, double score);
};

struct RaterPairStats {
    std::string rater_a;
    std::string rater_b;
    int n_items = 0;
    std::optional<double> pearson;  // absent when either side has zero variance
    std::optional<double> spearman;
    double mse = 0.0;
    double js_distance = 0.0;
};

// One validation example for temperature fitting: raw pre-softmax logits
// (a single entry means a binary logit) and its scalar label.
struct CalibrationExample {
    std::vector<double> logits;
    double label = 0.0;
};

void validate(const PredictionSet& set);

double mse(const PredictionSet& set);

struct BinaryMetrics {
    double accuracy = 0.0;
    double f1 = 0.0;
};

// Binarizes both sides at the threshold (>= is positive). F1 is 0 when
// precision + recall is 0.
BinaryMetrics binary_metrics(const PredictionSet& set, double threshold = 0.5);

// Expected calibration error over equal-width confidence buckets; labels
// binarized at 0.5, empty buckets contribute nothing.
double ece(const PredictionSet& set, int n_buckets = 10);

// The per-bucket data behind ece, for reliability diagrams.
std::vector<ReliabilityBin> reliability_table(const PredictionSet& set, int n_buckets = 10);

// Soft cross-entropy -(y ln p + (1-y) ln(1-p)) with p clamped to
// [1e-7, 1 - 1e-7], averaged over the set.
double nll(const PredictionSet& set);

// Mean squared error against labels binarized at 0.5.
double brier(const PredictionSet& set);

// mse/accuracy/f1/ece/nll/brier plus the reliability table in one report.
MetricsReport standard_report(const PredictionSet& set, int ece_buckets = 10,
                              double threshold = 0.5);

enum class AlphaMetric { interval, ordinal, nominal };

AlphaMetric parse_alpha_metric(const std::string& name);

// Krippendorff's alpha computed from the coincidence matrix over all
// pairable values; interval (squared difference) distance by default.
// Items with fewer than two scores are skipped; fewer than two pairable
// values total is rejected. Returns 1 when all pairable values are
// identical.
double krippendorff_alpha(const AnnotationMatrix& matrix,
                          AlphaMetric metric = AlphaMetric::interval);

// Per rater pair over co-annotated items: Pearson on raw scores, Spearman
// as Pearson of average ranks, MSE of score differences, and Jensen-Shannon
// distance (base-2, sqrt of divergence) between 10-bin score histograms.
// Pairs with fewer than 2 co-annotated items are omitted.
std::vector<RaterPairStats> pairwise_agreement(const AnnotationMatrix& matrix);

// Re-softmaxes the distribution with its (clamped) logs divided by t.
BinDistribution temperature_scale(const BinDistribution& dist, double t);

// Binary logits are simply divided by t.
std::vector<double> temperature_scale(std::span<const double> logits, double t);

// Golden-section search on ln t over [ln 0.05, ln 20] minimizing validation
// NLL; returns the best temperature probed. Deterministic.
double fit_temperature(std::span<const CalibrationExample> validation);

// NLL of the validation set after scaling logits by 1/t. Exposed for
// before/after reporting.
double scaled_nll(std::span<const CalibrationExample> validation, double t);

} // namespace clue
