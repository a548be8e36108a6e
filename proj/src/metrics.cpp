#include "clue/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace clue {

namespace {

constexpr double kNllClamp = 1e-7;

bool positive(double v, double threshold = 0.5) {
    return v >= threshold;
}

int bucket_of(double v, int n_buckets) {
    const int b = static_cast<int>(std::floor(v * n_buckets));
    return std::clamp(b, 0, n_buckets - 1);
}

std::vector<double> softmax(std::vector<double> logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& z : logits) {
        z = std::exp(z - top);
        total += z;
    }
    for (double& z : logits) {
        z /= total;
    }
    return logits;
}

double binary_nll_term(double p, double y) {
    const double pc = std::clamp(p, kNllClamp, 1.0 - kNllClamp);
    return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson_correlation(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> score_histogram(const std::vector<double>& scores, int bins) {
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (double s : scores) {
        hist[static_cast<std::size_t>(bucket_of(s, bins))] += 1.0;
    }
    for (double& h : hist) {
        h /= static_cast<double>(scores.size());
    }
    return hist;
}

double js_distance_base2(const std::vector<double>& a, const std::vector<double>& b) {
    double jsd = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double m = 0.5 * (a[i] + b[i]);
        if (a[i] > 0.0) {
            jsd += 0.5 * a[i] * std::log2(a[i] / m);
        }
        if (b[i] > 0.0) {
            jsd += 0.5 * b[i] * std::log2(b[i] / m);
        }
    }
    return std::sqrt(std::max(jsd, 0.0));
}

// NLL of a single calibration example at temperature t. A one-entry logit
// vector is a binary logit; longer vectors are softmaxed over bin centers
// and decoded to a scalar first.
double example_nll(const CalibrationExample& example, double t) {
    if (example.logits.size() == 1) {
        const double p = 1.0 / (1.0 + std::exp(-example.logits[0] / t));
        return binary_nll_term(p, example.label);
    }
    std::vector<double> scaled(example.logits);
    for (double& z : scaled) {
        z /= t;
    }
    const std::vector<double> probs = softmax(std::move(scaled));
    const int n = static_cast<int>(probs.size());
    double estimate = 0.0;
    for (int i = 0; i < n; ++i) {
        estimate += (static_cast<double>(i) + 0.5) / n * probs[static_cast<std::size_t>(i)];
    }
    return binary_nll_term(estimate, example.label);
}

} // namespace

void AnnotationMatrix::add(const std::string& item, const std::string& rater, double score) {
    if (score < 0.0 || score > 1.0) {
        throw std::invalid_argument("AnnotationMatrix: score must lie in [0, 1]");
    }
    if (std::find(items.begin(), items.end(), item) == items.end()) {
        items.push_back(item);
    }
    if (std::find(raters.begin(), raters.end(), rater) == raters.end()) {
        raters.push_back(rater);
    }
    scores[{item, rater}] = score;
}

void validate(const PredictionSet& set) {
    if (set.preds.empty() || set.preds.size() != set.labels.size()) {
        throw std::invalid_argument("PredictionSet: must be non-empty and aligned");
    }
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        if (set.preds[i] < 0.0 || set.preds[i] > 1.0 || set.labels[i] < 0.0 ||
            set.labels[i] > 1.0) {
            throw std::invalid_argument("PredictionSet: values must lie in [0, 1]");
        }
    }
}

double mse(const PredictionSet& set) {
    validate(set);
    double total = 0.0;
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        const double d = set.preds[i] - set.labels[i];
        total += d * d;
    }
    return total / static_cast<double>(set.preds.size());
}

BinaryMetrics binary_metrics(const PredictionSet& set, double threshold) {
    validate(set);
    int tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        const bool p = positive(set.preds[i], threshold);
        const bool y = positive(set.labels[i], threshold);
        if (p && y) {
            ++tp;
        } else if (p && !y) {
            ++fp;
        } else if (!p && !y) {
            ++tn;
        } else {
            ++fn;
        }
    }
    BinaryMetrics out;
    out.accuracy = static_cast<double>(tp + tn) / static_cast<double>(set.preds.size());
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    out.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return out;
}

std::vector<ReliabilityBin> reliability_table(const PredictionSet& set, int n_buckets) {
    validate(set);
    if (n_buckets < 1) {
        throw std::invalid_argument("reliability_table: n_buckets must be >= 1");
    }
    std::vector<ReliabilityBin> table(static_cast<std::size_t>(n_buckets));
    std::vector<double> pred_sum(static_cast<std::size_t>(n_buckets), 0.0);
    std::vector<double> pos_sum(static_cast<std::size_t>(n_buckets), 0.0);
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        const auto b = static_cast<std::size_t>(bucket_of(set.preds[i], n_buckets));
        pred_sum[b] += set.preds[i];
        pos_sum[b] += positive(set.labels[i]) ? 1.0 : 0.0;
        table[b].count += 1;
    }
    for (int b = 0; b < n_buckets; ++b) {
        auto& row = table[static_cast<std::size_t>(b)];
        row.lower = static_cast<double>(b) / n_buckets;
        row.upper = static_cast<double>(b + 1) / n_buckets;
        if (row.count > 0) {
            row.mean_pred = pred_sum[static_cast<std::size_t>(b)] / row.count;
            row.positive_rate = pos_sum[static_cast<std::size_t>(b)] / row.count;
        }
    }
    return table;
}

double ece(const PredictionSet& set, int n_buckets) {
    const auto table = reliability_table(set, n_buckets);
    const double n = static_cast<double>(set.preds.size());
    double total = 0.0;
    for (const auto& row : table) {
        if (row.count > 0) {
            total += (row.count / n) * std::abs(row.mean_pred - row.positive_rate);
        }
    }
    return total;
}

double nll(const PredictionSet& set) {
    validate(set);
    double total = 0.0;
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        total += binary_nll_term(set.preds[i], set.labels[i]);
    }
    return total / static_cast<double>(set.preds.size());
}

double brier(const PredictionSet& set) {
    validate(set);
    double total = 0.0;
    for (std::size_t i = 0; i < set.preds.size(); ++i) {
        const double outcome = positive(set.labels[i]) ? 1.0 : 0.0;
        const double d = set.preds[i] - outcome;
        total += d * d;
    }
    return total / static_cast<double>(set.preds.size());
}

MetricsReport standard_report(const PredictionSet& set, int ece_buckets, double threshold) {
    MetricsReport report;
    const BinaryMetrics binary = binary_metrics(set, threshold);
    report.values["mse"] = mse(set);
    report.values["accuracy"] = binary.accuracy;
    report.values["f1"] = binary.f1;
    report.values["ece"] = ece(set, ece_buckets);
    report.values["nll"] = nll(set);
    report.values["brier"] = brier(set);
    report.values["n"] = static_cast<double>(set.preds.size());
    report.reliability = reliability_table(set, ece_buckets);
    return report;
}

AlphaMetric parse_alpha_metric(const std::string& name) {
    if (name == "interval") return AlphaMetric::interval;
    if (name == "ordinal") return AlphaMetric::ordinal;
    if (name == "nominal") return AlphaMetric::nominal;
    throw std::invalid_argument("unknown alpha metric: " + name);
}

double krippendorff_alpha(const AnnotationMatrix& matrix, AlphaMetric metric) {
    // Values per unit, keeping only units with >= 2 scores.
    std::vector<std::vector<double>> units;
    for (const auto& item : matrix.items) {
        std::vector<double> values;
        for (const auto& rater : matrix.raters) {
            const auto it = matrix.scores.find({item, rater});
            if (it != matrix.scores.end()) {
                values.push_back(it->second);
            }
        }
        if (values.size() >= 2) {
            units.push_back(std::move(values));
        }
    }

    std::vector<double> pooled;
    for (const auto& unit : units) {
        pooled.insert(pooled.end(), unit.begin(), unit.end());
    }
    const std::size_t n = pooled.size();
    if (n < 2) {
        throw std::invalid_argument("krippendorff_alpha: fewer than 2 pairable values");
    }

    // Coincidence counts over the distinct values actually observed.
    std::vector<double> levels(pooled);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const std::size_t v = levels.size();
    if (v == 1) {
        return 1.0; // no disagreement is expressible
    }
    auto level_of = [&](double value) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), value) - levels.begin());
    };

    std::vector<double> coincidence(v * v, 0.0);
    for (const auto& unit : units) {
        const double weight = 1.0 / static_cast<double>(unit.size() - 1);
        for (std::size_t i = 0; i < unit.size(); ++i) {
            for (std::size_t j = 0; j < unit.size(); ++j) {
                if (i != j) {
                    coincidence[level_of(unit[i]) * v + level_of(unit[j])] += weight;
                }
            }
        }
    }

    std::vector<double> margins(v, 0.0);
    for (std::size_t c = 0; c < v; ++c) {
        for (std::size_t k = 0; k < v; ++k) {
            margins[c] += coincidence[c * v + k];
        }
    }
    const double total = std::accumulate(margins.begin(), margins.end(), 0.0);

    auto distance_sq = [&](std::size_t c, std::size_t k) {
        switch (metric) {
        case AlphaMetric::interval: {
            const double d = levels[c] - levels[k];
            return d * d;
        }
        case AlphaMetric::nominal:
            return c == k ? 0.0 : 1.0;
        case AlphaMetric::ordinal: {
            // cumulative margin between the two levels, endpoints half-weighted
            double span = 0.0;
            for (std::size_t g = c; g <= k; ++g) {
                span += margins[g];
            }
            span -= (margins[c] + margins[k]) / 2.0;
            return span * span;
        }
        }
        return 0.0;
    };

    double observed = 0.0;
    double expected = 0.0;
    for (std::size_t c = 0; c < v; ++c) {
        for (std::size_t k = c + 1; k < v; ++k) {
            const double d2 = distance_sq(c, k);
            observed += coincidence[c * v + k] * d2;
            expected += margins[c] * margins[k] * d2;
        }
    }
    if (expected == 0.0) {
        return 1.0;
    }
    return 1.0 - (total - 1.0) * observed / expected;
}

std::vector<RaterPairStats> pairwise_agreement(const AnnotationMatrix& matrix) {
    constexpr int kHistogramBins = 10;
    std::vector<std::string> raters(matrix.raters);
    std::sort(raters.begin(), raters.end());

    std::vector<RaterPairStats> table;
    for (std::size_t a = 0; a < raters.size(); ++a) {
        for (std::size_t b = a + 1; b < raters.size(); ++b) {
            std::vector<double> xs, ys;
            for (const auto& item : matrix.items) {
                const auto ia = matrix.scores.find({item, raters[a]});
                const auto ib = matrix.scores.find({item, raters[b]});
                if (ia != matrix.scores.end() && ib != matrix.scores.end()) {
                    xs.push_back(ia->second);
                    ys.push_back(ib->second);
                }
            }
            if (xs.size() < 2) {
                continue; // absent, not zero
            }
            RaterPairStats stats;
            stats.rater_a = raters[a];
            stats.rater_b = raters[b];
            stats.n_items = static_cast<int>(xs.size());
            stats.pearson = pearson_correlation(xs, ys);
            stats.spearman = pearson_correlation(average_ranks(xs), average_ranks(ys));
            double total = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                total += (xs[i] - ys[i]) * (xs[i] - ys[i]);
            }
            stats.mse = total / static_cast<double>(xs.size());
            stats.js_distance = js_distance_base2(score_histogram(xs, kHistogramBins),
                                                  score_histogram(ys, kHistogramBins));
            table.push_back(std::move(stats));
        }
    }
    return table;
}

BinDistribution temperature_scale(const BinDistribution& dist, double t) {
    validate(dist);
    if (!(t > 0.0)) {
        throw std::invalid_argument("temperature_scale: t must be positive");
    }
    constexpr double eps = 1e-12;
    std::vector<double> logits(dist.probs.size());
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        logits[i] = std::log(std::max(dist.probs[i], eps)) / t;
    }
    BinDistribution out;
    out.binning = dist.binning;
    out.probs = softmax(std::move(logits));
    return out;
}

std::vector<double> temperature_scale(std::span<const double> logits, double t) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("temperature_scale: t must be positive");
    }
    std::vector<double> out(logits.begin(), logits.end());
    for (double& z : out) {
        z /= t;
    }
    return out;
}

double scaled_nll(std::span<const CalibrationExample> validation, double t) {
    if (validation.empty()) {
        throw std::invalid_argument("scaled_nll: empty validation set");
    }
    double total = 0.0;
    for (const auto& example : validation) {
        if (example.logits.empty()) {
            throw std::invalid_argument("scaled_nll: example without logits");
        }
        total += example_nll(example, t);
    }
    return total / static_cast<double>(validation.size());
}

double fit_temperature(std::span<const CalibrationExample> validation) {
    if (validation.empty()) {
        throw std::invalid_argument("fit_temperature: empty validation set");
    }
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(0.05);
    double hi = std::log(20.0);

    double best_x = 0.0; // ln 1
    double best_value = scaled_nll(validation, 1.0);
    auto probe = [&](double x) {
        const double value = scaled_nll(validation, std::exp(x));
        if (value < best_value) {
            best_value = value;
            best_x = x;
        }
        return value;
    };

    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    double f1 = probe(x1);
    double f2 = probe(x2);
    while (hi - lo > 1e-4) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = probe(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = probe(x2);
        }
    }
    return std::exp(best_x);
}

} // namespace clue
