// clue: calibration toolkit CLI.
//
// Subcommands wire the library operations to JSONL files on disk. Every
// command is deterministic given --seed (or CLUE_SEED) and supports
// --output to write to a file instead of stdout.
//
// Exit codes: 0 success, 1 usage, 2 data validation, 3 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clue/batching.hpp"
#include "clue/bins.hpp"
#include "clue/consistency.hpp"
#include "clue/head.hpp"
#include "clue/io.hpp"
#include "clue/metrics.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

std::uint64_t env_default_seed() {
    if (const char* env = std::getenv("CLUE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("CLUE_SEED must be an unsigned integer");
        }
    }
    return 0;
}

void emit(const std::string& text, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open for writing: " + output_path);
    }
    file << text;
}

json report_to_json(const clue::MetricsReport& report) {
    json object;
    for (const auto& [key, value] : report.values) {
        if (key == "n") {
            object[key] = static_cast<long long>(value);
        } else {
            object[key] = value;
        }
    }
    return object;
}

json reliability_to_json(const std::vector<clue::ReliabilityBin>& table) {
    json rows = json::array();
    for (const auto& row : table) {
        rows.push_back({{"lower", row.lower},
                        {"upper", row.upper},
                        {"mean_pred", row.mean_pred},
                        {"positive_rate", row.positive_rate},
                        {"count", row.count}});
    }
    return rows;
}

struct TargetArgs {
    double y = 0.0;
    double sigma = 0.05;
    int n_bins = 100;
    std::string output;
};

int cmd_target(const TargetArgs& args) {
    const clue::Binning binning = clue::make_binning(args.n_bins);
    const clue::BinDistribution dist = clue::gaussian_target({args.y, args.sigma}, binning);
    emit(json(dist.probs).dump() + "\n", args.output);
    return 0;
}

struct MetricsArgs {
    std::string predictions_path;
    int buckets = 10;
    double threshold = 0.5;
    std::string output;
};

int cmd_metrics(const MetricsArgs& args) {
    const auto records = clue::read_predictions(args.predictions_path);
    clue::PredictionSet set;
    for (const auto& record : records) {
        set.preds.push_back(record.pred);
        set.labels.push_back(record.label);
    }
    const clue::MetricsReport report = clue::standard_report(set, args.buckets, args.threshold);
    json object = report_to_json(report);
    object["mse_x100"] = 100.0 * report.values.at("mse");
    object["reliability"] = reliability_to_json(report.reliability);
    emit(object.dump(2) + "\n", args.output);
    return 0;
}

struct AggregateArgs {
    std::string votes_path;
    std::string strategy = "mean";
    std::string records_path;
    bool report = false;
    std::string output;
};

int cmd_aggregate(const AggregateArgs& args) {
    const auto votesets = clue::read_votes(args.votes_path);

    std::map<std::string, double> labels;
    if (!args.records_path.empty()) {
        for (const auto& record : clue::read_records(args.records_path)) {
            labels[record.id] = record.label;
        }
    }

    if (args.report) {
        if (labels.empty()) {
            throw std::invalid_argument("aggregate: --report needs --records for the truths");
        }
        std::vector<double> truths;
        for (const auto& votes : votesets) {
            const auto it = labels.find(votes.record_id);
            if (it == labels.end()) {
                throw std::invalid_argument("aggregate: record id '" + votes.record_id +
                                            "' not found in " + args.records_path);
            }
            truths.push_back(it->second);
        }
        const clue::MetricsReport report = clue::evaluate_aggregation(truths, votesets);
        emit(report_to_json(report).dump(2) + "\n", args.output);
        return 0;
    }

    std::ostringstream lines;
    for (const auto& votes : votesets) {
        double value = 0.0;
        if (args.strategy == "mean") {
            value = clue::aggregate_mean(votes);
        } else if (args.strategy == "max") {
            value = clue::aggregate_max(votes);
        } else if (args.strategy == "first") {
            value = votes.votes.front();
        } else {
            throw std::invalid_argument("aggregate: unknown strategy " + args.strategy);
        }
        json object;
        object["id"] = votes.record_id;
        object["pred"] = value;
        if (!labels.empty()) {
            const auto it = labels.find(votes.record_id);
            if (it == labels.end()) {
                throw std::invalid_argument("aggregate: record id '" + votes.record_id +
                                            "' not found in " + args.records_path);
            }
            object["label"] = it->second;
        }
        lines << object.dump() << "\n";
    }
    emit(lines.str(), args.output);
    return 0;
}

struct AgreementArgs {
    std::string annotations_path;
    std::string metric = "interval";
    std::string output;
};

int cmd_agreement(const AgreementArgs& args) {
    clue::AnnotationMatrix matrix;
    for (const auto& record : clue::read_annotations(args.annotations_path)) {
        matrix.add(record.item, record.rater, record.score);
    }
    json object;
    object["alpha"] = clue::krippendorff_alpha(matrix, clue::parse_alpha_metric(args.metric));
    object["alpha_metric"] = args.metric;
    json pairs = json::array();
    for (const auto& stats : clue::pairwise_agreement(matrix)) {
        json row;
        row["rater_a"] = stats.rater_a;
        row["rater_b"] = stats.rater_b;
        row["n_items"] = stats.n_items;
        row["pearson"] = stats.pearson ? json(*stats.pearson) : json(nullptr);
        row["spearman"] = stats.spearman ? json(*stats.spearman) : json(nullptr);
        row["mse"] = stats.mse;
        row["js_distance"] = stats.js_distance;
        pairs.push_back(std::move(row));
    }
    object["pairs"] = std::move(pairs);
    emit(object.dump(2) + "\n", args.output);
    return 0;
}

struct BatchPlanArgs {
    std::string records_path;
    std::string policy = "modality_batched";
    int batch_size = 8;
    double ratio = 0.0; // 0 = keep the pool as-is
    std::uint64_t seed = 0;
    bool stats = false;
    std::string output;
};

int cmd_batch_plan(const BatchPlanArgs& args) {
    auto records = clue::read_records(args.records_path);
    if (args.ratio > 0.0) {
        records = clue::resample_mixture(records, args.ratio, args.seed);
    }
    const clue::BatchPlan plan = clue::plan_batches(records, clue::parse_batch_policy(args.policy),
                                                    args.batch_size, args.seed + 1);
    if (args.stats) {
        json object;
        object["policy"] = clue::to_string(plan.policy);
        object["n_batches"] = plan.batches.size();
        object["padding_fraction"] = clue::padding_fraction(plan, records);
        emit(object.dump(2) + "\n", args.output);
        return 0;
    }
    std::ostringstream lines;
    for (std::size_t i = 0; i < plan.batches.size(); ++i) {
        json object;
        object["batch"] = i;
        object["ids"] = plan.batches[i];
        object["modality"] = plan.batch_modalities[i]
                                 ? json(clue::to_string(*plan.batch_modalities[i]))
                                 : json(nullptr);
        lines << object.dump() << "\n";
    }
    emit(lines.str(), args.output);
    return 0;
}

struct TempScaleArgs {
    std::string predictions_path;
    std::optional<double> fixed_t;
    std::string apply_path;
    std::string output;
};

int cmd_temp_scale(const TempScaleArgs& args) {
    auto records = clue::read_predictions(args.predictions_path);
    std::vector<clue::CalibrationExample> validation;
    for (const auto& record : records) {
        if (record.logits.empty()) {
            throw std::invalid_argument("temp-scale: record '" + record.id +
                                        "' carries no logits");
        }
        validation.push_back({record.logits, record.label});
    }

    const double t = args.fixed_t ? *args.fixed_t : clue::fit_temperature(validation);
    if (!(t > 0.0)) {
        throw std::invalid_argument("temp-scale: t must be positive");
    }

    json object;
    object["temperature"] = t;
    object["nll_before"] = clue::scaled_nll(validation, 1.0);
    object["nll_after"] = clue::scaled_nll(validation, t);
    object["n"] = validation.size();

    if (!args.apply_path.empty()) {
        for (auto& record : records) {
            record.logits = clue::temperature_scale(record.logits, t);
            if (record.logits.size() == 1) {
                record.pred = 1.0 / (1.0 + std::exp(-record.logits[0]));
            } else {
                const clue::Binning binning =
                    clue::make_binning(static_cast<int>(record.logits.size()));
                std::vector<double> shifted = record.logits;
                const double top = *std::max_element(shifted.begin(), shifted.end());
                double total = 0.0;
                for (double& z : shifted) {
                    z = std::exp(z - top);
                    total += z;
                }
                for (double& z : shifted) {
                    z /= total;
                }
                record.pred = clue::decode_estimate({binning, shifted});
            }
        }
        clue::write_predictions(records, args.apply_path);
    }
    emit(object.dump(2) + "\n", args.output);
    return 0;
}

struct SimulateArgs {
    int n = 0;
    std::string records_path;
    int k = 5;
    double bias = 0.0;
    double noise_sd = 0.15;
    double flip_prob = 0.0;
    std::uint64_t seed = 0;
    std::string records_output;
    std::string output;
};

int cmd_simulate(const SimulateArgs& args) {
    std::vector<double> truths;
    std::vector<std::string> ids;
    std::vector<clue::DataRecord> records;

    if (!args.records_path.empty()) {
        records = clue::read_records(args.records_path);
        for (const auto& record : records) {
            truths.push_back(record.label);
            ids.push_back(record.id);
        }
    } else {
        if (args.n < 1) {
            throw std::invalid_argument("simulate: need --n >= 1 or --records");
        }
        truths = clue::uniform_labels(args.n, args.seed);
        const clue::Modality cycle[] = {clue::Modality::text, clue::Modality::audio,
                                        clue::Modality::video, clue::Modality::audiovisual};
        const int lengths[] = {10, 300, 1000, 1200};
        for (int i = 0; i < args.n; ++i) {
            clue::DataRecord record;
            record.id = "r" + std::to_string(i);
            record.modality = cycle[i % 4];
            record.length = lengths[i % 4];
            record.label = truths[static_cast<std::size_t>(i)];
            ids.push_back(record.id);
            records.push_back(std::move(record));
        }
    }

    clue::TeacherSpec spec;
    spec.bias = args.bias;
    spec.noise_sd = args.noise_sd;
    spec.flip_prob = args.flip_prob;
    spec.seed = args.seed + 1;
    auto votesets = clue::simulate_teacher(truths, spec, args.k);
    for (std::size_t i = 0; i < votesets.size(); ++i) {
        votesets[i].record_id = ids[i];
    }

    if (!args.records_output.empty()) {
        clue::write_records(records, args.records_output);
    }
    std::ostringstream lines;
    for (const auto& votes : votesets) {
        lines << clue::vote_set_to_json(votes) << "\n";
    }
    emit(lines.str(), args.output);
    return 0;
}

struct TrainArgs {
    int n_examples = 200;
    int feature_dim = 4;
    double noise_sd = 0.0;
    int n_pos = 0;
    int n_neg = 0;
    double learning_rate = 15.0;
    int epochs = 50;
    int batch_size = 1;
    double sigma = 0.05;
    int n_bins = 100;
    std::uint64_t seed = 0;
    std::string params_output;
    std::string output;
};

int cmd_train(const TrainArgs& args) {
    std::vector<double> labels;
    if (args.n_pos > 0 || args.n_neg > 0) {
        labels = clue::two_class_labels(args.n_pos, args.n_neg, args.seed);
    } else {
        labels = clue::uniform_labels(args.n_examples, args.seed);
    }
    const clue::FeatureMap map =
        clue::make_feature_map(args.feature_dim, args.noise_sd, args.seed + 1);
    const auto data = clue::sample_examples(map, labels, args.seed + 2);

    clue::TrainConfig config;
    config.learning_rate = args.learning_rate;
    config.epochs = args.epochs;
    config.seed = args.seed + 3;
    config.sigma = args.sigma;
    config.batch_size = args.batch_size;

    const clue::Binning binning = clue::make_binning(args.n_bins);
    const clue::HeadParams params = clue::train(config, data, binning);

    double abs_error = 0.0;
    double decoded_sum = 0.0;
    for (const auto& example : data) {
        const double decoded =
            clue::decode_estimate(clue::forward(params, binning, example.features));
        abs_error += std::abs(decoded - example.label);
        decoded_sum += decoded;
    }
    const double final_loss =
        clue::kl_loss_and_grad(params, binning, data, config.sigma).loss;

    if (!args.params_output.empty()) {
        clue::save_params(params, args.params_output);
    }
    json object;
    object["n_examples"] = data.size();
    object["epochs"] = config.epochs;
    object["final_loss"] = final_loss;
    object["mean_abs_error"] = abs_error / static_cast<double>(data.size());
    object["mean_decoded"] = decoded_sum / static_cast<double>(data.size());
    emit(object.dump(2) + "\n", args.output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibration toolkit: confidence bins, teacher-vote aggregation, "
                 "calibration metrics, and modality-aware batching over JSONL logs"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool seed_given = false;

    TargetArgs target_args;
    auto* target = app.add_subcommand("target", "print a Gaussian target bin distribution");
    target->add_option("--y", target_args.y, "scalar label in [0, 1]")->required();
    target->add_option("--sigma", target_args.sigma, "target standard deviation");
    target->add_option("--n-bins", target_args.n_bins, "number of confidence bins");
    target->add_option("--output", target_args.output, "write JSON here instead of stdout");

    MetricsArgs metrics_args;
    auto* metrics = app.add_subcommand("metrics", "score a predictions JSONL file");
    metrics->add_option("predictions", metrics_args.predictions_path, "predictions JSONL")
        ->required();
    metrics->add_option("--buckets", metrics_args.buckets, "ECE bucket count");
    metrics->add_option("--threshold", metrics_args.threshold, "binary decision threshold");
    metrics->add_option("--output", metrics_args.output, "write JSON here instead of stdout");

    AggregateArgs aggregate_args;
    auto* aggregate = app.add_subcommand("aggregate", "aggregate teacher vote sets");
    aggregate->add_option("votes", aggregate_args.votes_path, "votes JSONL")->required();
    aggregate->add_option("--strategy", aggregate_args.strategy, "mean | max | first");
    aggregate->add_option("--records", aggregate_args.records_path,
                          "records JSONL supplying labels for the output");
    aggregate->add_flag("--report", aggregate_args.report,
                        "score all strategies against the record labels instead");
    aggregate->add_option("--output", aggregate_args.output,
                          "write JSONL here instead of stdout");

    AgreementArgs agreement_args;
    auto* agreement = app.add_subcommand("agreement", "inter-annotator agreement statistics");
    agreement->add_option("annotations", agreement_args.annotations_path, "annotations JSONL")
        ->required();
    agreement->add_option("--metric", agreement_args.metric,
                          "alpha distance: interval | ordinal | nominal");
    agreement->add_option("--output", agreement_args.output,
                          "write JSON here instead of stdout");

    BatchPlanArgs batch_args;
    auto* batch_plan = app.add_subcommand("batch-plan", "plan training batches");
    batch_plan->add_option("records", batch_args.records_path, "records JSONL")->required();
    batch_plan->add_option("--policy", batch_args.policy,
                           "modality_batched | modality_mixed");
    batch_plan->add_option("--batch-size", batch_args.batch_size, "max records per batch");
    batch_plan->add_option("--ratio", batch_args.ratio,
                           "resample negatives to ratio x positives first");
    batch_plan->add_flag("--stats", batch_args.stats,
                         "print padding statistics instead of the plan");
    batch_plan->add_option("--output", batch_args.output,
                           "write JSONL here instead of stdout");

    TempScaleArgs temp_args;
    auto* temp_scale =
        app.add_subcommand("temp-scale", "fit or apply temperature scaling on logits");
    temp_scale->add_option("predictions", temp_args.predictions_path,
                           "predictions JSONL with logits")
        ->required();
    double fixed_t = 0.0;
    auto* t_option = temp_scale->add_option("--t", fixed_t, "apply this temperature directly");
    temp_scale->add_option("--apply", temp_args.apply_path,
                           "write rescaled predictions JSONL here");
    temp_scale->add_option("--output", temp_args.output, "write JSON here instead of stdout");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "sample votes from a noisy teacher");
    simulate->add_option("--n", simulate_args.n, "number of synthetic records");
    simulate->add_option("--records", simulate_args.records_path,
                         "records JSONL providing ground-truth labels");
    simulate->add_option("--k", simulate_args.k, "votes per record");
    simulate->add_option("--bias", simulate_args.bias, "teacher bias");
    simulate->add_option("--noise-sd", simulate_args.noise_sd, "vote noise");
    simulate->add_option("--flip-prob", simulate_args.flip_prob,
                         "probability of a wrong-side vote");
    simulate->add_option("--records-output", simulate_args.records_output,
                         "write the generated records JSONL here");
    simulate->add_option("--output", simulate_args.output,
                         "write votes JSONL here instead of stdout");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train the softmax head on the synthetic task");
    train->add_option("--n-examples", train_args.n_examples, "dataset size (uniform labels)");
    train->add_option("--pos", train_args.n_pos, "positive count (two-class labels)");
    train->add_option("--neg", train_args.n_neg, "negative count (two-class labels)");
    train->add_option("--feature-dim", train_args.feature_dim, "feature dimension");
    train->add_option("--noise-sd", train_args.noise_sd, "feature noise");
    train->add_option("--lr", train_args.learning_rate, "learning rate");
    train->add_option("--epochs", train_args.epochs, "training epochs");
    train->add_option("--batch-size", train_args.batch_size, "mini-batch size");
    train->add_option("--sigma", train_args.sigma, "target Gaussian sigma");
    train->add_option("--n-bins", train_args.n_bins, "number of confidence bins");
    train->add_option("--params-output", train_args.params_output,
                      "write trained parameters JSON here");
    train->add_option("--output", train_args.output, "write JSON here instead of stdout");

    for (auto* sub : {target, metrics, aggregate, agreement, batch_plan, temp_scale, simulate,
                      train}) {
        sub->add_option("--seed", seed, "random seed (overrides CLUE_SEED)")
            ->each([&](const std::string&) { seed_given = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (!seed_given) {
            seed = env_default_seed();
        }
        batch_args.seed = seed;
        simulate_args.seed = seed;
        train_args.seed = seed;
        if (*t_option) {
            temp_args.fixed_t = fixed_t;
        }

        if (target->parsed()) return cmd_target(target_args);
        if (metrics->parsed()) return cmd_metrics(metrics_args);
        if (aggregate->parsed()) return cmd_aggregate(aggregate_args);
        if (agreement->parsed()) return cmd_agreement(agreement_args);
        if (batch_plan->parsed()) return cmd_batch_plan(batch_args);
        if (temp_scale->parsed()) return cmd_temp_scale(temp_args);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (train->parsed()) return cmd_train(train_args);
        return kExitUsage;
    } catch (const clue::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
