#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "clue/batching.hpp"
#include "clue/consistency.hpp"

namespace clue {

// Schema violation in a JSONL input; message carries file, 1-based line,
// and the offending field.
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& file, int line, const std::string& field,
                    const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": field '" + field + "': " +
                             what),
          file_(file), line_(line), field_(field) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::string file_;
    int line_;
    std::string field_;
};

// {"id": str, "pred": float, "label": float, "logits": [float]?}
struct PredictionRecord {
    std::string id;
    double pred = 0.0;
    double label = 0.0;
    std::vector<double> logits; // empty when absent
};

// {"item": str, "rater": str, "score": float}
struct AnnotationRecord {
    std::string item;
    std::string rater;
    double score = 0.0;
};

std::vector<PredictionRecord> read_predictions(const std::string& path);
std::vector<AnnotationRecord> read_annotations(const std::string& path);
std::vector<VoteSet> read_votes(const std::string& path);
std::vector<DataRecord> read_records(const std::string& path);

std::string prediction_to_json(const PredictionRecord& record);
std::string vote_set_to_json(const VoteSet& votes);
std::string data_record_to_json(const DataRecord& record);

void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path);
void write_votes(const std::vector<VoteSet>& votesets, const std::string& path);
void write_records(const std::vector<DataRecord>& records, const std::string& path);

} // namespace clue
