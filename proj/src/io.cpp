#include "clue/io.hpp"

#include <fstream>
#include <functional>

#include <json.hpp>

namespace clue {

namespace {

using nlohmann::json;

// Streams a JSONL file line by line, handing each parsed object to sink.
// Whitespace-only lines are skipped; line numbers are 1-based.
void for_each_object(const std::string& path,
                     const std::function<void(const json&, int)>& sink) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ValidationError(path, 0, "-", "cannot open file");
    }
    std::string line;
    int line_no = 0;
    int seen = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json object;
        try {
            object = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(path, line_no, "-", std::string("invalid JSON: ") + e.what());
        }
        if (!object.is_object()) {
            throw ValidationError(path, line_no, "-", "line is not a JSON object");
        }
        sink(object, line_no);
        ++seen;
    }
    if (seen == 0) {
        throw ValidationError(path, 0, "-", "file contains no records");
    }
}

std::string require_string(const json& object, const char* field, const std::string& path,
                           int line) {
    if (!object.contains(field)) {
        throw ValidationError(path, line, field, "missing required field");
    }
    if (!object[field].is_string()) {
        throw ValidationError(path, line, field, "must be a string");
    }
    return object[field].get<std::string>();
}

double require_unit_number(const json& object, const char* field, const std::string& path,
                           int line) {
    if (!object.contains(field)) {
        throw ValidationError(path, line, field, "missing required field");
    }
    if (!object[field].is_number()) {
        throw ValidationError(path, line, field, "must be a number");
    }
    const double value = object[field].get<double>();
    if (value < 0.0 || value > 1.0) {
        throw ValidationError(path, line, field, "must lie in [0, 1]");
    }
    return value;
}

} // namespace

std::vector<PredictionRecord> read_predictions(const std::string& path) {
    std::vector<PredictionRecord> out;
    for_each_object(path, [&](const json& object, int line) {
        PredictionRecord record;
        record.id = require_string(object, "id", path, line);
        record.pred = require_unit_number(object, "pred", path, line);
        record.label = require_unit_number(object, "label", path, line);
        if (object.contains("logits")) {
            if (!object["logits"].is_array() || object["logits"].empty()) {
                throw ValidationError(path, line, "logits", "must be a non-empty array");
            }
            for (const auto& z : object["logits"]) {
                if (!z.is_number()) {
                    throw ValidationError(path, line, "logits", "entries must be numbers");
                }
                record.logits.push_back(z.get<double>());
            }
        }
        out.push_back(std::move(record));
    });
    return out;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
    std::vector<AnnotationRecord> out;
    for_each_object(path, [&](const json& object, int line) {
        AnnotationRecord record;
        record.item = require_string(object, "item", path, line);
        record.rater = require_string(object, "rater", path, line);
        record.score = require_unit_number(object, "score", path, line);
        out.push_back(std::move(record));
    });
    return out;
}

std::vector<VoteSet> read_votes(const std::string& path) {
    std::vector<VoteSet> out;
    for_each_object(path, [&](const json& object, int line) {
        VoteSet votes;
        votes.record_id = require_string(object, "record_id", path, line);
        if (!object.contains("votes") || !object["votes"].is_array() ||
            object["votes"].empty()) {
            throw ValidationError(path, line, "votes", "must be a non-empty array");
        }
        for (const auto& v : object["votes"]) {
            if (!v.is_number()) {
                throw ValidationError(path, line, "votes", "entries must be numbers");
            }
            const double vote = v.get<double>();
            if (vote < 0.0 || vote > 1.0) {
                throw ValidationError(path, line, "votes", "entries must lie in [0, 1]");
            }
            votes.votes.push_back(vote);
        }
        out.push_back(std::move(votes));
    });
    return out;
}

std::vector<DataRecord> read_records(const std::string& path) {
    std::vector<DataRecord> out;
    for_each_object(path, [&](const json& object, int line) {
        DataRecord record;
        record.id = require_string(object, "id", path, line);
        const std::string modality = require_string(object, "modality", path, line);
        try {
            record.modality = parse_modality(modality);
        } catch (const std::invalid_argument&) {
            throw ValidationError(path, line, "modality",
                                  "must be one of text|audio|video|audiovisual");
        }
        if (!object.contains("length") || !object["length"].is_number_integer()) {
            throw ValidationError(path, line, "length", "must be an integer");
        }
        record.length = object["length"].get<int>();
        if (record.length < 1) {
            throw ValidationError(path, line, "length", "must be >= 1");
        }
        record.label = require_unit_number(object, "label", path, line);
        out.push_back(std::move(record));
    });
    return out;
}

std::string prediction_to_json(const PredictionRecord& record) {
    json object;
    object["id"] = record.id;
    object["pred"] = record.pred;
    object["label"] = record.label;
    if (!record.logits.empty()) {
        object["logits"] = record.logits;
    }
    return object.dump();
}

std::string vote_set_to_json(const VoteSet& votes) {
    json object;
    object["record_id"] = votes.record_id;
    object["votes"] = votes.votes;
    return object.dump();
}

std::string data_record_to_json(const DataRecord& record) {
    json object;
    object["id"] = record.id;
    object["modality"] = to_string(record.modality);
    object["length"] = record.length;
    object["label"] = record.label;
    return object.dump();
}

namespace {

template <typename T>
void write_lines(const std::vector<T>& rows, const std::string& path,
                 std::string (*render)(const T&)) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    for (const auto& row : rows) {
        file << render(row) << "\n";
    }
}

} // namespace

void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
    write_lines(records, path, prediction_to_json);
}

void write_votes(const std::vector<VoteSet>& votesets, const std::string& path) {
    write_lines(votesets, path, vote_set_to_json);
}

void write_records(const std::vector<DataRecord>& records, const std::string& path) {
    write_lines(records, path, data_record_to_json);
}

} // namespace clue
