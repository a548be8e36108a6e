#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clue {

enum class Modality { text, audio, video, audiovisual };

Modality parse_modality(const std::string& name);
std::string to_string(Modality modality);

// One training record: modality tag, token/frame length, scalar label.
struct DataRecord {
    std::string id;
    Modality modality = Modality::text;
    int length = 1;
    double label = 0.0;
};

// Positive mixture class: label >= 0.5.
inline bool is_positive(const DataRecord& record) {
    return record.label >= 0.5;
}

enum class BatchPolicy { modality_batched, modality_mixed };

BatchPolicy parse_batch_policy(const std::string& name);
std::string to_string(BatchPolicy policy);

struct BatchPlan {
    std::vector<std::vector<std::string>> batches;          // record ids
    std::vector<std::optional<Modality>> batch_modalities;  // set under modality_batched
    BatchPolicy policy = BatchPolicy::modality_mixed;
    int batch_size = 1;
};

// modality_batched: partition by modality, shuffle each partition, chunk,
// then shuffle batch emission order so modalities interleave across steps.
// modality_mixed: shuffle everything together and chunk. Last partial
// batches are emitted undersized. Deterministic given seed.
BatchPlan plan_batches(std::span<const DataRecord> records, BatchPolicy policy, int batch_size,
                       std::uint64_t seed);

// Share of slot space (batch max length x batch count) consumed by padding.
double padding_fraction(const BatchPlan& plan, std::span<const DataRecord> records);

// Keeps every positive record and resamples negatives to ratio x positives
// (rounded to nearest), with replacement when the pool is short.
std::vector<DataRecord> resample_mixture(std::span<const DataRecord> records, double ratio,
                                         std::uint64_t seed);

} // namespace clue
