#include "clue/batching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "clue/rng.hpp"

namespace clue {

Modality parse_modality(const std::string& name) {
    if (name == "text") return Modality::text;
    if (name == "audio") return Modality::audio;
    if (name == "video") return Modality::video;
    if (name == "audiovisual") return Modality::audiovisual;
    throw std::invalid_argument("unknown modality: " + name);
}

std::string to_string(Modality modality) {
    switch (modality) {
    case Modality::text: return "text";
    case Modality::audio: return "audio";
    case Modality::video: return "video";
    case Modality::audiovisual: return "audiovisual";
    }
    return "unknown";
}

BatchPolicy parse_batch_policy(const std::string& name) {
    if (name == "modality_batched") return BatchPolicy::modality_batched;
    if (name == "modality_mixed") return BatchPolicy::modality_mixed;
    throw std::invalid_argument("unknown batch policy: " + name);
}

std::string to_string(BatchPolicy policy) {
    return policy == BatchPolicy::modality_batched ? "modality_batched" : "modality_mixed";
}

namespace {

void validate_records(std::span<const DataRecord> records) {
    if (records.empty()) {
        throw std::invalid_argument("plan_batches: no records");
    }
    for (const auto& record : records) {
        if (record.length < 1) {
            throw std::invalid_argument("record " + record.id + ": length must be >= 1");
        }
        if (record.label < 0.0 || record.label > 1.0) {
            throw std::invalid_argument("record " + record.id + ": label must lie in [0, 1]");
        }
    }
}

std::vector<std::vector<std::string>> chunk(const std::vector<std::string>& ids,
                                            int batch_size) {
    std::vector<std::vector<std::string>> out;
    for (std::size_t start = 0; start < ids.size(); start += batch_size) {
        const std::size_t end = std::min(ids.size(), start + batch_size);
        out.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                         ids.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
}

} // namespace

BatchPlan plan_batches(std::span<const DataRecord> records, BatchPolicy policy, int batch_size,
                       std::uint64_t seed) {
    validate_records(records);
    if (batch_size < 1) {
        throw std::invalid_argument("plan_batches: batch_size must be >= 1");
    }

    BatchPlan plan;
    plan.policy = policy;
    plan.batch_size = batch_size;
    Rng rng(seed);

    if (policy == BatchPolicy::modality_mixed) {
        std::vector<std::string> ids;
        ids.reserve(records.size());
        for (const auto& record : records) {
            ids.push_back(record.id);
        }
        rng.shuffle(ids);
        plan.batches = chunk(ids, batch_size);
        plan.batch_modalities.assign(plan.batches.size(), std::nullopt);
        return plan;
    }

    // Partition by modality in a fixed order, shuffle within each partition,
    // chunk, then shuffle the emission order of all batches.
    std::map<Modality, std::vector<std::string>> partitions;
    for (const auto& record : records) {
        partitions[record.modality].push_back(record.id);
    }
    std::vector<std::pair<std::vector<std::string>, Modality>> batches;
    for (auto& [modality, ids] : partitions) {
        rng.shuffle(ids);
        for (auto& batch : chunk(ids, batch_size)) {
            batches.emplace_back(std::move(batch), modality);
        }
    }
    rng.shuffle(batches);
    for (auto& [ids, modality] : batches) {
        plan.batches.push_back(std::move(ids));
        plan.batch_modalities.emplace_back(modality);
    }
    return plan;
}

double padding_fraction(const BatchPlan& plan, std::span<const DataRecord> records) {
    std::unordered_map<std::string, int> lengths;
    lengths.reserve(records.size());
    for (const auto& record : records) {
        lengths[record.id] = record.length;
    }
    double slots = 0.0;
    double content = 0.0;
    for (const auto& batch : plan.batches) {
        if (batch.empty()) {
            continue;
        }
        long long max_len = 0;
        long long batch_content = 0;
        for (const auto& id : batch) {
            const auto it = lengths.find(id);
            if (it == lengths.end()) {
                throw std::invalid_argument("padding_fraction: unknown record id " + id);
            }
            max_len = std::max<long long>(max_len, it->second);
            batch_content += it->second;
        }
        slots += static_cast<double>(max_len) * static_cast<double>(batch.size());
        content += static_cast<double>(batch_content);
    }
    if (slots == 0.0) {
        throw std::invalid_argument("padding_fraction: plan has no batches");
    }
    return (slots - content) / slots;
}

std::vector<DataRecord> resample_mixture(std::span<const DataRecord> records, double ratio,
                                         std::uint64_t seed) {
    validate_records(records);
    if (!(ratio > 0.0)) {
        throw std::invalid_argument("resample_mixture: ratio must be positive");
    }
    std::vector<DataRecord> positives;
    std::vector<DataRecord> negatives;
    for (const auto& record : records) {
        (is_positive(record) ? positives : negatives).push_back(record);
    }
    if (positives.empty() || negatives.empty()) {
        throw std::invalid_argument("resample_mixture: both classes must be present");
    }

    const auto target = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(positives.size())));

    Rng rng(seed);
    std::vector<DataRecord> out = positives;
    if (target >= negatives.size()) {
        // Keep the whole pool, then top up with replacement if needed.
        out.insert(out.end(), negatives.begin(), negatives.end());
        for (std::size_t i = negatives.size(); i < target; ++i) {
            out.push_back(negatives[static_cast<std::size_t>(rng.integer(negatives.size()))]);
        }
        return out;
    }
    // Seeded partial Fisher-Yates draw without replacement.
    std::vector<std::size_t> indices(negatives.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < target; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.integer(indices.size() - i));
        std::swap(indices[i], indices[j]);
        out.push_back(negatives[indices[i]]);
    }
    return out;
}

} // namespace clue
