#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftwatch/common.hpp"
#include "driftwatch/dates.hpp"

namespace driftwatch {

/// Fixed, ordered label vocabulary for a run. Ordering is part of the run
/// configuration and never changes after construction.
class LabelSet {
public:
    explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.size() < 2) fail("label set needs at least 2 labels");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (!index_.emplace(labels_[i], i).second) {
                fail("duplicate label '" + labels_[i] + "' in label set");
            }
        }
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& at(std::size_t i) const { return labels_[i]; }

    std::optional<std::size_t> index_of(std::string_view label) const {
        const auto it = index_.find(label);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view label) const { return index_.count(label) > 0; }

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// One inference event from a prediction log. Optional fields stay empty
/// when the log did not carry them; consumers skip such records and report
/// the skip counts.
struct PredictionRecord {
    std::int64_t timestamp = 0;                 // UTC seconds since epoch
    std::string predicted_label;
    double confidence = 0.0;                    // in (0, 1]
    std::map<std::string, double> class_probs;  // empty when absent
    std::optional<std::string> true_label;
    std::vector<double> embedding;              // empty when absent
    std::optional<std::string> text;
    std::optional<std::string> source_id;
};

/// Checks every record invariant against the label set and returns the
/// record unchanged. Each violated invariant throws a distinct Error.
inline const PredictionRecord& validate_record(const PredictionRecord& r, const LabelSet& labels) {
    if (!(r.confidence > 0.0 && r.confidence <= 1.0) || !std::isfinite(r.confidence)) {
        fail("confidence " + std::to_string(r.confidence) + " out of range (0, 1]");
    }
    if (!labels.contains(r.predicted_label)) {
        fail("unknown label '" + r.predicted_label + "'");
    }
    if (r.true_label && !labels.contains(*r.true_label)) {
        fail("unknown label '" + *r.true_label + "'");
    }
    if (!r.class_probs.empty()) {
        double sum = 0.0;
        double max_p = -1.0;
        for (const auto& [label, p] : r.class_probs) {
            if (!labels.contains(label)) fail("unknown label '" + label + "' in class_probs");
            if (!(p >= 0.0 && p <= 1.0) || !std::isfinite(p)) {
                fail("probability out of range [0, 1] for label '" + label + "'");
            }
            sum += p;
            max_p = std::max(max_p, p);
        }
        if (std::abs(sum - 1.0) > 1e-6) fail("probabilities do not sum to 1");
        const auto it = r.class_probs.find(r.predicted_label);
        const double pred_p = it == r.class_probs.end() ? 0.0 : it->second;
        if (pred_p < max_p - 1e-9) fail("label/argmax mismatch");
    }
    return r;
}

struct DatasetMeta {
    std::string name;
    std::size_t record_count = 0;
    std::int64_t first_timestamp = 0;
    std::int64_t last_timestamp = 0;
};

/// Immutable, time-ordered record collection. Safe to share read-only
/// across threads once built.
class Dataset {
public:
    const std::vector<PredictionRecord>& records() const { return records_; }
    const LabelSet& labels() const { return labels_; }
    const DatasetMeta& meta() const { return meta_; }

    /// Embedding dimension shared by all records carrying one; 0 when none do.
    std::size_t embedding_dim() const { return embedding_dim_; }

    friend Dataset make_dataset(std::vector<PredictionRecord> records, LabelSet labels,
                                std::string name);

private:
    Dataset(std::vector<PredictionRecord> records, LabelSet labels, DatasetMeta meta,
            std::size_t embedding_dim)
        : records_(std::move(records)), labels_(std::move(labels)), meta_(std::move(meta)),
          embedding_dim_(embedding_dim) {}

    std::vector<PredictionRecord> records_;
    LabelSet labels_;
    DatasetMeta meta_;
    std::size_t embedding_dim_ = 0;
};

/// Validates every record, stable-sorts by timestamp (ties keep input
/// order), and enforces one embedding dimension across the dataset.
inline Dataset make_dataset(std::vector<PredictionRecord> records, LabelSet labels,
                            std::string name) {
    if (records.empty()) fail("no records");
    std::size_t dim = 0;
    for (const auto& r : records) {
        validate_record(r, labels);
        if (!r.embedding.empty()) {
            if (dim == 0) {
                dim = r.embedding.size();
            } else if (r.embedding.size() != dim) {
                fail("inconsistent embedding dimension: " + std::to_string(r.embedding.size()) +
                     " vs " + std::to_string(dim));
            }
        }
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const PredictionRecord& a, const PredictionRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    DatasetMeta meta{std::move(name), records.size(), records.front().timestamp,
                     records.back().timestamp};
    return Dataset(std::move(records), std::move(labels), std::move(meta), dim);
}

} // namespace driftwatch
