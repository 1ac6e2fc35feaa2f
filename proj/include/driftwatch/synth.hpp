#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftwatch/dates.hpp"
#include "driftwatch/numeric.hpp"
#include "driftwatch/record.hpp"
#include "driftwatch/rng.hpp"

namespace driftwatch {

/// What changes inside the event window, relative to baseline. Zeroed
/// fields leave the stream stationary.
struct DriftSpec {
    double confidence_delta = 0.0; ///< added to the confidence mean
    double accuracy_delta = 0.0;   ///< added to the accuracy rate
    std::vector<double> label_shift; ///< replacement label distribution (empty = keep)
    double transition_boost = 0.0; ///< probability of flipping a repeated label
    double vocab_shift = 0.0;      ///< share of tokens drawn from the alternate vocabulary
};

/// Full recipe for a synthetic prediction stream. Day indices are
/// 0-based offsets from start_day; the event window is inclusive.
struct SynthConfig {
    int n_days = 60;
    int records_per_day = 50;
    std::vector<std::size_t> records_per_day_list; ///< overrides the scalar when non-empty
    std::vector<std::string> labels = {"negative", "neutral", "positive"};
    std::vector<double> baseline_label_probs = {0.45, 0.30, 0.25};
    double baseline_confidence_mean = 0.85;
    double baseline_confidence_std = 0.08;
    double baseline_accuracy = 0.90;
    int event_start = 30;
    int event_end = 36;
    DriftSpec drift;
    std::uint64_t seed = 42;
    CivilDate start_day{2020, 1, 1};
    bool emit_class_probs = true;
    bool emit_text = false;
    int tokens_per_text = 8;
    int vocab_size = 50;
    bool emit_embeddings = false;
    int embedding_dim = 16;
};

namespace detail {

inline void check_distribution(const std::vector<double>& probs, std::size_t k,
                               const std::string& field) {
    if (probs.size() != k) {
        fail_config(field + " must have one entry per label (" + std::to_string(k) + ")");
    }
    double sum = 0.0;
    for (const double p : probs) {
        if (p < 0.0) fail_config(field + " has a negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) fail_config(field + " must sum to 1");
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Stable unit vector for a token, derived from its hash. Text and
/// embeddings stay consistent with each other without any model.
inline std::vector<double> token_vector(std::string_view token, int dim) {
    SplitMix64 rng(fnv1a64(token));
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = rng.next_normal(0.0, 1.0);
    const double norm = l2_norm(v);
    for (auto& x : v) x /= norm;
    return v;
}

} // namespace detail

inline void validate_synth_config(const SynthConfig& config) {
    if (config.n_days < 1) fail_config("n_days must be >= 1");
    if (config.records_per_day_list.empty()) {
        if (config.records_per_day < 1) fail_config("records_per_day must be >= 1");
    } else if (config.records_per_day_list.size() != static_cast<std::size_t>(config.n_days)) {
        fail_config("records_per_day list length must equal n_days");
    }
    const std::size_t k = config.labels.size();
    if (k < 2) fail_config("labels must contain at least 2 entries");
    detail::check_distribution(config.baseline_label_probs, k, "baseline_label_probs");
    if (config.baseline_confidence_mean <= 0.0 || config.baseline_confidence_mean > 1.0) {
        fail_config("baseline_confidence_mean out of (0, 1]");
    }
    if (config.baseline_confidence_std < 0.0) fail_config("baseline_confidence_std negative");
    if (config.baseline_accuracy < 0.0 || config.baseline_accuracy > 1.0) {
        fail_config("baseline_accuracy out of [0, 1]");
    }
    if (config.event_start < 0 || config.event_end >= config.n_days ||
        config.event_end < config.event_start) {
        fail_config("event window (event_start, event_end) out of [0, n_days)");
    }
    const double event_conf = config.baseline_confidence_mean + config.drift.confidence_delta;
    if (event_conf <= 0.0 || event_conf > 1.0) {
        fail_config("confidence_delta pushes the confidence mean out of (0, 1]");
    }
    const double event_acc = config.baseline_accuracy + config.drift.accuracy_delta;
    if (event_acc < 0.0 || event_acc > 1.0) {
        fail_config("accuracy_delta pushes accuracy out of [0, 1]");
    }
    if (!config.drift.label_shift.empty()) {
        detail::check_distribution(config.drift.label_shift, k, "label_shift");
    }
    if (config.drift.transition_boost < 0.0 || config.drift.transition_boost > 1.0) {
        fail_config("transition_boost out of [0, 1]");
    }
    if (config.drift.vocab_shift < 0.0 || config.drift.vocab_shift > 1.0) {
        fail_config("vocab_shift out of [0, 1]");
    }
    if (config.emit_text || config.emit_embeddings) {
        if (config.tokens_per_text < 1) fail_config("tokens_per_text must be >= 1");
        if (config.vocab_size < 1) fail_config("vocab_size must be >= 1");
    }
    if (config.emit_embeddings && config.embedding_dim < 2) {
        fail_config("embedding_dim must be >= 2");
    }
}

/// Per-day record counts with the scalar/list override resolved.
inline std::vector<std::size_t> per_day_counts(const SynthConfig& config) {
    if (!config.records_per_day_list.empty()) return config.records_per_day_list;
    return std::vector<std::size_t>(static_cast<std::size_t>(config.n_days),
                                    static_cast<std::size_t>(config.records_per_day));
}

/// Draws the whole stream from one sequential generator. Baseline
/// parameters apply outside [event_start, event_end]; drifted ones
/// inside. True labels are always emitted so accuracy stays
/// measurable end-to-end.
inline Dataset generate_stream(const SynthConfig& config) {
    validate_synth_config(config);
    const LabelSet label_set(config.labels);
    const std::size_t k = config.labels.size();
    const auto counts = per_day_counts(config);
    const std::int64_t day0 = days_from_civil(config.start_day.year, config.start_day.month,
                                               config.start_day.day);

    SplitMix64 rng(config.seed);
    std::vector<PredictionRecord> records;
    std::string prev_label;
    for (int day = 0; day < config.n_days; ++day) {
        const bool in_event = day >= config.event_start && day <= config.event_end;
        const double conf_mean = config.baseline_confidence_mean +
                                 (in_event ? config.drift.confidence_delta : 0.0);
        const double accuracy =
            config.baseline_accuracy + (in_event ? config.drift.accuracy_delta : 0.0);
        const auto& label_probs = in_event && !config.drift.label_shift.empty()
                                      ? config.drift.label_shift
                                      : config.baseline_label_probs;
        const double transition_boost = in_event ? config.drift.transition_boost : 0.0;
        const double vocab_shift = in_event ? config.drift.vocab_shift : 0.0;

        const std::size_t n_d = counts[static_cast<std::size_t>(day)];
        for (std::size_t i = 0; i < n_d; ++i) {
            PredictionRecord r;
            r.timestamp = (day0 + day) * 86400 +
                          static_cast<std::int64_t>(i * 86400 / n_d);

            std::size_t label_idx = rng.next_categorical(label_probs);
            if (!prev_label.empty() && config.labels[label_idx] == prev_label &&
                transition_boost > 0.0 && rng.next_double() < transition_boost) {
                // Redraw uniformly among the other labels to force a flip.
                std::size_t other = rng.next_index(k - 1);
                if (other >= label_idx) ++other;
                label_idx = other;
            }
            r.predicted_label = config.labels[label_idx];
            prev_label = r.predicted_label;

            const double raw = rng.next_normal(conf_mean, config.baseline_confidence_std);
            r.confidence = std::min(std::max(raw, 1e-6), 1.0);

            if (rng.next_double() < accuracy) {
                r.true_label = r.predicted_label;
            } else {
                std::size_t wrong = rng.next_index(k - 1);
                if (wrong >= label_idx) ++wrong;
                r.true_label = config.labels[wrong];
            }

            // class_probs spread the leftover mass evenly; skipped when
            // the confidence is too low to keep the predicted label the
            // argmax.
            if (config.emit_class_probs &&
                r.confidence > 1.0 / static_cast<double>(k) + 1e-9) {
                const double rest = (1.0 - r.confidence) / static_cast<double>(k - 1);
                for (std::size_t j = 0; j < k; ++j) {
                    r.class_probs[config.labels[j]] = j == label_idx ? r.confidence : rest;
                }
            }

            if (config.emit_text || config.emit_embeddings) {
                std::string text;
                std::vector<double> embedding(
                    config.emit_embeddings ? static_cast<std::size_t>(config.embedding_dim) : 0,
                    0.0);
                for (int t = 0; t < config.tokens_per_text; ++t) {
                    const bool alt = vocab_shift > 0.0 && rng.next_double() < vocab_shift;
                    const std::string token = (alt ? "vb" : "va") +
                                              std::to_string(rng.next_index(
                                                  static_cast<std::size_t>(config.vocab_size)));
                    if (!text.empty()) text += ' ';
                    text += token;
                    if (config.emit_embeddings) {
                        const auto tv = detail::token_vector(token, config.embedding_dim);
                        for (std::size_t d = 0; d < embedding.size(); ++d) {
                            embedding[d] += tv[d];
                        }
                    }
                }
                if (config.emit_text) r.text = std::move(text);
                if (config.emit_embeddings) {
                    const double norm = l2_norm(embedding);
                    if (norm > 0.0) {
                        for (auto& x : embedding) x /= norm;
                    }
                    r.embedding = std::move(embedding);
                }
            }
            records.push_back(std::move(r));
        }
    }
    return make_dataset(std::move(records), label_set, "synthetic");
}

} // namespace driftwatch
