#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/temporal.hpp"

namespace driftwatch {

/// Per-day summary of a prediction stream: base confidence/accuracy
/// aggregates plus the four zero-training drift signals.
struct BinMetrics {
    std::int64_t day = 0;
    std::size_t n = 0;            ///< records in the bin
    std::size_t n_labeled = 0;    ///< records carrying a true label
    std::size_t n_with_probs = 0; ///< records carrying class_probs
    double mean_confidence = 0.0;
    double confidence_std = 0.0; ///< population standard deviation
    std::optional<double> prediction_entropy_mean; ///< mean H(class_probs), when present
    std::optional<double> accuracy;                ///< absent when no ground truth
    double pcs = 0.0;            ///< majority predicted-label share
    double csi = 0.0;            ///< confidence coefficient of variation
    std::optional<double> str;   ///< adjacent-label flip rate; absent for n < 2
    double ced = 0.0;            ///< mean confidence × label-distribution entropy
    std::map<std::string, std::size_t> label_counts;
};

/// Window-level damage summary for one metric.
struct DropResult {
    std::string metric_name;
    double baseline_value = 0.0;     ///< record-weighted pre-window mean
    double worst_window_value = 0.0; ///< minimum qualifying per-day value after onset
    double drop_points = 0.0;        ///< (baseline − worst) × 100
    std::int64_t worst_day = 0;
};

/// Mirror of DropResult for metrics that degrade upward (ced, str).
struct RiseResult {
    std::string metric_name;
    double baseline_value = 0.0;
    double peak_window_value = 0.0;
    double rise_points = 0.0; ///< (peak − baseline) × 100
    std::int64_t peak_day = 0;
};

enum class MetricId { MeanConfidence, Pcs, Accuracy, Csi, Str, Ced };

inline std::string_view metric_name(MetricId id) {
    switch (id) {
        case MetricId::MeanConfidence: return "mean_confidence";
        case MetricId::Pcs: return "pcs";
        case MetricId::Accuracy: return "accuracy";
        case MetricId::Csi: return "csi";
        case MetricId::Str: return "str";
        case MetricId::Ced: return "ced";
    }
    fail("unreachable metric id");
}

inline MetricId metric_from_name(std::string_view name) {
    if (name == "mean_confidence") return MetricId::MeanConfidence;
    if (name == "pcs") return MetricId::Pcs;
    if (name == "accuracy") return MetricId::Accuracy;
    if (name == "csi") return MetricId::Csi;
    if (name == "str") return MetricId::Str;
    if (name == "ced") return MetricId::Ced;
    fail_config("unknown metric '" + std::string(name) + "'");
}

/// Shannon entropy in bits; 0·log 0 taken as 0. Probabilities are
/// expected to sum to 1, negatives are rejected.
inline double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (const double p : probabilities) {
        if (p < 0.0) fail("negative probability in distribution");
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

inline double shannon_entropy(const std::map<std::string, double>& distribution) {
    std::vector<double> probs;
    probs.reserve(distribution.size());
    for (const auto& [label, p] : distribution) probs.push_back(p);
    return shannon_entropy(probs);
}

namespace detail {

inline std::map<std::string, std::size_t> count_labels(const TemporalBin& bin) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : bin.records) ++counts[r.predicted_label];
    return counts;
}

inline double entropy_of_counts(const std::map<std::string, std::size_t>& counts,
                                std::size_t total) {
    std::vector<double> probs;
    probs.reserve(counts.size());
    for (const auto& [label, c] : counts) {
        probs.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return shannon_entropy(probs);
}

} // namespace detail

/// Share of the bin held by the most common predicted label.
inline double prediction_consistency(const TemporalBin& bin) {
    if (bin.records.empty()) fail("prediction_consistency: empty bin");
    const auto counts = detail::count_labels(bin);
    std::size_t top = 0;
    for (const auto& [label, c] : counts) top = std::max(top, c);
    return static_cast<double>(top) / static_cast<double>(bin.size());
}

/// Coefficient of variation of the bin's confidences, with population
/// standard deviation (divisor n). Single-record bins have zero spread.
inline double confidence_stability(const TemporalBin& bin) {
    if (bin.records.empty()) fail("confidence_stability: empty bin");
    const auto n = static_cast<double>(bin.size());
    double mean = 0.0;
    for (const auto& r : bin.records) mean += r.confidence;
    mean /= n;
    double var = 0.0;
    for (const auto& r : bin.records) {
        const double d = r.confidence - mean;
        var += d * d;
    }
    var /= n;
    return std::sqrt(var) / mean;
}

/// Fraction of adjacent prediction pairs that change label, walking the
/// bin in timestamp order. Undefined (absent) below two records.
inline std::optional<double> sentiment_transition_rate(const TemporalBin& bin) {
    if (bin.size() < 2) return std::nullopt;
    std::size_t flips = 0;
    for (std::size_t i = 0; i + 1 < bin.size(); ++i) {
        if (bin.records[i].predicted_label != bin.records[i + 1].predicted_label) ++flips;
    }
    return static_cast<double>(flips) / static_cast<double>(bin.size() - 1);
}

/// Mean confidence times the entropy of the bin's predicted-label
/// distribution. High values mean the model is confidently scattered.
inline double confidence_entropy_divergence(const TemporalBin& bin) {
    if (bin.records.empty()) fail("confidence_entropy_divergence: empty bin");
    double mean = 0.0;
    for (const auto& r : bin.records) mean += r.confidence;
    mean /= static_cast<double>(bin.size());
    return mean * detail::entropy_of_counts(detail::count_labels(bin), bin.size());
}

/// Computes every per-day metric for one bin in a single pass over the
/// records. Optional inputs (true labels, class_probs) yield optional
/// outputs rather than defaults.
inline BinMetrics bin_summary(const TemporalBin& bin, const LabelSet& label_set) {
    if (bin.records.empty()) fail("bin_summary: empty bin");
    BinMetrics m;
    m.day = bin.day;
    m.n = bin.size();
    m.label_counts = detail::count_labels(bin);
    for (const auto& [label, c] : m.label_counts) {
        if (!label_set.contains(label)) fail("unknown label '" + label + "'");
    }

    double conf_sum = 0.0;
    double entropy_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& r : bin.records) {
        conf_sum += r.confidence;
        if (r.true_label) {
            ++m.n_labeled;
            if (*r.true_label == r.predicted_label) ++correct;
        }
        if (!r.class_probs.empty()) {
            ++m.n_with_probs;
            entropy_sum += shannon_entropy(r.class_probs);
        }
    }
    const auto n = static_cast<double>(m.n);
    m.mean_confidence = conf_sum / n;

    double var = 0.0;
    for (const auto& r : bin.records) {
        const double d = r.confidence - m.mean_confidence;
        var += d * d;
    }
    m.confidence_std = std::sqrt(var / n);

    if (m.n_with_probs > 0) {
        m.prediction_entropy_mean = entropy_sum / static_cast<double>(m.n_with_probs);
    }
    if (m.n_labeled > 0) {
        m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n_labeled);
    }

    std::size_t top = 0;
    for (const auto& [label, c] : m.label_counts) top = std::max(top, c);
    m.pcs = static_cast<double>(top) / n;
    m.csi = m.confidence_std / m.mean_confidence;
    m.str = sentiment_transition_rate(bin);
    m.ced = m.mean_confidence * detail::entropy_of_counts(m.label_counts, m.n);
    return m;
}

/// Per-day metric series split by event window. Days below min_bin_size
/// stay in the series (they still feed record-weighted aggregates) but
/// are skipped wherever a per-day value is compared or ranked.
struct EventSeries {
    EventConfig config;
    std::vector<BinMetrics> pre;
    std::vector<BinMetrics> during;
    std::vector<BinMetrics> post;
    std::size_t min_bin_size = 5;
    bool pre_truncated = false;
    bool post_truncated = false;
};

inline EventSeries summarize_windows(const EventWindows& windows, const LabelSet& label_set,
                                     std::size_t min_bin_size = 5) {
    EventSeries series;
    series.config = windows.config;
    series.min_bin_size = min_bin_size;
    series.pre_truncated = windows.pre_truncated;
    series.post_truncated = windows.post_truncated;
    for (const auto& bin : windows.pre) series.pre.push_back(bin_summary(bin, label_set));
    for (const auto& bin : windows.during) series.during.push_back(bin_summary(bin, label_set));
    for (const auto& bin : windows.post) series.post.push_back(bin_summary(bin, label_set));
    return series;
}

/// Reads one metric out of a day summary; absent when the bin lacked
/// the inputs for it.
inline std::optional<double> metric_value(const BinMetrics& m, MetricId id) {
    switch (id) {
        case MetricId::MeanConfidence: return m.mean_confidence;
        case MetricId::Pcs: return m.pcs;
        case MetricId::Accuracy: return m.accuracy;
        case MetricId::Csi: return m.csi;
        case MetricId::Str: return m.str;
        case MetricId::Ced: return m.ced;
    }
    fail("unreachable metric id");
}

namespace detail {

/// Record-weighted mean of a metric over a window; accuracy weights by
/// labeled count since that is the population the metric describes.
inline std::optional<double> weighted_window_mean(const std::vector<BinMetrics>& window,
                                                  MetricId id) {
    double weighted = 0.0;
    double weight = 0.0;
    for (const auto& m : window) {
        const auto v = metric_value(m, id);
        if (!v) continue;
        const double w = id == MetricId::Accuracy ? static_cast<double>(m.n_labeled)
                                                  : static_cast<double>(m.n);
        weighted += *v * w;
        weight += w;
    }
    if (weight <= 0.0) return std::nullopt;
    return weighted / weight;
}

} // namespace detail

/// Worst-case degradation of a metric after event onset: pre-window
/// record-weighted mean versus the minimum qualifying per-day value in
/// the during and post windows, in percentage points of the raw metric.
/// Earliest day wins ties for worst_day.
inline DropResult max_drop(const EventSeries& series, MetricId metric) {
    const auto baseline = detail::weighted_window_mean(series.pre, metric);
    if (!baseline) {
        fail("metric unavailable: no pre-window data for '" + std::string(metric_name(metric)) +
             "'");
    }
    std::optional<double> worst;
    std::int64_t worst_day = 0;
    for (const auto* window : {&series.during, &series.post}) {
        for (const auto& m : *window) {
            if (m.n < series.min_bin_size) continue;
            const auto v = metric_value(m, metric);
            if (!v) continue;
            if (!worst || *v < *worst) {
                worst = *v;
                worst_day = m.day;
            }
        }
    }
    if (!worst) {
        fail("metric unavailable: no qualifying during/post data for '" +
             std::string(metric_name(metric)) + "'");
    }
    DropResult result;
    result.metric_name = std::string(metric_name(metric));
    result.baseline_value = *baseline;
    result.worst_window_value = *worst;
    result.drop_points = (*baseline - *worst) * 100.0;
    result.worst_day = worst_day;
    return result;
}

inline DropResult max_drop(const EventWindows& windows, const LabelSet& label_set,
                           MetricId metric, std::size_t min_bin_size = 5) {
    return max_drop(summarize_windows(windows, label_set, min_bin_size), metric);
}

/// Upward counterpart of max_drop for metrics whose failure mode is an
/// increase (ced, str).
inline RiseResult max_rise(const EventSeries& series, MetricId metric) {
    const auto baseline = detail::weighted_window_mean(series.pre, metric);
    if (!baseline) {
        fail("metric unavailable: no pre-window data for '" + std::string(metric_name(metric)) +
             "'");
    }
    std::optional<double> peak;
    std::int64_t peak_day = 0;
    for (const auto* window : {&series.during, &series.post}) {
        for (const auto& m : *window) {
            if (m.n < series.min_bin_size) continue;
            const auto v = metric_value(m, metric);
            if (!v) continue;
            if (!peak || *v > *peak) {
                peak = *v;
                peak_day = m.day;
            }
        }
    }
    if (!peak) {
        fail("metric unavailable: no qualifying during/post data for '" +
             std::string(metric_name(metric)) + "'");
    }
    RiseResult result;
    result.metric_name = std::string(metric_name(metric));
    result.baseline_value = *baseline;
    result.peak_window_value = *peak;
    result.rise_points = (*peak - *baseline) * 100.0;
    result.peak_day = peak_day;
    return result;
}

} // namespace driftwatch
