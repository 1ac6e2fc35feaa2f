#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/metrics.hpp"
#include "driftwatch/numeric.hpp"

namespace driftwatch {

/// Accuracy-drop tolerance for one deployment domain, in percentage
/// points.
struct IndustryProfile {
    std::string name;
    double threshold_points = 0.0;
};

/// The four stock profiles; override via config for other domains.
inline std::vector<IndustryProfile> default_industry_profiles() {
    return {{"customer_service", 5.0},
            {"financial_trading", 3.0},
            {"medical_nlp", 2.0},
            {"brand_monitoring", 8.0}};
}

enum class BreachSeverity { WithinThreshold, Breach, High, Critical };

inline std::string_view breach_severity_name(BreachSeverity s) {
    switch (s) {
        case BreachSeverity::WithinThreshold: return "within-threshold";
        case BreachSeverity::Breach: return "breach";
        case BreachSeverity::High: return "high";
        case BreachSeverity::Critical: return "critical";
    }
    fail("unreachable severity");
}

struct BreachResult {
    IndustryProfile profile;
    double multiplier = 0.0;         ///< exact drop/threshold ratio
    double multiplier_rounded = 0.0; ///< half-up to 1 decimal, for display
    BreachSeverity severity = BreachSeverity::WithinThreshold;
};

inline double round_half_up_1dp(double x) { return std::floor(x * 10.0 + 0.5) / 10.0; }

/// Scores a drop against each profile's tolerance. Severity is decided
/// on the exact multiplier, not the rounded one: at or past 4x the
/// tolerance is critical, 2x high, 1x a plain breach.
inline std::vector<BreachResult> industry_breach(double drop_points,
                                                 std::span<const IndustryProfile> profiles) {
    if (drop_points < 0.0) fail("industry_breach: negative drop");
    std::vector<BreachResult> results;
    results.reserve(profiles.size());
    for (const auto& profile : profiles) {
        if (profile.threshold_points <= 0.0) {
            fail("industry_breach: non-positive threshold for profile '" + profile.name + "'");
        }
        BreachResult r;
        r.profile = profile;
        r.multiplier = drop_points / profile.threshold_points;
        r.multiplier_rounded = round_half_up_1dp(r.multiplier);
        if (r.multiplier >= 4.0) r.severity = BreachSeverity::Critical;
        else if (r.multiplier >= 2.0) r.severity = BreachSeverity::High;
        else if (r.multiplier >= 1.0) r.severity = BreachSeverity::Breach;
        else r.severity = BreachSeverity::WithinThreshold;
        results.push_back(std::move(r));
    }
    return results;
}

/// One metric that crossed the detection rule. z is absent when the
/// baseline had zero day-to-day variance (absolute arm only).
struct TriggerMetric {
    MetricId metric = MetricId::MeanConfidence;
    std::optional<double> z;
    double deviation_points = 0.0; ///< direction-aware window deviation × 100
    bool zero_variance_baseline = false;
};

struct DetectionParams {
    double z_threshold = 2.0;
    double min_abs_drop = 2.0;   ///< percentage-point floor on the deviation
    std::size_t min_pre_days = 3; ///< qualifying baseline days needed per metric
};

struct DriftVerdict {
    std::string event_name;
    bool detected = false;
    std::vector<TriggerMetric> trigger_metrics;
    std::optional<DropResult> max_drop; ///< headline drop (accuracy when labeled)
    std::vector<BreachResult> breaches;
    std::vector<std::string> notes;
};

namespace detail {

/// Metrics whose failure mode is a fall vs. a climb.
inline constexpr MetricId kDownMetrics[] = {MetricId::MeanConfidence, MetricId::Pcs,
                                            MetricId::Accuracy};
inline constexpr MetricId kUpMetrics[] = {MetricId::Ced, MetricId::Str};

inline std::vector<double> qualifying_values(const std::vector<BinMetrics>& window,
                                             MetricId metric, std::size_t min_bin_size) {
    std::vector<double> values;
    for (const auto& m : window) {
        if (m.n < min_bin_size) continue;
        const auto v = metric_value(m, metric);
        if (v) values.push_back(*v);
    }
    return values;
}

} // namespace detail

/// Applies the drift rule to one event: a metric triggers when some
/// during-event day sits z_threshold sample deviations past the
/// baseline-day mean in its failure direction, and the window-level
/// deviation clears the absolute floor. A flat baseline (σ = 0) falls
/// back to the absolute arm alone, flagged per trigger and in notes.
inline DriftVerdict detect_drift(const EventSeries& series, const DetectionParams& params = {},
                                 std::span<const IndustryProfile> profiles = {}) {
    DriftVerdict verdict;
    verdict.event_name = series.config.name;

    std::size_t qualifying_pre = 0;
    for (const auto& m : series.pre) {
        if (m.n >= series.min_bin_size) ++qualifying_pre;
    }
    if (qualifying_pre < params.min_pre_days) {
        fail("event '" + series.config.name + "': need at least " +
             std::to_string(params.min_pre_days) + " qualifying baseline days, have " +
             std::to_string(qualifying_pre));
    }

    const auto evaluate = [&](MetricId metric, bool upward) {
        const auto pre = detail::qualifying_values(series.pre, metric, series.min_bin_size);
        if (pre.size() < params.min_pre_days) {
            if (metric == MetricId::Accuracy || metric == MetricId::Str) return; // optional input
            fail("event '" + series.config.name + "': metric '" +
                 std::string(metric_name(metric)) + "' has too few baseline days");
        }
        const auto during =
            detail::qualifying_values(series.during, metric, series.min_bin_size);
        if (during.empty()) return;

        const double mu = mean(pre);
        const double sigma = sample_stddev(pre);
        double best_dev = 0.0; // most extreme during-day deviation, failure direction
        for (const double v : during) {
            best_dev = std::max(best_dev, upward ? v - mu : mu - v);
        }
        // Window-level deviation over during ∪ post, in points.
        const double window_dev = upward ? max_rise(series, metric).rise_points
                                         : max_drop(series, metric).drop_points;

        if (sigma > 0.0) {
            const double z = best_dev / sigma;
            if (z >= params.z_threshold && window_dev >= params.min_abs_drop) {
                verdict.trigger_metrics.push_back({metric, z, window_dev, false});
            }
        } else if (best_dev > 0.0 && window_dev >= params.min_abs_drop) {
            verdict.trigger_metrics.push_back({metric, std::nullopt, window_dev, true});
            verdict.notes.push_back("zero-variance baseline for metric '" +
                                    std::string(metric_name(metric)) + "'");
        }
    };
    for (const auto metric : detail::kDownMetrics) evaluate(metric, false);
    for (const auto metric : detail::kUpMetrics) evaluate(metric, true);
    verdict.detected = !verdict.trigger_metrics.empty();

    // Headline drop: accuracy when ground truth exists, otherwise the
    // worse of the always-present proxies.
    const auto try_drop = [&](MetricId metric) -> std::optional<DropResult> {
        try {
            return max_drop(series, metric);
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    if (auto acc = try_drop(MetricId::Accuracy)) {
        verdict.max_drop = std::move(acc);
    } else {
        auto conf = try_drop(MetricId::MeanConfidence);
        auto pcs = try_drop(MetricId::Pcs);
        if (conf && (!pcs || conf->drop_points >= pcs->drop_points)) {
            verdict.max_drop = std::move(conf);
        } else if (pcs) {
            verdict.max_drop = std::move(pcs);
        } else {
            verdict.notes.push_back("no qualifying during/post days; drop unavailable");
        }
    }
    if (verdict.max_drop && !profiles.empty()) {
        verdict.breaches =
            industry_breach(std::max(0.0, verdict.max_drop->drop_points), profiles);
    }
    return verdict;
}

/// Fraction of events flagged as drifted.
inline double detection_rate(std::span<const DriftVerdict> verdicts) {
    if (verdicts.empty()) fail("detection_rate: no verdicts");
    std::size_t detected = 0;
    for (const auto& v : verdicts) {
        if (v.detected) ++detected;
    }
    return static_cast<double>(detected) / static_cast<double>(verdicts.size());
}

} // namespace driftwatch
