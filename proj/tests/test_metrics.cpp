#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <driftwatch/metrics.hpp>
#include <driftwatch/rng.hpp>

using namespace driftwatch;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

LabelSet sentiment() { return LabelSet({"negative", "neutral", "positive"}); }

TemporalBin bin_of(const std::vector<std::string>& labels, std::vector<double> confidences = {},
                   std::int64_t day = 0) {
    if (confidences.empty()) confidences.assign(labels.size(), 0.8);
    TemporalBin bin;
    bin.day = day;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        PredictionRecord r;
        r.timestamp = day * 86400 + static_cast<std::int64_t>(i);
        r.predicted_label = labels[i];
        r.confidence = confidences[i];
        bin.records.push_back(std::move(r));
    }
    return bin;
}

/// Straight-line recomputation of every BinMetrics field, sharing no code
/// with the library implementation.
struct BinOracle {
    double mean_confidence = 0.0;
    double confidence_std = 0.0;
    bool has_entropy_mean = false;
    double prediction_entropy_mean = 0.0;
    bool has_accuracy = false;
    double accuracy = 0.0;
    double pcs = 0.0;
    double csi = 0.0;
    bool has_str = false;
    double str = 0.0;
    double ced = 0.0;
};

BinOracle recompute(const TemporalBin& bin) {
    BinOracle o;
    const auto n = static_cast<double>(bin.records.size());
    for (const auto& r : bin.records) o.mean_confidence += r.confidence / n;
    for (const auto& r : bin.records) {
        o.confidence_std +=
            (r.confidence - o.mean_confidence) * (r.confidence - o.mean_confidence) / n;
    }
    o.confidence_std = std::sqrt(o.confidence_std);
    o.csi = o.confidence_std / o.mean_confidence;

    std::map<std::string, double> counts;
    for (const auto& r : bin.records) counts[r.predicted_label] += 1.0;
    double top = 0.0;
    double entropy = 0.0;
    for (const auto& [label, c] : counts) {
        top = std::max(top, c);
        entropy -= (c / n) * std::log2(c / n);
    }
    o.pcs = top / n;
    o.ced = o.mean_confidence * entropy;

    if (bin.records.size() >= 2) {
        o.has_str = true;
        double flips = 0.0;
        for (std::size_t i = 0; i + 1 < bin.records.size(); ++i) {
            if (bin.records[i].predicted_label != bin.records[i + 1].predicted_label) {
                flips += 1.0;
            }
        }
        o.str = flips / (n - 1.0);
    }

    double labeled = 0.0;
    double correct = 0.0;
    for (const auto& r : bin.records) {
        if (r.true_label) {
            labeled += 1.0;
            if (*r.true_label == r.predicted_label) correct += 1.0;
        }
    }
    if (labeled > 0.0) {
        o.has_accuracy = true;
        o.accuracy = correct / labeled;
    }

    double with_probs = 0.0;
    double entropy_sum = 0.0;
    for (const auto& r : bin.records) {
        if (r.class_probs.empty()) continue;
        with_probs += 1.0;
        for (const auto& [label, p] : r.class_probs) {
            if (p > 0.0) entropy_sum -= p * std::log2(p);
        }
    }
    if (with_probs > 0.0) {
        o.has_entropy_mean = true;
        o.prediction_entropy_mean = entropy_sum / with_probs;
    }
    return o;
}

TemporalBin random_bin(SplitMix64& rng, std::size_t max_size = 200) {
    const auto labels = std::vector<std::string>{"negative", "neutral", "positive"};
    TemporalBin bin;
    bin.day = static_cast<std::int64_t>(rng.next_index(10000));
    const std::size_t n = 1 + rng.next_index(max_size);
    for (std::size_t i = 0; i < n; ++i) {
        PredictionRecord r;
        r.timestamp = bin.day * 86400 + static_cast<std::int64_t>(i * 3);
        const auto idx = rng.next_index(3);
        r.predicted_label = labels[idx];
        r.confidence = 0.34 + 0.66 * rng.next_double();
        if (rng.next_double() < 0.7) {
            r.true_label = labels[rng.next_index(3)];
        }
        if (rng.next_double() < 0.5) {
            const double rest = (1.0 - r.confidence) / 2.0;
            for (std::size_t j = 0; j < 3; ++j) {
                r.class_probs[labels[j]] = j == idx ? r.confidence : rest;
            }
        }
        bin.records.push_back(std::move(r));
    }
    return bin;
}

EventSeries series_from_days(const std::vector<std::vector<double>>& pre_days,
                             const std::vector<std::vector<double>>& during_days,
                             std::size_t min_bin_size = 1) {
    EventSeries s;
    s.min_bin_size = min_bin_size;
    std::int64_t day = 0;
    const auto push = [&](std::vector<BinMetrics>& window, const std::vector<double>& confs) {
        std::vector<std::string> labels(confs.size(), "positive");
        auto bin = bin_of(labels, confs, day++);
        window.push_back(bin_summary(bin, sentiment()));
    };
    for (const auto& d : pre_days) push(s.pre, d);
    s.config.event_start = day;
    for (const auto& d : during_days) push(s.during, d);
    s.config.event_end = day - 1;
    return s;
}

} // namespace

TEST_CASE("prediction consistency counts the majority share") {
    REQUIRE(prediction_consistency(bin_of({"positive", "positive", "positive", "positive",
                                           "positive"})) == 1.0);
    REQUIRE_THAT(prediction_consistency(bin_of({"positive", "negative", "neutral"})),
                 WithinAbs(1.0 / 3.0, 1e-15));
    REQUIRE_THAT(prediction_consistency(
                     bin_of({"positive", "positive", "negative", "neutral", "positive"})),
                 WithinAbs(0.6, 1e-15));
    REQUIRE_THROWS_WITH(prediction_consistency(TemporalBin{}), ContainsSubstring("empty bin"));
}

TEST_CASE("confidence stability is the population coefficient of variation") {
    REQUIRE(confidence_stability(bin_of({"positive", "positive"}, {0.8, 0.8})) == 0.0);
    REQUIRE_THAT(confidence_stability(bin_of({"positive", "negative"}, {0.5, 1.0})),
                 WithinAbs(1.0 / 3.0, 1e-15)); // sigma 0.25 over mean 0.75
    REQUIRE(confidence_stability(bin_of({"positive"}, {0.9})) == 0.0);
}

TEST_CASE("transition rate walks adjacent pairs and needs two records") {
    REQUIRE(sentiment_transition_rate(bin_of({"positive", "positive", "positive"})) == 0.0);
    REQUIRE(sentiment_transition_rate(
                bin_of({"positive", "negative", "positive", "negative"})) == 1.0);
    REQUIRE_THAT(*sentiment_transition_rate(
                     bin_of({"positive", "positive", "negative", "negative", "positive"})),
                 WithinAbs(0.5, 1e-15));
    REQUIRE_FALSE(sentiment_transition_rate(bin_of({"positive"})).has_value());
}

TEST_CASE("shannon entropy in bits") {
    REQUIRE(shannon_entropy(std::map<std::string, double>{{"positive", 1.0}}) == 0.0);
    REQUIRE_THAT(shannon_entropy(std::map<std::string, double>{{"a", 0.5}, {"b", 0.5}}),
                 WithinAbs(1.0, 1e-15));
    const std::vector<double> uniform3 = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    REQUIRE_THAT(shannon_entropy(uniform3), WithinAbs(1.58496, 5e-6));
    const std::vector<double> with_zero = {0.5, 0.5, 0.0};
    REQUIRE_THAT(shannon_entropy(with_zero), WithinAbs(1.0, 1e-15));
    const std::vector<double> negative = {0.5, 0.6, -0.1};
    REQUIRE_THROWS_WITH(shannon_entropy(negative), ContainsSubstring("negative"));
}

TEST_CASE("confidence-entropy divergence multiplies mean confidence by label entropy") {
    REQUIRE(confidence_entropy_divergence(bin_of({"positive", "positive"}, {0.3, 0.99})) == 0.0);
    REQUIRE_THAT(confidence_entropy_divergence(bin_of({"positive", "negative"}, {1.0, 1.0})),
                 WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(confidence_entropy_divergence(
                     bin_of({"positive", "negative", "neutral"}, {0.8, 0.8, 0.8})),
                 WithinAbs(1.26797, 5e-6)); // 0.8 * log2(3)
}

TEST_CASE("bin_summary basics") {
    auto bin = bin_of({"positive", "negative"}, {0.9, 0.8});
    bin.records[0].true_label = "positive";
    bin.records[1].true_label = "negative";
    const auto m = bin_summary(bin, sentiment());
    REQUIRE(m.accuracy == 1.0);
    REQUIRE(m.n_labeled == 2);

    const auto unlabeled = bin_summary(bin_of({"positive", "negative"}), sentiment());
    REQUIRE_FALSE(unlabeled.accuracy.has_value());
    REQUIRE(unlabeled.n_labeled == 0);

    auto alien = bin_of({"angry"});
    REQUIRE_THROWS_WITH(bin_summary(alien, sentiment()),
                        ContainsSubstring("unknown label 'angry'"));
}

TEST_CASE("bin_summary matches straight-line recomputation on random bins") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 300; ++trial) {
        const auto bin = random_bin(rng);
        const auto m = bin_summary(bin, sentiment());
        const auto o = recompute(bin);
        REQUIRE(m.n == bin.records.size());
        REQUIRE_THAT(m.mean_confidence, WithinAbs(o.mean_confidence, 1e-12));
        REQUIRE_THAT(m.confidence_std, WithinAbs(o.confidence_std, 1e-12));
        REQUIRE_THAT(m.pcs, WithinAbs(o.pcs, 1e-12));
        REQUIRE_THAT(m.csi, WithinAbs(o.csi, 1e-12));
        REQUIRE_THAT(m.ced, WithinAbs(o.ced, 1e-12));
        REQUIRE(m.str.has_value() == o.has_str);
        if (o.has_str) REQUIRE_THAT(*m.str, WithinAbs(o.str, 1e-12));
        REQUIRE(m.accuracy.has_value() == o.has_accuracy);
        if (o.has_accuracy) REQUIRE_THAT(*m.accuracy, WithinAbs(o.accuracy, 1e-12));
        REQUIRE(m.prediction_entropy_mean.has_value() == o.has_entropy_mean);
        if (o.has_entropy_mean) {
            REQUIRE_THAT(*m.prediction_entropy_mean, WithinAbs(o.prediction_entropy_mean, 1e-12));
        }
    }
}

TEST_CASE("metric bounds and invariances hold on randomized bins") {
    SplitMix64 rng(777);
    const std::vector<std::string> labels = {"negative", "neutral", "positive"};
    for (int trial = 0; trial < 2000; ++trial) {
        auto bin = random_bin(rng, 60);
        const auto m = bin_summary(bin, sentiment());

        // PCS bounds over the label vocabulary.
        REQUIRE(m.pcs >= 1.0 / 3.0 - 1e-12);
        REQUIRE(m.pcs <= 1.0 + 1e-12);

        // CED bound and the unanimity equality case.
        REQUIRE(m.ced <= m.mean_confidence * std::log2(3.0) + 1e-12);
        REQUIRE(m.ced >= -1e-12);
        const bool unanimous = m.label_counts.size() == 1;
        if (unanimous) REQUIRE(m.ced == 0.0);
        if (m.ced == 0.0) REQUIRE(unanimous);

        // STR is invariant under a bijective relabel.
        if (bin.records.size() >= 2) {
            auto renamed = bin;
            const std::map<std::string, std::string> swap = {
                {"negative", "positive"}, {"neutral", "negative"}, {"positive", "neutral"}};
            for (auto& r : renamed.records) r.predicted_label = swap.at(r.predicted_label);
            REQUIRE_THAT(*sentiment_transition_rate(renamed),
                         WithinAbs(*sentiment_transition_rate(bin), 1e-15));
            REQUIRE(*m.str >= -1e-12);
            REQUIRE(*m.str <= 1.0 + 1e-12);
        }

        // Shuffling record order may move STR but nothing else. Records
        // share the bin's day either way; equal timestamps keep input order.
        auto shuffled = bin;
        for (auto& r : shuffled.records) r.timestamp = bin.day * 86400;
        for (std::size_t i = shuffled.records.size(); i > 1; --i) {
            std::swap(shuffled.records[i - 1], shuffled.records[rng.next_index(i)]);
        }
        const auto ms = bin_summary(shuffled, sentiment());
        REQUIRE_THAT(ms.mean_confidence, WithinAbs(m.mean_confidence, 1e-12));
        REQUIRE_THAT(ms.csi, WithinAbs(m.csi, 1e-12));
        REQUIRE_THAT(ms.pcs, WithinAbs(m.pcs, 1e-12));
        REQUIRE_THAT(ms.ced, WithinAbs(m.ced, 1e-12));
        if (m.accuracy) REQUIRE_THAT(*ms.accuracy, WithinAbs(*m.accuracy, 1e-12));
    }
}

TEST_CASE("max_drop on a constant series is zero") {
    const auto s = series_from_days({{0.8, 0.8}, {0.8, 0.8}}, {{0.8, 0.8}});
    const auto d = max_drop(s, MetricId::MeanConfidence);
    REQUIRE_THAT(d.drop_points, WithinAbs(0.0, 1e-12));
    REQUIRE(d.baseline_value == 0.8);
    REQUIRE(d.worst_window_value == 0.8);
}

TEST_CASE("max_drop reproduces the headline accuracy arithmetic") {
    // Baseline accuracy 0.900 vs a worst during day of 0.666.
    EventSeries s;
    s.min_bin_size = 1;
    const auto labeled_bin = [&](std::int64_t day, int correct, int total) {
        TemporalBin bin;
        bin.day = day;
        for (int i = 0; i < total; ++i) {
            PredictionRecord r;
            r.timestamp = day * 86400 + i;
            r.predicted_label = "positive";
            r.confidence = 0.9;
            r.true_label = i < correct ? "positive" : "negative";
            bin.records.push_back(std::move(r));
        }
        return bin_summary(bin, sentiment());
    };
    s.pre.push_back(labeled_bin(0, 900, 1000));
    s.pre.push_back(labeled_bin(1, 900, 1000));
    s.during.push_back(labeled_bin(2, 666, 1000));
    const auto d = max_drop(s, MetricId::Accuracy);
    REQUIRE_THAT(d.baseline_value, WithinAbs(0.900, 1e-12));
    REQUIRE_THAT(d.worst_window_value, WithinAbs(0.666, 1e-12));
    REQUIRE_THAT(d.drop_points, WithinAbs(23.4, 1e-9));
    REQUIRE(d.worst_day == 2);
}

TEST_CASE("max_drop reproduces the confidence arithmetic") {
    const auto s = series_from_days({{0.85, 0.85}, {0.85, 0.85}}, {{0.719, 0.719}});
    const auto d = max_drop(s, MetricId::MeanConfidence);
    REQUIRE_THAT(d.baseline_value, WithinAbs(0.850, 1e-12));
    REQUIRE_THAT(d.worst_window_value, WithinAbs(0.719, 1e-12));
    REQUIRE_THAT(d.drop_points, WithinAbs(13.1, 1e-9));
}

TEST_CASE("max_drop weights the baseline by record count and picks the earliest worst day") {
    // Day 0 has 3 records at 0.9, day 1 has 1 record at 0.5:
    // baseline = (3*0.9 + 0.5) / 4 = 0.8.
    const auto s = series_from_days({{0.9, 0.9, 0.9}, {0.5}}, {{0.6}, {0.7}, {0.6}});
    const auto d = max_drop(s, MetricId::MeanConfidence);
    REQUIRE_THAT(d.baseline_value, WithinAbs(0.8, 1e-12));
    REQUIRE_THAT(d.drop_points, WithinAbs(20.0, 1e-9));
    REQUIRE(d.worst_day == 2); // first of the two 0.6 days
}

TEST_CASE("max_drop skips days under min_bin_size in the ranking but not the baseline") {
    auto s = series_from_days({{0.9, 0.9}, {0.9, 0.9}}, {{0.2}, {0.7, 0.7}});
    s.min_bin_size = 2;
    const auto d = max_drop(s, MetricId::MeanConfidence);
    // The 1-record 0.2 day is ignored; worst qualifying day is 0.7.
    REQUIRE_THAT(d.worst_window_value, WithinAbs(0.7, 1e-12));
    REQUIRE_THAT(d.drop_points, WithinAbs(20.0, 1e-9));
}

TEST_CASE("max_drop fails cleanly when the metric is absent") {
    const auto s = series_from_days({{0.9, 0.9}}, {{0.8, 0.8}});
    REQUIRE_THROWS_WITH(max_drop(s, MetricId::Accuracy),
                        ContainsSubstring("metric unavailable"));

    auto starved = series_from_days({{0.9, 0.9}}, {{0.8}});
    starved.min_bin_size = 5;
    REQUIRE_THROWS_WITH(max_drop(starved, MetricId::MeanConfidence),
                        ContainsSubstring("metric unavailable"));
}

TEST_CASE("max_rise mirrors max_drop for upward metrics") {
    EventSeries s;
    s.min_bin_size = 1;
    std::int64_t day = 0;
    const auto push = [&](std::vector<BinMetrics>& w, const std::vector<std::string>& labels) {
        auto b = bin_of(labels, std::vector<double>(labels.size(), 0.8), day++);
        w.push_back(bin_summary(b, sentiment()));
    };
    push(s.pre, {"positive", "positive", "positive", "positive"}); // str 0
    push(s.pre, {"positive", "positive", "positive", "positive"});
    push(s.during, {"positive", "negative", "positive", "negative"}); // str 1
    const auto r = max_rise(s, MetricId::Str);
    REQUIRE_THAT(r.baseline_value, WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(r.peak_window_value, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(r.rise_points, WithinAbs(100.0, 1e-9));
    REQUIRE(r.peak_day == 2);
}

TEST_CASE("metric ids map to stable names") {
    REQUIRE(metric_name(MetricId::Pcs) == "pcs");
    REQUIRE(metric_from_name("ced") == MetricId::Ced);
    REQUIRE_THROWS_AS(metric_from_name("vibes"), ConfigError);
}
