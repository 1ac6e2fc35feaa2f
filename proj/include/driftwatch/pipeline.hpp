#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "driftwatch/alerting.hpp"
#include "driftwatch/baselines.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/metrics.hpp"
#include "driftwatch/stats.hpp"

namespace driftwatch {

/// Analysis output: a canonical JSON document plus the measured wall
/// time (kept out of the document unless explicitly requested, so
/// identical runs stay byte-identical).
struct DriftReport {
    nlohmann::json doc;
    double runtime_seconds = 0.0;
};

namespace detail {

/// Rounds to 6 significant digits via the shortest decimal that
/// round-trips, giving stable float text in reports.
inline double round_6sig(double x) {
    if (!std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

inline void canonicalize_floats(nlohmann::json& j) {
    if (j.is_object() || j.is_array()) {
        for (auto& element : j) canonicalize_floats(element);
    } else if (j.is_number_float()) {
        j = round_6sig(j.get<double>());
    }
}

template <typename F>
auto run_stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(std::string(name) + ": " + e.what());
    }
}

template <typename T>
std::vector<T> subsample(std::vector<T> xs, std::size_t cap, SplitMix64& rng) {
    if (xs.size() <= cap) return xs;
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + rng.next_index(xs.size() - i);
        std::swap(xs[i], xs[j]);
    }
    xs.resize(cap);
    return xs;
}

struct WindowInputs {
    std::vector<double> confidences;
    std::vector<std::string> texts;
    std::vector<std::vector<double>> embeddings;
};

inline WindowInputs collect_inputs(const std::vector<TemporalBin>& bins) {
    WindowInputs w;
    for (const auto& bin : bins) {
        for (const auto& r : bin.records) {
            w.confidences.push_back(r.confidence);
            if (r.text) w.texts.push_back(*r.text);
            if (!r.embedding.empty()) w.embeddings.push_back(r.embedding);
        }
    }
    return w;
}

inline nlohmann::json bin_metrics_json(const BinMetrics& m, std::size_t min_bin_size) {
    nlohmann::json j;
    j["day"] = format_day(m.day);
    j["n"] = m.n;
    j["n_labeled"] = m.n_labeled;
    j["n_with_probs"] = m.n_with_probs;
    j["qualifying"] = m.n >= min_bin_size;
    j["mean_confidence"] = m.mean_confidence;
    j["confidence_std"] = m.confidence_std;
    j["prediction_entropy_mean"] =
        m.prediction_entropy_mean ? nlohmann::json(*m.prediction_entropy_mean) : nullptr;
    j["accuracy"] = m.accuracy ? nlohmann::json(*m.accuracy) : nullptr;
    j["pcs"] = m.pcs;
    j["csi"] = m.csi;
    j["str"] = m.str ? nlohmann::json(*m.str) : nullptr;
    j["ced"] = m.ced;
    return j;
}

inline nlohmann::json drop_json(const DropResult& d) {
    return {{"metric", d.metric_name},
            {"baseline", d.baseline_value},
            {"worst", d.worst_window_value},
            {"drop_points", d.drop_points},
            {"worst_day", format_day(d.worst_day)}};
}

inline nlohmann::json rise_json(const RiseResult& r) {
    return {{"metric", r.metric_name},
            {"baseline", r.baseline_value},
            {"peak", r.peak_window_value},
            {"rise_points", r.rise_points},
            {"peak_day", format_day(r.peak_day)}};
}

inline nlohmann::json bootstrap_json(const BootstrapCI& ci, std::string_view metric) {
    return {{"metric", std::string(metric)},
            {"statistic", ci.statistic_name},
            {"point", ci.point_estimate},
            {"lower", ci.lower},
            {"upper", ci.upper},
            {"level", ci.level},
            {"iterations", ci.iterations},
            {"seed", ci.seed},
            {"point_outside_interval", ci.point_outside_interval}};
}

inline nlohmann::json effect_json(const EffectSizeReport& e) {
    const auto measure = [](const std::optional<double>& v,
                            const std::optional<EffectBand>& band) -> nlohmann::json {
        if (!v) return nullptr;
        return {{"value", *v}, {"band", std::string(effect_band_name(*band))}};
    };
    nlohmann::json j;
    j["cohens_d"] = measure(e.cohens_d, e.cohens_d_band);
    j["glass_delta"] = measure(e.glass_delta, e.glass_delta_band);
    j["hedges_g"] = measure(e.hedges_g, e.hedges_g_band);
    j["cliffs_delta"] = {{"value", e.cliffs_delta},
                         {"band", std::string(effect_band_name(e.cliffs_delta_band))}};
    return j;
}

inline nlohmann::json verdict_json(const DriftVerdict& v) {
    nlohmann::json j;
    j["event"] = v.event_name;
    j["detected"] = v.detected;
    j["trigger_metrics"] = nlohmann::json::array();
    for (const auto& t : v.trigger_metrics) {
        j["trigger_metrics"].push_back(
            {{"metric", std::string(metric_name(t.metric))},
             {"z", t.z ? nlohmann::json(*t.z) : nullptr},
             {"deviation_points", t.deviation_points},
             {"zero_variance_baseline", t.zero_variance_baseline}});
    }
    j["max_drop"] = v.max_drop ? drop_json(*v.max_drop) : nlohmann::json(nullptr);
    j["breaches"] = nlohmann::json::array();
    for (const auto& b : v.breaches) {
        j["breaches"].push_back({{"profile", b.profile.name},
                                 {"threshold_points", b.profile.threshold_points},
                                 {"multiplier", b.multiplier},
                                 {"multiplier_rounded", b.multiplier_rounded},
                                 {"severity", std::string(breach_severity_name(b.severity))}});
    }
    j["notes"] = v.notes;
    return j;
}

} // namespace detail

struct BaselineRun {
    std::vector<BaselineScore> scores;
    std::vector<std::string> notes;
};

/// Runs every enabled comparison method on the pre vs during windows.
/// The quadratic text/embedding methods see at most sample_cap records
/// per window (deterministic subsample, recorded in details); when
/// with_p is set, each score gains a one-sided permutation p-value
/// computed from permutation-invariant precomputations, so the heavy
/// kernels are built once.
inline BaselineRun compute_baselines(const EventWindows& windows, const BaselineParams& params,
                                     std::uint64_t seed, bool with_p) {
    BaselineRun run;
    const auto enabled = [&](std::string_view name) {
        return std::find(params.enabled.begin(), params.enabled.end(), name) !=
               params.enabled.end();
    };
    auto pre = detail::collect_inputs(windows.pre);
    auto during = detail::collect_inputs(windows.during);
    const int iters = params.permutation_iterations;

    const auto add = [&](BaselineScore score, std::optional<double> p) {
        if (p) score.details["permutation_p"] = *p;
        run.scores.push_back(std::move(score));
    };

    if (enabled("ks")) {
        BaselineScore s{"ks", ks_statistic(pre.confidences, during.confidences), {}};
        s.details["n_pre"] = static_cast<double>(pre.confidences.size());
        s.details["n_during"] = static_cast<double>(during.confidences.size());
        std::optional<double> p;
        if (with_p) {
            p = permutation_p_stat<double>(
                pre.confidences, during.confidences,
                [](std::span<const double> a, std::span<const double> b) {
                    return ks_statistic(a, b);
                },
                iters, derive_rng(seed, 101).next_u64());
        }
        add(std::move(s), p);
    }
    if (enabled("psi")) {
        BaselineScore s{"psi", psi(pre.confidences, during.confidences, params.psi_bins), {}};
        s.details["n_bins"] = static_cast<double>(params.psi_bins);
        s.details["eps"] = 1e-4;
        std::optional<double> p;
        if (with_p) {
            p = permutation_p_stat<double>(
                pre.confidences, during.confidences,
                [&](std::span<const double> a, std::span<const double> b) {
                    return psi(a, b, params.psi_bins);
                },
                iters, derive_rng(seed, 102).next_u64());
        }
        add(std::move(s), p);
    }
    if (enabled("wasserstein")) {
        BaselineScore s{"wasserstein", wasserstein_1d(pre.confidences, during.confidences), {}};
        std::optional<double> p;
        if (with_p) {
            p = permutation_p_stat<double>(
                pre.confidences, during.confidences,
                [](std::span<const double> a, std::span<const double> b) {
                    return wasserstein_1d(a, b);
                },
                iters, derive_rng(seed, 103).next_u64());
        }
        add(std::move(s), p);
    }

    const auto cap = static_cast<std::size_t>(params.sample_cap);
    if (enabled("tfidf_centroid")) {
        if (pre.texts.empty() || during.texts.empty()) {
            run.notes.push_back("tfidf_centroid skipped: no text on one side");
        } else {
            auto rng = derive_rng(seed, 104);
            const auto a = detail::subsample(pre.texts, cap, rng);
            const auto b = detail::subsample(during.texts, cap, rng);
            std::vector<std::string> corpus;
            corpus.reserve(a.size() + b.size());
            corpus.insert(corpus.end(), a.begin(), a.end());
            corpus.insert(corpus.end(), b.begin(), b.end());
            try {
                // Vectors depend only on the pooled corpus, so one
                // vectorization serves the score and every permutation.
                const auto vecs = tfidf_vectorize(corpus);
                std::vector<std::size_t> ia(a.size());
                std::vector<std::size_t> ib(b.size());
                std::iota(ia.begin(), ia.end(), 0);
                std::iota(ib.begin(), ib.end(), a.size());
                const auto stat = [&](std::span<const std::size_t> lhs,
                                      std::span<const std::size_t> rhs) {
                    const auto centroid_of = [&](std::span<const std::size_t> idx) {
                        SparseVector c;
                        for (const auto i : idx) {
                            for (const auto& [term, w] : vecs[i]) c[term] += w;
                        }
                        for (auto& [term, w] : c) w /= static_cast<double>(idx.size());
                        return c;
                    };
                    try {
                        return 1.0 - detail::sparse_cosine(centroid_of(lhs), centroid_of(rhs));
                    } catch (const Error&) {
                        return 0.0; // degenerate split: no drift evidence
                    }
                };
                BaselineScore s{"tfidf_centroid",
                                stat(std::span<const std::size_t>(ia),
                                     std::span<const std::size_t>(ib)),
                                {}};
                s.details["n_pre_used"] = static_cast<double>(a.size());
                s.details["n_during_used"] = static_cast<double>(b.size());
                s.details["sample_cap"] = static_cast<double>(cap);
                std::optional<double> p;
                if (with_p) {
                    p = permutation_p_stat<std::size_t>(ia, ib, stat, iters,
                                                        derive_rng(seed, 105).next_u64());
                }
                add(std::move(s), p);
            } catch (const Error& e) {
                run.notes.push_back(std::string("tfidf_centroid skipped: ") + e.what());
            }
        }
    }

    const bool want_mmd = enabled("mmd");
    const bool want_clustering = enabled("clustering_js");
    if (want_mmd || want_clustering) {
        if (pre.embeddings.empty() || during.embeddings.empty()) {
            if (want_mmd) run.notes.push_back("mmd skipped: no embeddings on one side");
            if (want_clustering) {
                run.notes.push_back("clustering_js skipped: no embeddings on one side");
            }
        } else {
            auto rng = derive_rng(seed, 106);
            const auto a = detail::subsample(pre.embeddings, cap, rng);
            const auto b = detail::subsample(during.embeddings, cap, rng);
            std::vector<std::vector<double>> pooled;
            pooled.reserve(a.size() + b.size());
            pooled.insert(pooled.end(), a.begin(), a.end());
            pooled.insert(pooled.end(), b.begin(), b.end());
            std::vector<std::size_t> ia(a.size());
            std::vector<std::size_t> ib(b.size());
            std::iota(ia.begin(), ia.end(), 0);
            std::iota(ib.begin(), ib.end(), a.size());

            if (want_mmd) {
                double sigma_sq = 1.0;
                BaselineScore s{"mmd", mmd_rbf(a, b, params.mmd_sigma_sq, &sigma_sq), {}};
                s.details["sigma_sq"] = sigma_sq;
                s.details["n_pre_used"] = static_cast<double>(a.size());
                s.details["n_during_used"] = static_cast<double>(b.size());
                s.details["sample_cap"] = static_cast<double>(cap);
                std::optional<double> p;
                if (with_p) {
                    // The Gram matrix over the pooled set is the same for
                    // every permutation; build it once.
                    const std::size_t n = pooled.size();
                    std::vector<double> gram(n * n);
                    for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j2 = 0; j2 < n; ++j2) {
                            gram[i * n + j2] = std::exp(
                                -squared_distance(pooled[i], pooled[j2]) / (2.0 * sigma_sq));
                        }
                    }
                    const auto stat = [&](std::span<const std::size_t> lhs,
                                          std::span<const std::size_t> rhs) {
                        const auto block = [&](std::span<const std::size_t> u,
                                               std::span<const std::size_t> v) {
                            double sum = 0.0;
                            for (const auto i : u) {
                                for (const auto j2 : v) sum += gram[i * n + j2];
                            }
                            return sum / (static_cast<double>(u.size()) *
                                          static_cast<double>(v.size()));
                        };
                        const double mmd_sq =
                            block(lhs, lhs) + block(rhs, rhs) - 2.0 * block(lhs, rhs);
                        return std::sqrt(std::max(mmd_sq, 0.0));
                    };
                    p = permutation_p_stat<std::size_t>(ia, ib, stat, iters,
                                                        derive_rng(seed, 107).next_u64());
                }
                add(std::move(s), p);
            }
            if (want_clustering) {
                if (pooled.size() < static_cast<std::size_t>(params.kmeans_k)) {
                    run.notes.push_back("clustering_js skipped: fewer points than k");
                } else {
                    // Cluster structure is a property of the pooled set:
                    // fit once, then only the assignment split varies.
                    const auto assignment = detail::kmeans_assign(
                        pooled, params.kmeans_k, derive_rng(seed, 108).next_u64());
                    const auto k = static_cast<std::size_t>(params.kmeans_k);
                    const auto stat = [&](std::span<const std::size_t> lhs,
                                          std::span<const std::size_t> rhs) {
                        constexpr double kEps = 1e-9;
                        std::vector<double> pa(k, 0.0);
                        std::vector<double> pb(k, 0.0);
                        for (const auto i : lhs) pa[assignment[i]] += 1.0;
                        for (const auto i : rhs) pb[assignment[i]] += 1.0;
                        for (auto& v : pa) {
                            v = (v + kEps) / (static_cast<double>(lhs.size()) + k * kEps);
                        }
                        for (auto& v : pb) {
                            v = (v + kEps) / (static_cast<double>(rhs.size()) + k * kEps);
                        }
                        return js_divergence(pa, pb);
                    };
                    BaselineScore s{"clustering_js",
                                    stat(std::span<const std::size_t>(ia),
                                         std::span<const std::size_t>(ib)),
                                    {}};
                    s.details["k"] = static_cast<double>(params.kmeans_k);
                    s.details["n_pre_used"] = static_cast<double>(a.size());
                    s.details["n_during_used"] = static_cast<double>(b.size());
                    s.details["sample_cap"] = static_cast<double>(cap);
                    std::optional<double> p;
                    if (with_p) {
                        p = permutation_p_stat<std::size_t>(ia, ib, stat, iters,
                                                            derive_rng(seed, 109).next_u64());
                    }
                    add(std::move(s), p);
                }
            }
        }
    }
    return run;
}

namespace detail {

inline nlohmann::json window_block(const std::vector<TemporalBin>& bins, bool truncated,
                                   std::size_t min_bin_size) {
    std::size_t records = 0;
    std::size_t qualifying = 0;
    for (const auto& b : bins) {
        records += b.size();
        if (b.size() >= min_bin_size) ++qualifying;
    }
    return {{"days", bins.size()},
            {"records", records},
            {"qualifying_days", qualifying},
            {"truncated", truncated}};
}

inline nlohmann::json analyze_event(const Dataset& dataset,
                                    const std::vector<TemporalBin>& bins,
                                    const EventConfig& event, const RunConfig& config) {
    nlohmann::json ej;
    ej["name"] = event.name;
    std::vector<std::string> notes;

    const auto windows = run_stage("window", [&] { return window_partition(bins, event); });
    ej["windows"] = {{"pre", window_block(windows.pre, windows.pre_truncated,
                                          config.min_bin_size)},
                     {"during", window_block(windows.during, false, config.min_bin_size)},
                     {"post", window_block(windows.post, windows.post_truncated,
                                           config.min_bin_size)}};
    if (windows.pre_truncated) notes.push_back("truncated baseline");
    if (windows.post_truncated) notes.push_back("truncated recovery window");

    const auto series = run_stage("metrics", [&] {
        return summarize_windows(windows, dataset.labels(), config.min_bin_size);
    });
    ej["series"] = nlohmann::json::object();
    const auto series_rows = [&](const std::vector<BinMetrics>& window) {
        auto rows = nlohmann::json::array();
        for (const auto& m : window) rows.push_back(bin_metrics_json(m, config.min_bin_size));
        return rows;
    };
    ej["series"]["pre"] = series_rows(series.pre);
    ej["series"]["during"] = series_rows(series.during);
    ej["series"]["post"] = series_rows(series.post);

    run_stage("metrics", [&] {
        auto drops = nlohmann::json::array();
        for (const auto metric :
             {MetricId::MeanConfidence, MetricId::Pcs, MetricId::Accuracy, MetricId::Ced}) {
            try {
                drops.push_back(drop_json(max_drop(series, metric)));
            } catch (const Error& e) {
                notes.push_back(e.what());
            }
        }
        ej["drops"] = std::move(drops);
        auto rises = nlohmann::json::array();
        for (const auto metric : {MetricId::Ced, MetricId::Str}) {
            try {
                rises.push_back(rise_json(max_rise(series, metric)));
            } catch (const Error& e) {
                notes.push_back(e.what());
            }
        }
        ej["rises"] = std::move(rises);
        return 0;
    });

    run_stage("baselines", [&] {
        auto run = compute_baselines(windows, config.baselines, config.stats.seed,
                                     /*with_p=*/false);
        auto scores = nlohmann::json::array();
        for (const auto& s : run.scores) {
            scores.push_back({{"method", s.method}, {"score", s.score}, {"details", s.details}});
        }
        ej["baselines"] = std::move(scores);
        notes.insert(notes.end(), run.notes.begin(), run.notes.end());
        return 0;
    });

    run_stage("stats", [&] {
        const auto& sp = config.stats;

        // Pre vs during per-day comparisons, one permutation test per
        // available metric, FDR-corrected across them.
        ej["effects"] = nlohmann::json::object();
        std::vector<std::string> tested;
        std::vector<double> p_values;
        for (const auto metric : {MetricId::MeanConfidence, MetricId::Pcs, MetricId::Accuracy,
                                  MetricId::Csi, MetricId::Str, MetricId::Ced}) {
            const auto pre_vals = qualifying_values(series.pre, metric, config.min_bin_size);
            const auto during_vals =
                qualifying_values(series.during, metric, config.min_bin_size);
            if (pre_vals.size() < 2 || during_vals.size() < 2) continue;
            const auto name = std::string(metric_name(metric));
            auto effect = effect_sizes(during_vals, pre_vals);
            ej["effects"][name] = effect_json(effect);
            notes.insert(notes.end(), effect.notes.begin(), effect.notes.end());
            tested.push_back(name);
            p_values.push_back(
                permutation_p(during_vals, pre_vals, sp.iterations,
                              derive_rng(sp.seed, 200 + tested.size()).next_u64()));
        }
        auto tests = nlohmann::json::array();
        if (!p_values.empty()) {
            const auto fdr = bh_fdr(p_values, sp.alpha);
            for (std::size_t i = 0; i < tested.size(); ++i) {
                tests.push_back({{"metric", tested[i]},
                                 {"p", p_values[i]},
                                 {"p_adjusted", fdr.adjusted[i]},
                                 {"reject", static_cast<bool>(fdr.reject[i])}});
            }
        }
        ej["tests"] = {{"permutation", std::move(tests)},
                       {"alpha", sp.alpha},
                       {"iterations", sp.iterations},
                       {"seed", sp.seed}};

        // Bootstrap CIs over per-day drop magnitudes after onset.
        auto cis = nlohmann::json::array();
        for (const auto metric : {MetricId::MeanConfidence, MetricId::Accuracy}) {
            const auto baseline = weighted_window_mean(series.pre, metric);
            if (!baseline) continue;
            std::vector<double> day_drops;
            for (const auto* window : {&series.during, &series.post}) {
                for (const auto& m : *window) {
                    if (m.n < config.min_bin_size) continue;
                    const auto v = metric_value(m, metric);
                    if (v) day_drops.push_back((*baseline - *v) * 100.0);
                }
            }
            if (day_drops.size() < 2) continue;
            const auto ci = bootstrap_ci(day_drops, BootstrapStatistic::DropPoints,
                                         sp.iterations, sp.seed, sp.level);
            cis.push_back(bootstrap_json(ci, metric_name(metric)));
        }
        ej["bootstrap"] = std::move(cis);

        // One-way ANOVA across the pre/during/post daily confidence
        // means, where at least two windows have enough days.
        std::vector<std::vector<double>> groups;
        for (const auto* window : {&series.pre, &series.during, &series.post}) {
            auto vals =
                qualifying_values(*window, MetricId::MeanConfidence, config.min_bin_size);
            if (vals.size() >= 2) groups.push_back(std::move(vals));
        }
        if (groups.size() >= 2) {
            try {
                ej["anova_f"] = anova_f(groups);
            } catch (const Error& e) {
                ej["anova_f"] = nullptr;
                notes.push_back(std::string("anova: ") + e.what());
            }
        } else {
            ej["anova_f"] = nullptr;
            notes.push_back("anova: not enough windows with 2+ qualifying days");
        }

        // Daily mean confidence against the day's label entropy across
        // the whole event span.
        std::vector<double> conf_series;
        std::vector<double> entropy_series;
        for (const auto* window : {&series.pre, &series.during, &series.post}) {
            for (const auto& m : *window) {
                if (m.n < config.min_bin_size) continue;
                conf_series.push_back(m.mean_confidence);
                entropy_series.push_back(m.ced / m.mean_confidence);
            }
        }
        if (conf_series.size() >= 3) {
            try {
                const double r = pearson_r(conf_series, entropy_series);
                const double p = correlation_permutation_p(
                    conf_series, entropy_series, sp.iterations,
                    derive_rng(sp.seed, 300).next_u64());
                ej["correlation"] = {{"metric_x", "mean_confidence"},
                                     {"metric_y", "label_entropy"},
                                     {"r", r},
                                     {"permutation_p", p},
                                     {"n_days", conf_series.size()}};
            } catch (const Error& e) {
                ej["correlation"] = nullptr;
                notes.push_back(std::string("correlation: ") + e.what());
            }
        } else {
            ej["correlation"] = nullptr;
            notes.push_back("correlation: fewer than 3 qualifying days");
        }
        return 0;
    });

    run_stage("alerting", [&] {
        const auto verdict = detect_drift(series, config.detection, config.profiles);
        ej["verdict"] = verdict_json(verdict);
        return 0;
    });

    ej["notes"] = notes;
    return ej;
}

} // namespace detail

/// Full analysis of an in-memory dataset: day bins, event windows,
/// per-day metrics, comparison baselines, statistical validation, and
/// the drift verdict, assembled into one canonical JSON document.
inline DriftReport analyze_dataset(const Dataset& dataset, const RunConfig& config) {
    if (config.events.empty()) fail_config("no events configured");
    const auto t0 = std::chrono::steady_clock::now();

    const auto bins = detail::run_stage("bin", [&] { return assign_bins(dataset); });

    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["config"] = config_echo(config);

    std::size_t n_labeled = 0;
    std::size_t n_with_probs = 0;
    std::size_t n_with_text = 0;
    std::size_t n_with_embedding = 0;
    for (const auto& r : dataset.records()) {
        if (r.true_label) ++n_labeled;
        if (!r.class_probs.empty()) ++n_with_probs;
        if (r.text) ++n_with_text;
        if (!r.embedding.empty()) ++n_with_embedding;
    }
    doc["dataset"] = {{"name", dataset.meta().name},
                      {"n_records", dataset.records().size()},
                      {"n_days", bins.size()},
                      {"first_day", format_day(bins.front().day)},
                      {"last_day", format_day(bins.back().day)},
                      {"n_labeled", n_labeled},
                      {"n_with_probs", n_with_probs},
                      {"n_with_text", n_with_text},
                      {"n_with_embedding", n_with_embedding}};

    auto events = config.events;
    std::sort(events.begin(), events.end(),
              [](const EventConfig& a, const EventConfig& b) { return a.name < b.name; });
    doc["events"] = nlohmann::json::array();
    for (const auto& event : events) {
        doc["events"].push_back(detail::analyze_event(dataset, bins, event, config));
    }

    detail::canonicalize_floats(doc);
    DriftReport report;
    report.doc = std::move(doc);
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (config.include_runtime) {
        report.doc["runtime_seconds"] = detail::round_6sig(report.runtime_seconds);
    }
    return report;
}

/// Loads the configured input and analyzes it. Stage names travel with
/// every error, so failures read like "ingest: cannot open ...".
inline DriftReport run_analyze(const RunConfig& config) {
    if (config.input_path.empty()) fail_config("ingest: no input path configured");
    const auto t0 = std::chrono::steady_clock::now();
    const auto dataset = detail::run_stage("ingest", [&] {
        return load_records(config.input_path, config.input_format, LabelSet(config.labels));
    });
    auto report = analyze_dataset(dataset, config);
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (config.include_runtime) {
        report.doc["runtime_seconds"] = detail::round_6sig(report.runtime_seconds);
    }
    return report;
}

/// Baseline-only run (the `baselines` subcommand): scores plus
/// permutation p-values per event, no metric pipeline.
inline DriftReport run_baselines(const Dataset& dataset, const RunConfig& config) {
    if (config.events.empty()) fail_config("no events configured");
    const auto t0 = std::chrono::steady_clock::now();
    const auto bins = detail::run_stage("bin", [&] { return assign_bins(dataset); });

    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["config"] = config_echo(config);
    doc["events"] = nlohmann::json::array();
    auto events = config.events;
    std::sort(events.begin(), events.end(),
              [](const EventConfig& a, const EventConfig& b) { return a.name < b.name; });
    for (const auto& event : events) {
        nlohmann::json ej;
        ej["name"] = event.name;
        const auto windows =
            detail::run_stage("window", [&] { return window_partition(bins, event); });
        const auto run = detail::run_stage("baselines", [&] {
            return compute_baselines(windows, config.baselines, config.stats.seed,
                                     /*with_p=*/true);
        });
        auto scores = nlohmann::json::array();
        for (const auto& s : run.scores) {
            scores.push_back({{"method", s.method}, {"score", s.score}, {"details", s.details}});
        }
        ej["baselines"] = std::move(scores);
        ej["notes"] = run.notes;
        doc["events"].push_back(std::move(ej));
    }
    detail::canonicalize_floats(doc);
    DriftReport report;
    report.doc = std::move(doc);
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

namespace detail {

inline std::string num(const nlohmann::json& j) { return j.is_null() ? "-" : j.dump(); }

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

/// Human-readable summary: verdicts, drops, effect sizes, tests,
/// baselines, and breach tables per event.
inline std::string render_markdown(const nlohmann::json& doc) {
    std::string md;
    md += "# Drift report\n\n";
    const auto& ds = doc.at("dataset");
    md += "- tool version: " + doc.at("version").get<std::string>() + "\n";
    md += "- dataset: " + ds.at("name").get<std::string>() + " (" +
          detail::num(ds.at("n_records")) + " records over " + detail::num(ds.at("n_days")) +
          " days, " + ds.at("first_day").get<std::string>() + " to " +
          ds.at("last_day").get<std::string>() + ")\n";
    if (doc.contains("runtime_seconds")) {
        md += "- runtime: " + detail::num(doc.at("runtime_seconds")) + " s\n";
    }
    for (const auto& ej : doc.at("events")) {
        md += "\n## Event: " + ej.at("name").get<std::string>() + "\n\n";
        const auto& w = ej.at("windows");
        md += "- windows (days pre/during/post): " + detail::num(w.at("pre").at("days")) + "/" +
              detail::num(w.at("during").at("days")) + "/" + detail::num(w.at("post").at("days")) +
              "\n";
        const auto& v = ej.at("verdict");
        md += std::string("- drift detected: ") + (v.at("detected").get<bool>() ? "yes" : "no");
        if (!v.at("trigger_metrics").empty()) {
            md += " (triggers:";
            for (const auto& t : v.at("trigger_metrics")) {
                md += " " + t.at("metric").get<std::string>() + " z=" + detail::num(t.at("z"));
            }
            md += ")";
        }
        md += "\n";

        md += "\n### Window drops\n\n";
        md += "| metric | baseline | worst | drop (points) | worst day |\n";
        md += "|---|---|---|---|---|\n";
        for (const auto& d : ej.at("drops")) {
            md += "| " + d.at("metric").get<std::string>() + " | " +
                  detail::num(d.at("baseline")) + " | " + detail::num(d.at("worst")) + " | " +
                  detail::num(d.at("drop_points")) + " | " +
                  d.at("worst_day").get<std::string>() + " |\n";
        }
        for (const auto& r : ej.at("rises")) {
            md += "| " + r.at("metric").get<std::string>() + " (rise) | " +
                  detail::num(r.at("baseline")) + " | " + detail::num(r.at("peak")) + " | " +
                  detail::num(r.at("rise_points")) + " | " + r.at("peak_day").get<std::string>() +
                  " |\n";
        }

        md += "\n### Effect sizes (during vs pre, per day)\n\n";
        md += "| metric | measure | value | band |\n";
        md += "|---|---|---|---|\n";
        for (const auto& [metric, e] : ej.at("effects").items()) {
            for (const char* measure :
                 {"cohens_d", "glass_delta", "hedges_g", "cliffs_delta"}) {
                const auto& m = e.at(measure);
                if (m.is_null()) {
                    md += "| " + metric + " | " + measure + " | - | - |\n";
                } else {
                    md += "| " + metric + " | " + measure + " | " + detail::num(m.at("value")) +
                          " | " + m.at("band").get<std::string>() + " |\n";
                }
            }
        }

        md += "\n### Permutation tests (BH-FDR alpha " +
              detail::num(ej.at("tests").at("alpha")) + ")\n\n";
        md += "| metric | p | adjusted p | reject |\n";
        md += "|---|---|---|---|\n";
        for (const auto& t : ej.at("tests").at("permutation")) {
            md += "| " + t.at("metric").get<std::string>() + " | " + detail::num(t.at("p")) +
                  " | " + detail::num(t.at("p_adjusted")) + " | " +
                  (t.at("reject").get<bool>() ? "yes" : "no") + " |\n";
        }
        md += "\n- ANOVA F (daily mean confidence across windows): " +
              detail::num(ej.at("anova_f")) + "\n";
        if (!ej.at("correlation").is_null()) {
            const auto& c = ej.at("correlation");
            md += "- correlation mean_confidence vs label_entropy: r = " +
                  detail::num(c.at("r")) + " (permutation p = " +
                  detail::num(c.at("permutation_p")) + ", " + detail::num(c.at("n_days")) +
                  " days)\n";
        }

        md += "\n### Bootstrap drop intervals\n\n";
        md += "| metric | point | lower | upper | level | iterations | seed |\n";
        md += "|---|---|---|---|---|---|---|\n";
        for (const auto& ci : ej.at("bootstrap")) {
            md += "| " + ci.at("metric").get<std::string>() + " | " +
                  detail::num(ci.at("point")) + " | " + detail::num(ci.at("lower")) + " | " +
                  detail::num(ci.at("upper")) + " | " + detail::num(ci.at("level")) + " | " +
                  detail::num(ci.at("iterations")) + " | " + detail::num(ci.at("seed")) + " |\n";
        }

        md += "\n### Comparison baselines (pre vs during)\n\n";
        md += "| method | score |\n";
        md += "|---|---|\n";
        for (const auto& s : ej.at("baselines")) {
            md += "| " + s.at("method").get<std::string>() + " | " +
                  detail::num(s.at("score")) + " |\n";
        }

        if (!v.at("breaches").empty()) {
            md += "\n### Industry thresholds\n\n";
            md += "| profile | threshold (points) | multiplier | severity |\n";
            md += "|---|---|---|---|\n";
            for (const auto& b : v.at("breaches")) {
                md += "| " + b.at("profile").get<std::string>() + " | " +
                      detail::num(b.at("threshold_points")) + " | " +
                      detail::num(b.at("multiplier_rounded")) + "x | " +
                      b.at("severity").get<std::string>() + " |\n";
            }
        }
        if (!ej.at("notes").empty()) {
            md += "\n### Notes\n\n";
            for (const auto& n : ej.at("notes")) {
                md += "- " + n.get<std::string>() + "\n";
            }
        }
    }
    return md;
}

/// Plot-ready per-day rows, qualifying days only.
inline std::string render_csv_series(const nlohmann::json& doc) {
    std::string csv = "event,window,day,n,n_labeled,mean_confidence,confidence_std,"
                      "prediction_entropy_mean,accuracy,pcs,csi,str,ced\n";
    const auto cell = [](const nlohmann::json& j) { return j.is_null() ? "" : j.dump(); };
    for (const auto& ej : doc.at("events")) {
        for (const char* window : {"pre", "during", "post"}) {
            for (const auto& row : ej.at("series").at(window)) {
                if (!row.at("qualifying").get<bool>()) continue;
                csv += detail::csv_field(ej.at("name").get<std::string>()) + "," + window + "," +
                       row.at("day").get<std::string>() + "," + cell(row.at("n")) + "," +
                       cell(row.at("n_labeled")) + "," + cell(row.at("mean_confidence")) + "," +
                       cell(row.at("confidence_std")) + "," +
                       cell(row.at("prediction_entropy_mean")) + "," +
                       cell(row.at("accuracy")) + "," + cell(row.at("pcs")) + "," +
                       cell(row.at("csi")) + "," + cell(row.at("str")) + "," +
                       cell(row.at("ced")) + "\n";
            }
        }
    }
    return csv;
}

/// Serializes a report in the requested format. JSON output is
/// canonical: sorted keys, floats pre-rounded to 6 significant digits.
inline std::string emit_report(const DriftReport& report, std::string_view format) {
    if (format == "json") return report.doc.dump(2) + "\n";
    if (format == "markdown") return render_markdown(report.doc);
    if (format == "csv-series") return render_csv_series(report.doc);
    fail_config("unknown report format '" + std::string(format) +
                "' (expected json, markdown, or csv-series)");
}

} // namespace driftwatch
