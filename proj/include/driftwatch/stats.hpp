#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/numeric.hpp"
#include "driftwatch/rng.hpp"

namespace driftwatch {

/// Percentile bootstrap interval with full provenance: everything
/// needed to regenerate it travels with the numbers.
struct BootstrapCI {
    std::string statistic_name;
    double point_estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    int iterations = 1000;
    std::uint64_t seed = 42;
    bool point_outside_interval = false; ///< pathological-statistic flag
};

enum class BootstrapStatistic {
    Mean,      ///< mean of the resample
    DropPoints ///< max of the resample (samples are per-day drop magnitudes)
};

inline std::string_view bootstrap_statistic_name(BootstrapStatistic s) {
    return s == BootstrapStatistic::Mean ? "mean" : "drop_points";
}

namespace detail {

inline double bootstrap_eval(BootstrapStatistic statistic, std::span<const double> xs) {
    if (statistic == BootstrapStatistic::Mean) return mean(xs);
    return *std::max_element(xs.begin(), xs.end());
}

} // namespace detail

/// Percentile bootstrap over resamples of size n drawn with
/// replacement. Iteration b seeds its own generator from (seed, b), so
/// the result is independent of evaluation order.
inline BootstrapCI bootstrap_ci(std::span<const double> samples, BootstrapStatistic statistic,
                                int iterations = 1000, std::uint64_t seed = 42,
                                double level = 0.95) {
    if (samples.size() < 2) fail("bootstrap_ci: need at least 2 samples");
    if (iterations < 1) fail("bootstrap_ci: iterations must be >= 1");
    if (level <= 0.0 || level >= 1.0) fail("bootstrap_ci: level out of (0, 1)");

    std::vector<double> stats(static_cast<std::size_t>(iterations));
    std::vector<double> resample(samples.size());
    for (int b = 0; b < iterations; ++b) {
        auto rng = derive_rng(seed, static_cast<std::uint64_t>(b));
        for (auto& x : resample) x = samples[rng.next_index(samples.size())];
        stats[static_cast<std::size_t>(b)] = detail::bootstrap_eval(statistic, resample);
    }
    std::sort(stats.begin(), stats.end());

    BootstrapCI ci;
    ci.statistic_name = std::string(bootstrap_statistic_name(statistic));
    ci.point_estimate = detail::bootstrap_eval(statistic, samples);
    ci.lower = quantile_sorted(stats, (1.0 - level) / 2.0);
    ci.upper = quantile_sorted(stats, 1.0 - (1.0 - level) / 2.0);
    ci.level = level;
    ci.iterations = iterations;
    ci.seed = seed;
    ci.point_outside_interval = ci.point_estimate < ci.lower || ci.point_estimate > ci.upper;
    return ci;
}

enum class EffectBand { Negligible, Small, Medium, Large };

inline std::string_view effect_band_name(EffectBand band) {
    switch (band) {
        case EffectBand::Negligible: return "negligible";
        case EffectBand::Small: return "small";
        case EffectBand::Medium: return "medium";
        case EffectBand::Large: return "large";
    }
    fail("unreachable effect band");
}

/// Magnitude bands on |d|: under 0.2 negligible, then small, medium
/// from 0.5, large from 0.8.
inline EffectBand classify_effect_size(double d) {
    const double a = std::abs(d);
    if (a < 0.2) return EffectBand::Negligible;
    if (a < 0.5) return EffectBand::Small;
    if (a < 0.8) return EffectBand::Medium;
    return EffectBand::Large;
}

/// The four standardized group-difference measures. Variance-based
/// measures go absent (with a note) when their denominator degenerates;
/// the rank-based Cliff's δ always exists.
struct EffectSizeReport {
    std::optional<double> cohens_d;
    std::optional<double> glass_delta;
    std::optional<double> hedges_g;
    double cliffs_delta = 0.0;
    std::optional<EffectBand> cohens_d_band;
    std::optional<EffectBand> glass_delta_band;
    std::optional<EffectBand> hedges_g_band;
    EffectBand cliffs_delta_band = EffectBand::Negligible;
    std::vector<std::string> notes;
};

/// Standardized differences of group_a against control group_b:
/// Cohen's d on the pooled sample sd, Glass's Δ on the control sd,
/// Hedges' g = d·J with J = 1 − 3/(4(n₁+n₂)−9), and Cliff's δ from
/// pairwise comparisons.
inline EffectSizeReport effect_sizes(std::span<const double> group_a,
                                     std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) {
        fail("effect_sizes: each group needs at least 2 samples");
    }
    const double mean_a = mean(group_a);
    const double mean_b = mean(group_b);
    const double var_a = sample_variance(group_a);
    const double var_b = sample_variance(group_b);
    const auto n_a = static_cast<double>(group_a.size());
    const auto n_b = static_cast<double>(group_b.size());

    EffectSizeReport report;
    const double pooled_var =
        ((n_a - 1.0) * var_a + (n_b - 1.0) * var_b) / (n_a + n_b - 2.0);
    if (pooled_var > 0.0) {
        const double d = (mean_a - mean_b) / std::sqrt(pooled_var);
        const double j = 1.0 - 3.0 / (4.0 * (n_a + n_b) - 9.0);
        report.cohens_d = d;
        report.hedges_g = d * j;
        report.cohens_d_band = classify_effect_size(d);
        report.hedges_g_band = classify_effect_size(d * j);
    } else if (mean_a != mean_b) {
        report.notes.push_back("degenerate groups: zero pooled variance, d/g unavailable");
    } else {
        report.cohens_d = 0.0;
        report.hedges_g = 0.0;
        report.cohens_d_band = EffectBand::Negligible;
        report.hedges_g_band = EffectBand::Negligible;
    }
    if (var_b > 0.0) {
        const double delta = (mean_a - mean_b) / std::sqrt(var_b);
        report.glass_delta = delta;
        report.glass_delta_band = classify_effect_size(delta);
    } else if (mean_a != mean_b) {
        report.notes.push_back("zero control-group variance, Glass's delta unavailable");
    } else {
        report.glass_delta = 0.0;
        report.glass_delta_band = EffectBand::Negligible;
    }

    // Cliff's δ: (#{a > b} − #{a < b}) / (n_a·n_b), counted against the
    // sorted control group with binary search.
    std::vector<double> sorted_b(group_b.begin(), group_b.end());
    std::sort(sorted_b.begin(), sorted_b.end());
    long long net = 0;
    for (const double a : group_a) {
        const auto lt = std::lower_bound(sorted_b.begin(), sorted_b.end(), a) - sorted_b.begin();
        const auto le = std::upper_bound(sorted_b.begin(), sorted_b.end(), a) - sorted_b.begin();
        const auto gt = static_cast<long long>(sorted_b.size()) - le;
        net += lt - gt;
    }
    report.cliffs_delta = static_cast<double>(net) / (n_a * n_b);
    report.cliffs_delta_band = classify_effect_size(report.cliffs_delta);
    return report;
}

/// Benjamini–Hochberg step-up correction.
struct FdrResult {
    std::vector<bool> reject;           ///< in input order
    std::vector<double> adjusted;       ///< monotone adjusted p-values, in input order
    double alpha = 0.05;
};

inline FdrResult bh_fdr(std::span<const double> p_values, double alpha = 0.05) {
    if (p_values.empty()) fail("bh_fdr: empty p-value list");
    for (const double p : p_values) {
        if (p < 0.0 || p > 1.0 || std::isnan(p)) fail("bh_fdr: p-value out of [0, 1]");
    }
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    FdrResult result;
    result.alpha = alpha;
    result.reject.assign(m, false);
    result.adjusted.assign(m, 1.0);

    // Largest k with p(k) ≤ k·α/m; everything up to it is rejected.
    std::size_t cutoff = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double rank = static_cast<double>(i + 1);
        if (p_values[order[i]] <= rank * alpha / static_cast<double>(m)) cutoff = i + 1;
    }
    for (std::size_t i = 0; i < cutoff; ++i) result.reject[order[i]] = true;

    double running_min = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double rank = static_cast<double>(i + 1);
        const double scaled = p_values[order[i]] * static_cast<double>(m) / rank;
        running_min = std::min(running_min, scaled);
        result.adjusted[order[i]] = std::min(running_min, 1.0);
    }
    return result;
}

/// One-way ANOVA F statistic (between-group over within-group mean
/// squares).
inline double anova_f(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) fail("anova_f: need at least 2 groups");
    std::size_t total_n = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.size() < 2) fail("anova_f: each group needs at least 2 samples");
        total_n += g.size();
        for (const double x : g) grand_sum += x;
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean(g);
        ss_between += static_cast<double>(g.size()) * (gm - grand_mean) * (gm - grand_mean);
        for (const double x : g) ss_within += (x - gm) * (x - gm);
    }
    if (ss_within <= 0.0) fail("anova_f: degenerate groups (zero within-group variance)");
    const double df_between = static_cast<double>(groups.size()) - 1.0;
    const double df_within = static_cast<double>(total_n - groups.size());
    return (ss_between / df_between) / (ss_within / df_within);
}

namespace detail {

template <typename T>
void shuffle_in_place(std::vector<T>& xs, SplitMix64& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        const std::size_t j = rng.next_index(i);
        std::swap(xs[i - 1], xs[j]);
    }
}

} // namespace detail

/// One-sided (upper tail) permutation p-value for an arbitrary
/// two-sample statistic: how often a random relabeling scores at least
/// as high as the observed split. Uses the add-one estimate so p is
/// never exactly zero.
template <typename T, typename Statistic>
double permutation_p_stat(std::span<const T> group_a, std::span<const T> group_b,
                          Statistic statistic, int iterations, std::uint64_t seed) {
    if (group_a.empty() || group_b.empty()) fail("permutation test: empty group");
    if (iterations < 1) fail("permutation test: iterations must be >= 1");
    const double observed = statistic(group_a, group_b);
    std::vector<T> pooled;
    pooled.reserve(group_a.size() + group_b.size());
    pooled.insert(pooled.end(), group_a.begin(), group_a.end());
    pooled.insert(pooled.end(), group_b.begin(), group_b.end());

    int hits = 0;
    std::vector<T> scratch(pooled.size());
    for (int it = 0; it < iterations; ++it) {
        // Each iteration shuffles a fresh copy with its own generator,
        // so the outcome does not depend on iteration order.
        auto rng = derive_rng(seed, static_cast<std::uint64_t>(it));
        scratch = pooled;
        detail::shuffle_in_place(scratch, rng);
        const std::span<const T> view(scratch);
        if (statistic(view.subspan(0, group_a.size()), view.subspan(group_a.size())) >=
            observed) {
            ++hits;
        }
    }
    return (1.0 + hits) / (1.0 + iterations);
}

/// Two-sided permutation test on the difference of group means.
inline double permutation_p(std::span<const double> group_a, std::span<const double> group_b,
                            int iterations = 10000, std::uint64_t seed = 42) {
    return permutation_p_stat(
        group_a, group_b,
        [](std::span<const double> a, std::span<const double> b) {
            return std::abs(mean(a) - mean(b));
        },
        iterations, seed);
}

/// Sample Pearson correlation; both series must vary.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail("pearson_r: length mismatch");
    if (x.size() < 3) fail("pearson_r: need at least 3 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) fail("pearson_r: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

/// Two-sided permutation p-value for a correlation: y is shuffled
/// against x and |r| compared with the observed value.
inline double correlation_permutation_p(std::span<const double> x, std::span<const double> y,
                                        int iterations = 10000, std::uint64_t seed = 42) {
    const double observed = std::abs(pearson_r(x, y));
    if (iterations < 1) fail("permutation test: iterations must be >= 1");
    const std::vector<double> original(y.begin(), y.end());
    std::vector<double> shuffled(y.size());
    int hits = 0;
    for (int it = 0; it < iterations; ++it) {
        auto rng = derive_rng(seed, static_cast<std::uint64_t>(it));
        shuffled = original;
        detail::shuffle_in_place(shuffled, rng);
        if (std::abs(pearson_r(x, shuffled)) >= observed) ++hits;
    }
    return (1.0 + hits) / (1.0 + iterations);
}

} // namespace driftwatch
