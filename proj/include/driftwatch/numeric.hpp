#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "driftwatch/common.hpp"

namespace driftwatch {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) fail("mean of empty sample");
    double sum = 0.0;
    for (const double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

/// Sample variance (divisor n−1). Zero for a single point.
inline double sample_variance(std::span<const double> xs) {
    if (xs.empty()) fail("variance of empty sample");
    if (xs.size() == 1) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (const double x : xs) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

/// Population variance (divisor n).
inline double population_variance(std::span<const double> xs) {
    if (xs.empty()) fail("variance of empty sample");
    const double m = mean(xs);
    double ss = 0.0;
    for (const double x : xs) {
        const double d = x - m;
        ss += d * d;
    }
    return ss / static_cast<double>(xs.size());
}

inline double population_stddev(std::span<const double> xs) {
    return std::sqrt(population_variance(xs));
}

/// Quantile by linear interpolation at rank h = q·(n−1) over sorted
/// data (the common "type 7" rule).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) fail("quantile of empty sample");
    if (q < 0.0 || q > 1.0) fail("quantile level out of [0, 1]");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    if (lo == hi) return sorted[lo];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    return quantile_sorted(xs, q);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail("dot product dimensionality mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

inline double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail("distance dimensionality mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

} // namespace driftwatch
