#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/numeric.hpp"
#include "driftwatch/rng.hpp"

namespace driftwatch {

/// One comparison method's verdict on a window pair. details carries
/// every tuned constant the score depended on, so a reader can rerun it.
struct BaselineScore {
    std::string method;
    double score = 0.0;
    std::map<std::string, double> details;
};

/// Sparse TF-IDF document vector, term → weight.
using SparseVector = std::map<std::string, double>;

/// Kolmogorov–Smirnov statistic: the largest vertical gap between the
/// two empirical CDFs.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) fail("ks_statistic: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    double sup = 0.0;
    while (ia < sa.size() && ib < sb.size()) {
        const double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] <= x) ++ia;
        while (ib < sb.size() && sb[ib] <= x) ++ib;
        sup = std::max(sup, std::abs(static_cast<double>(ia) / na -
                                     static_cast<double>(ib) / nb));
    }
    return sup;
}

/// Population Stability Index over n_bins reference-quantile bins.
/// Both bin proportions are floored at eps before the (p_c − p_r)·ln
/// ratio terms, so empty bins contribute finite penalties.
inline double psi(std::span<const double> reference, std::span<const double> candidate,
                  int n_bins = 10, double eps = 1e-4) {
    if (reference.empty() || candidate.empty()) fail("psi: empty sample");
    if (n_bins < 2) fail("psi: n_bins must be >= 2");
    std::vector<double> sorted_ref(reference.begin(), reference.end());
    std::sort(sorted_ref.begin(), sorted_ref.end());

    // Interior quantile cuts; outermost bins absorb anything beyond the
    // reference range and a value equal to a cut falls in the higher bin.
    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(n_bins) - 1);
    for (int j = 1; j < n_bins; ++j) {
        cuts.push_back(quantile_sorted(sorted_ref, static_cast<double>(j) / n_bins));
    }
    const auto bin_of = [&](double v) {
        return static_cast<std::size_t>(
            std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
    };
    std::vector<double> p_ref(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<double> p_cand(static_cast<std::size_t>(n_bins), 0.0);
    for (const double v : reference) p_ref[bin_of(v)] += 1.0 / static_cast<double>(reference.size());
    for (const double v : candidate) {
        p_cand[bin_of(v)] += 1.0 / static_cast<double>(candidate.size());
    }
    double score = 0.0;
    for (int i = 0; i < n_bins; ++i) {
        const double pr = std::max(p_ref[static_cast<std::size_t>(i)], eps);
        const double pc = std::max(p_cand[static_cast<std::size_t>(i)], eps);
        score += (pc - pr) * std::log(pc / pr);
    }
    return score;
}

/// 1-D Wasserstein distance: area between the two empirical CDFs. For
/// equal sizes this reduces to the mean gap between sorted samples.
inline double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) fail("wasserstein_1d: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<double> grid;
    grid.reserve(sa.size() + sb.size());
    grid.insert(grid.end(), sa.begin(), sa.end());
    grid.insert(grid.end(), sb.begin(), sb.end());
    std::sort(grid.begin(), grid.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    double dist = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double x = grid[i];
        const double width = grid[i + 1] - x;
        if (width <= 0.0) continue;
        const double fa = static_cast<double>(std::upper_bound(sa.begin(), sa.end(), x) -
                                              sa.begin()) / na;
        const double fb = static_cast<double>(std::upper_bound(sb.begin(), sb.end(), x) -
                                              sb.begin()) / nb;
        dist += std::abs(fa - fb) * width;
    }
    return dist;
}

namespace detail {

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (const char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            if (cur.size() >= 2) tokens.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) tokens.push_back(cur);
    return tokens;
}

} // namespace detail

/// TF-IDF vectors over a shared vocabulary: tf is the raw in-document
/// count, idf = ln((1+N)/(1+df)) + 1, and each non-empty document is
/// L2-normalized. Fit the vocabulary on the union of the windows being
/// compared, then split the result.
inline std::vector<SparseVector> tfidf_vectorize(std::span<const std::string> corpus) {
    if (corpus.empty()) fail("tfidf_vectorize: empty corpus");
    std::vector<std::map<std::string, std::size_t>> term_counts;
    term_counts.reserve(corpus.size());
    std::map<std::string, std::size_t> doc_freq;
    bool any_tokens = false;
    for (const auto& text : corpus) {
        std::map<std::string, std::size_t> counts;
        for (auto& tok : detail::tokenize(text)) ++counts[tok];
        for (const auto& [term, c] : counts) ++doc_freq[term];
        if (!counts.empty()) any_tokens = true;
        term_counts.push_back(std::move(counts));
    }
    if (!any_tokens) fail("tfidf_vectorize: no tokens in corpus");

    const double n_docs = static_cast<double>(corpus.size());
    std::vector<SparseVector> vectors;
    vectors.reserve(corpus.size());
    for (const auto& counts : term_counts) {
        SparseVector vec;
        double norm_sq = 0.0;
        for (const auto& [term, c] : counts) {
            const double idf =
                std::log((1.0 + n_docs) / (1.0 + static_cast<double>(doc_freq.at(term)))) + 1.0;
            const double w = static_cast<double>(c) * idf;
            vec[term] = w;
            norm_sq += w * w;
        }
        if (norm_sq > 0.0) {
            const double norm = std::sqrt(norm_sq);
            for (auto& [term, w] : vec) w /= norm;
        }
        vectors.push_back(std::move(vec));
    }
    return vectors;
}

namespace detail {

inline SparseVector sparse_centroid(std::span<const SparseVector> vecs) {
    SparseVector centroid;
    for (const auto& v : vecs) {
        for (const auto& [term, w] : v) centroid[term] += w;
    }
    for (auto& [term, w] : centroid) w /= static_cast<double>(vecs.size());
    return centroid;
}

inline double sparse_cosine(const SparseVector& a, const SparseVector& b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [term, w] : a) {
        na += w * w;
        const auto it = b.find(term);
        if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [term, w] : b) nb += w * w;
    if (na <= 0.0 || nb <= 0.0) fail("degenerate centroid");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace detail

/// Cosine distance between the mean vectors of two windows of dense
/// embeddings.
inline double centroid_drift(std::span<const std::vector<double>> pre_vecs,
                             std::span<const std::vector<double>> post_vecs) {
    if (pre_vecs.empty() || post_vecs.empty()) fail("centroid_drift: empty window");
    const std::size_t dim = pre_vecs.front().size();
    std::vector<double> ca(dim, 0.0);
    std::vector<double> cb(dim, 0.0);
    for (const auto& v : pre_vecs) {
        if (v.size() != dim) fail("centroid_drift: dimensionality mismatch");
        for (std::size_t i = 0; i < dim; ++i) ca[i] += v[i];
    }
    for (const auto& v : post_vecs) {
        if (v.size() != dim) fail("centroid_drift: dimensionality mismatch");
        for (std::size_t i = 0; i < dim; ++i) cb[i] += v[i];
    }
    for (auto& x : ca) x /= static_cast<double>(pre_vecs.size());
    for (auto& x : cb) x /= static_cast<double>(post_vecs.size());
    const double na = l2_norm(ca);
    const double nb = l2_norm(cb);
    if (na <= 0.0 || nb <= 0.0) fail("degenerate centroid");
    return 1.0 - dot(ca, cb) / (na * nb);
}

/// Cosine distance between TF-IDF centroids of two text windows, with
/// the vocabulary fit on their union.
inline double tfidf_centroid_drift(std::span<const std::string> pre_texts,
                                   std::span<const std::string> post_texts) {
    if (pre_texts.empty() || post_texts.empty()) fail("tfidf_centroid_drift: empty window");
    std::vector<std::string> corpus;
    corpus.reserve(pre_texts.size() + post_texts.size());
    corpus.insert(corpus.end(), pre_texts.begin(), pre_texts.end());
    corpus.insert(corpus.end(), post_texts.begin(), post_texts.end());
    const auto vecs = tfidf_vectorize(corpus);
    const std::span<const SparseVector> all(vecs);
    const auto ca = detail::sparse_centroid(all.subspan(0, pre_texts.size()));
    const auto cb = detail::sparse_centroid(all.subspan(pre_texts.size()));
    return 1.0 - detail::sparse_cosine(ca, cb);
}

/// Maximum Mean Discrepancy with an RBF kernel, biased (V-statistic)
/// form, so the squared estimate is never negative up to rounding.
/// Bandwidth defaults to the median heuristic — the median of nonzero
/// pairwise squared distances over the pooled set (1.0 if all points
/// coincide) — and may be pinned explicitly via sigma_sq.
inline double mmd_rbf(std::span<const std::vector<double>> x,
                      std::span<const std::vector<double>> y,
                      std::optional<double> sigma_sq = std::nullopt,
                      double* sigma_sq_used = nullptr) {
    if (x.empty() || y.empty()) fail("mmd_rbf: empty sample");
    const std::size_t dim = x.front().size();
    for (const auto& v : x) {
        if (v.size() != dim) fail("mmd_rbf: dimensionality mismatch");
    }
    for (const auto& v : y) {
        if (v.size() != dim) fail("mmd_rbf: dimensionality mismatch");
    }

    double bandwidth = 1.0;
    if (sigma_sq) {
        if (*sigma_sq <= 0.0) fail("mmd_rbf: sigma_sq must be positive");
        bandwidth = *sigma_sq;
    } else {
        std::vector<const std::vector<double>*> pooled;
        pooled.reserve(x.size() + y.size());
        for (const auto& v : x) pooled.push_back(&v);
        for (const auto& v : y) pooled.push_back(&v);
        std::vector<double> dists;
        dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            for (std::size_t j = i + 1; j < pooled.size(); ++j) {
                const double d = squared_distance(*pooled[i], *pooled[j]);
                if (d > 0.0) dists.push_back(d);
            }
        }
        if (!dists.empty()) {
            std::sort(dists.begin(), dists.end());
            const std::size_t n = dists.size();
            bandwidth = n % 2 == 1 ? dists[n / 2]
                                   : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
        }
    }
    if (sigma_sq_used != nullptr) *sigma_sq_used = bandwidth;

    const auto kernel_mean = [&](std::span<const std::vector<double>> a,
                                 std::span<const std::vector<double>> b) {
        double sum = 0.0;
        for (const auto& u : a) {
            for (const auto& v : b) {
                sum += std::exp(-squared_distance(u, v) / (2.0 * bandwidth));
            }
        }
        return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
    };
    const double mmd_sq = kernel_mean(x, x) + kernel_mean(y, y) - 2.0 * kernel_mean(x, y);
    return std::sqrt(std::max(mmd_sq, 0.0));
}

/// Jensen–Shannon divergence in bits between two same-length
/// distributions; symmetric and bounded by 1.
inline double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) fail("js_divergence: length mismatch");
    if (p.empty()) fail("js_divergence: empty distribution");
    double js = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) fail("negative probability in distribution");
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log2(q[i] / m);
    }
    return js;
}

namespace detail {

/// Lloyd's k-means with greedy farthest-point seeding. Deterministic
/// for a fixed seed: only the first center is random, every later
/// choice breaks ties toward the lower index.
inline std::vector<std::size_t> kmeans_assign(std::span<const std::vector<double>> points,
                                              int k, std::uint64_t seed, int max_iters = 100,
                                              double tol = 1e-6) {
    const auto n = points.size();
    const std::size_t dim = points.front().size();
    std::vector<std::vector<double>> centers;
    centers.reserve(static_cast<std::size_t>(k));
    SplitMix64 rng(seed);
    centers.push_back(points[rng.next_index(n)]);
    std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());
    while (centers.size() < static_cast<std::size_t>(k)) {
        std::size_t farthest = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest_sq[i] = std::min(nearest_sq[i], squared_distance(points[i], centers.back()));
            if (nearest_sq[i] > best) {
                best = nearest_sq[i];
                farthest = i;
            }
        }
        centers.push_back(points[farthest]);
    }

    std::vector<std::size_t> assignment(n, 0);
    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_c = 0;
            for (std::size_t c = 0; c < centers.size(); ++c) {
                const double d = squared_distance(points[i], centers[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
        }
        std::vector<std::vector<double>> next(centers.size(), std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(centers.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assignment[i]];
            for (std::size_t d = 0; d < dim; ++d) next[assignment[i]][d] += points[i][d];
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (counts[c] == 0) continue; // empty cluster keeps its center
            for (std::size_t d = 0; d < dim; ++d) {
                next[c][d] /= static_cast<double>(counts[c]);
            }
            movement = std::max(movement, std::sqrt(squared_distance(next[c], centers[c])));
            centers[c] = std::move(next[c]);
        }
        if (movement <= tol) break;
    }
    return assignment;
}

} // namespace detail

/// Clusters the pooled embeddings with k-means, then measures how
/// differently the two windows populate the clusters (base-2 JS
/// divergence of the assignment distributions, lightly smoothed).
inline double clustering_drift(std::span<const std::vector<double>> x,
                               std::span<const std::vector<double>> y, int k,
                               std::uint64_t seed) {
    if (k < 2) fail("clustering_drift: k must be >= 2");
    if (x.empty() || y.empty()) fail("clustering_drift: empty window");
    if (x.size() + y.size() < static_cast<std::size_t>(k)) {
        fail("clustering_drift: k exceeds pooled size");
    }
    const std::size_t dim = x.front().size();
    std::vector<std::vector<double>> pooled;
    pooled.reserve(x.size() + y.size());
    for (const auto& v : x) {
        if (v.size() != dim) fail("clustering_drift: dimensionality mismatch");
        pooled.push_back(v);
    }
    for (const auto& v : y) {
        if (v.size() != dim) fail("clustering_drift: dimensionality mismatch");
        pooled.push_back(v);
    }
    const auto assignment = detail::kmeans_assign(pooled, k, seed);

    constexpr double kEps = 1e-9;
    std::vector<double> px(static_cast<std::size_t>(k), 0.0);
    std::vector<double> py(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) px[assignment[i]] += 1.0;
    for (std::size_t i = x.size(); i < pooled.size(); ++i) py[assignment[i]] += 1.0;
    // Add-ε smoothing keeps the logs finite and the masses normalized.
    for (auto& p : px) p = (p + kEps) / (static_cast<double>(x.size()) + k * kEps);
    for (auto& p : py) p = (p + kEps) / (static_cast<double>(y.size()) + k * kEps);
    return js_divergence(px, py);
}

} // namespace driftwatch
