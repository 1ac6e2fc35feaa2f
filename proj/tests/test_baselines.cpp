#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include <driftwatch/baselines.hpp>
#include <driftwatch/rng.hpp>

#include "oracles.hpp"

using namespace driftwatch;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_sample(SplitMix64& rng, std::size_t max_n = 50, double lo = 0.0,
                                  double hi = 1.0) {
    std::vector<double> xs(2 + rng.next_index(max_n - 1));
    for (auto& x : xs) x = lo + (hi - lo) * rng.next_double();
    return xs;
}

std::vector<std::vector<double>> random_points(SplitMix64& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts) {
        for (auto& x : p) x = rng.next_normal(0.0, 1.0);
    }
    return pts;
}

} // namespace

TEST_CASE("ks statistic on the stated examples") {
    const std::vector<double> a = {1.0, 2.0};
    REQUIRE(ks_statistic(a, a) == 0.0);
    const std::vector<double> b = {3.0, 4.0};
    REQUIRE(ks_statistic(a, b) == 1.0);
    const std::vector<double> c = {1.0, 3.0};
    const std::vector<double> d = {2.0, 4.0};
    REQUIRE_THAT(ks_statistic(c, d), WithinAbs(0.5, 1e-15));
    REQUIRE_THROWS_WITH(ks_statistic({}, a), ContainsSubstring("empty sample"));
}

TEST_CASE("ks matches the ECDF-enumeration oracle and its invariances") {
    SplitMix64 rng(101);
    for (int trial = 0; trial < 120; ++trial) {
        const auto a = random_sample(rng);
        const auto b = random_sample(rng);
        const double lib = ks_statistic(a, b);
        REQUIRE_THAT(lib, WithinAbs(oracle::ks(a, b), 1e-9));
        REQUIRE_THAT(ks_statistic(b, a), WithinAbs(lib, 1e-15)); // symmetry

        // Invariance under a strictly monotone transform of both samples.
        auto ta = a;
        auto tb = b;
        for (auto& x : ta) x = std::exp(3.0 * x) - 1.0;
        for (auto& x : tb) x = std::exp(3.0 * x) - 1.0;
        REQUIRE_THAT(ks_statistic(ta, tb), WithinAbs(lib, 1e-12));
    }
}

TEST_CASE("psi is near zero on identical windows") {
    SplitMix64 rng(11);
    const auto ref = random_sample(rng, 50);
    REQUIRE(std::abs(psi(ref, ref)) <= 1e-9);
}

TEST_CASE("psi on a candidate shifted wholly past the reference") {
    const std::vector<double> ref = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const std::vector<double> cand(20, 100.0); // far beyond max(ref)
    const double lib = psi(ref, cand);
    REQUIRE_THAT(lib, WithinAbs(oracle::psi(ref, cand, 10), 1e-9));
    // All candidate mass lands in the top bin: 9 eps-floored deficit terms
    // plus one (1 - 0.1) * ln(1/0.1) surplus term.
    const double hand = 9.0 * (1e-4 - 0.1) * std::log(1e-4 / 0.1) +
                        (1.0 - 0.1) * std::log(1.0 / 0.1);
    REQUIRE_THAT(lib, WithinAbs(hand, 1e-9));
    REQUIRE(lib > 5.0);
}

TEST_CASE("psi with all candidate mass concentrated in one of 10 bins") {
    // Uniform reference: 1000 evenly spread values, 100 per decile bin.
    std::vector<double> ref(1000);
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = static_cast<double>(i);
    const std::vector<double> cand(200, 550.0); // middle of the sixth bin
    const double hand = (1.0 - 0.1) * std::log(1.0 / 0.1) +
                        9.0 * (1e-4 - 0.1) * std::log(1e-4 / 0.1);
    REQUIRE_THAT(psi(ref, cand), WithinAbs(hand, 1e-9));
    REQUIRE_THAT(psi(ref, cand), WithinAbs(oracle::psi(ref, cand, 10), 1e-9));
}

TEST_CASE("psi matches the direct-definition oracle on random windows") {
    SplitMix64 rng(102);
    for (int trial = 0; trial < 120; ++trial) {
        const auto ref = random_sample(rng);
        const auto cand = random_sample(rng);
        REQUIRE_THAT(psi(ref, cand), WithinAbs(oracle::psi(ref, cand, 10), 1e-9));
    }
    const std::vector<double> two = {1.0, 2.0};
    const std::vector<double> one = {1.0};
    REQUIRE_THROWS_WITH(psi(two, one, 1), ContainsSubstring("n_bins"));
}

TEST_CASE("wasserstein on the stated examples") {
    const std::vector<double> a = {0.3, 0.7, 0.9};
    REQUIRE(wasserstein_1d(a, a) == 0.0);
    REQUIRE_THAT(wasserstein_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 2.0}),
                 WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(wasserstein_1d(std::vector<double>{0.0}, std::vector<double>{5.0}),
                 WithinAbs(5.0, 1e-12));
}

TEST_CASE("wasserstein matches the quantile-function oracle and scales linearly") {
    SplitMix64 rng(103);
    for (int trial = 0; trial < 120; ++trial) {
        const auto a = random_sample(rng);
        const auto b = random_sample(rng);
        const double lib = wasserstein_1d(a, b);
        REQUIRE_THAT(lib, WithinAbs(oracle::wasserstein(a, b), 1e-9));
        REQUIRE_THAT(wasserstein_1d(b, a), WithinAbs(lib, 1e-12));

        auto ca = a;
        auto cb = b;
        for (auto& x : ca) x *= 3.5;
        for (auto& x : cb) x *= 3.5;
        REQUIRE_THAT(wasserstein_1d(ca, cb), WithinAbs(3.5 * lib, 1e-9));
    }
}

TEST_CASE("tfidf vectors on degenerate corpora") {
    const std::vector<std::string> twins = {"good market news", "good market news"};
    const auto v = tfidf_vectorize(twins);
    REQUIRE(v.size() == 2);
    REQUIRE(v[0] == v[1]);
    double norm_sq = 0.0;
    for (const auto& [term, w] : v[0]) norm_sq += w * w;
    REQUIRE_THAT(norm_sq, WithinAbs(1.0, 1e-12));

    const std::vector<std::string> disjoint = {"alpha beta", "gamma delta"};
    const auto u = tfidf_vectorize(disjoint);
    double dot = 0.0;
    for (const auto& [term, w] : u[0]) {
        const auto it = u[1].find(term);
        if (it != u[1].end()) dot += w * it->second;
    }
    REQUIRE(dot == 0.0);

    REQUIRE_THROWS_WITH(tfidf_vectorize(std::vector<std::string>{"", "!!"}),
                        ContainsSubstring("no tokens"));
}

TEST_CASE("tfidf weights match the hand-computed three-document oracle") {
    const std::vector<std::string> corpus = {"market up up", "market down", "volatile market up"};
    const auto lib = tfidf_vectorize(corpus);
    const auto ref = oracle::tfidf({{"market", "up", "up"},
                                    {"market", "down"},
                                    {"volatile", "market", "up"}});
    REQUIRE(lib.size() == ref.vectors.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        REQUIRE(lib[i].size() == ref.vectors[i].size());
        for (const auto& [term, w] : ref.vectors[i]) {
            REQUIRE(lib[i].count(term) == 1);
            REQUIRE_THAT(lib[i].at(term), WithinAbs(w, 1e-12));
        }
    }
}

TEST_CASE("tokenizer lowercases and keeps alphanumeric runs of length 2+") {
    const auto toks = detail::tokenize("The U.S. Fed hiked: rates2… now!");
    REQUIRE(toks == std::vector<std::string>{"the", "fed", "hiked", "rates2", "now"});
}

TEST_CASE("centroid drift on the stated examples") {
    const std::vector<std::vector<double>> e1 = {{1.0, 0.0}, {1.0, 0.0}};
    REQUIRE_THAT(centroid_drift(e1, e1), WithinAbs(0.0, 1e-15));
    const std::vector<std::vector<double>> e2 = {{0.0, 1.0}};
    REQUIRE_THAT(centroid_drift(e1, e2), WithinAbs(1.0, 1e-15));
    const std::vector<std::vector<double>> zero = {{0.0, 0.0}};
    REQUIRE_THROWS_WITH(centroid_drift(e1, zero), ContainsSubstring("degenerate centroid"));
    const std::vector<std::vector<double>> wider = {{1.0, 0.0, 0.0}};
    REQUIRE_THROWS_WITH(centroid_drift(e1, wider), ContainsSubstring("dimensionality mismatch"));
}

TEST_CASE("centroid drift matches the straight-line oracle on random windows") {
    SplitMix64 rng(104);
    for (int trial = 0; trial < 120; ++trial) {
        const auto a = random_points(rng, 10, 4);
        const auto b = random_points(rng, 10, 4);
        REQUIRE_THAT(centroid_drift(a, b), WithinAbs(oracle::centroid(a, b), 1e-9));
    }
}

TEST_CASE("tfidf centroid drift separates disjoint-vocabulary windows") {
    const std::vector<std::string> pre = {"stocks rally strongly", "stocks rally again"};
    const std::vector<std::string> post = {"weather cold tomorrow", "weather mild tomorrow"};
    REQUIRE_THAT(tfidf_centroid_drift(pre, pre), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(tfidf_centroid_drift(pre, post), WithinAbs(1.0, 1e-12));
}

TEST_CASE("mmd on the stated examples") {
    const auto x = std::vector<std::vector<double>>{{0.0}, {0.0}};
    REQUIRE_THAT(mmd_rbf(x, x), WithinAbs(0.0, 1e-12));

    // Far-apart point masses with a pinned unit bandwidth: the cross term
    // vanishes and the statistic approaches sqrt(2).
    const auto y = std::vector<std::vector<double>>{{1e6}, {1e6}};
    REQUIRE_THAT(mmd_rbf(x, y, 1.0), WithinAbs(std::sqrt(2.0), 1e-12));

    const auto wider = std::vector<std::vector<double>>{{0.0, 0.0}};
    REQUIRE_THROWS_WITH(mmd_rbf(x, wider), ContainsSubstring("dimensionality mismatch"));
    REQUIRE_THROWS_WITH(mmd_rbf(x, y, -1.0), ContainsSubstring("sigma_sq"));
}

TEST_CASE("mmd matches the double-loop kernel-sum oracle") {
    SplitMix64 rng(105);
    for (int trial = 0; trial < 60; ++trial) {
        const auto x = random_points(rng, 5, 3);
        const auto y = random_points(rng, 5, 3);
        // Median-heuristic path.
        REQUIRE_THAT(mmd_rbf(x, y), WithinAbs(oracle::mmd(x, y), 1e-12));
        // Pinned-bandwidth path.
        const double sigma_sq = 0.5 + 2.0 * rng.next_double();
        REQUIRE_THAT(mmd_rbf(x, y, sigma_sq), WithinAbs(oracle::mmd(x, y, sigma_sq), 1e-12));
        // Symmetry.
        REQUIRE_THAT(mmd_rbf(y, x), WithinAbs(mmd_rbf(x, y), 1e-12));
    }
}

TEST_CASE("mmd reports the bandwidth it used") {
    const auto x = std::vector<std::vector<double>>{{0.0}, {1.0}};
    const auto y = std::vector<std::vector<double>>{{2.0}};
    double used = 0.0;
    mmd_rbf(x, y, std::nullopt, &used);
    // Nonzero pairwise squared distances are {1, 1, 4}; the median is 1.
    REQUIRE_THAT(used, WithinAbs(1.0, 1e-15));
    mmd_rbf(x, y, 2.5, &used);
    REQUIRE(used == 2.5);
    // All-coincident points fall back to a unit bandwidth.
    const auto same = std::vector<std::vector<double>>{{3.0}, {3.0}};
    mmd_rbf(same, same, std::nullopt, &used);
    REQUIRE(used == 1.0);
}

TEST_CASE("js divergence on the stated examples") {
    const std::vector<double> p = {1.0, 0.0};
    const std::vector<double> q = {0.0, 1.0};
    REQUIRE(js_divergence(p, p) == 0.0);
    REQUIRE_THAT(js_divergence(p, q), WithinAbs(1.0, 1e-15));
    const std::vector<double> even = {0.5, 0.5};
    const std::vector<double> skew = {0.9, 0.1};
    REQUIRE_THAT(js_divergence(even, skew), WithinAbs(oracle::js(even, skew), 1e-15));
    REQUIRE_THAT(js_divergence(even, skew), WithinAbs(0.146793, 1e-6));
    const std::vector<double> three = {0.2, 0.3, 0.5};
    REQUIRE_THROWS_WITH(js_divergence(three, even), ContainsSubstring("length mismatch"));
    const std::vector<double> negative = {1.1, -0.1};
    REQUIRE_THROWS_WITH(js_divergence(negative, even), ContainsSubstring("negative"));
}

TEST_CASE("js divergence matches the oracle and stays symmetric and bounded") {
    SplitMix64 rng(106);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t k = 2 + rng.next_index(5);
        std::vector<double> p(k);
        std::vector<double> q(k);
        double sp = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            p[i] = rng.next_open_closed();
            q[i] = rng.next_open_closed();
            sp += p[i];
            sq += q[i];
        }
        for (auto& v : p) v /= sp;
        for (auto& v : q) v /= sq;
        const double lib = js_divergence(p, q);
        REQUIRE_THAT(lib, WithinAbs(oracle::js(p, q), 1e-12));
        REQUIRE_THAT(js_divergence(q, p), WithinAbs(lib, 1e-12));
        REQUIRE(lib >= -1e-12);
        REQUIRE(lib <= 1.0 + 1e-12);
    }
}

TEST_CASE("clustering drift separates two far blobs and is deterministic") {
    SplitMix64 rng(107);
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> y;
    for (int i = 0; i < 30; ++i) {
        // Blob radius ~1 at the origin; the second blob sits 100x away.
        x.push_back({rng.next_normal(0.0, 1.0), rng.next_normal(0.0, 1.0)});
        y.push_back({rng.next_normal(100.0, 1.0), rng.next_normal(100.0, 1.0)});
    }
    const double drift = clustering_drift(x, y, 2, 42);
    REQUIRE(drift > 1.0 - 1e-6);
    REQUIRE(drift <= 1.0 + 1e-12);
    REQUIRE(clustering_drift(x, y, 2, 42) == drift);

    const double self_drift = clustering_drift(x, x, 2, 42);
    REQUIRE(std::abs(self_drift) <= 1e-9);

    REQUIRE_THROWS_WITH(clustering_drift(x, y, 100, 42), ContainsSubstring("exceeds pooled"));
    REQUIRE_THROWS_WITH(clustering_drift(x, y, 1, 42), ContainsSubstring("k must be >= 2"));
}
