#include <doctest.h>

#include "fixtures.hpp"
#include "twinforge/analytics.hpp"
#include "twinforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

using namespace twinforge;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

std::vector<Point> line(std::initializer_list<std::pair<double, int>> runs) {
    std::vector<Point> out;
    for (auto [v, count] : runs)
        for (int i = 0; i < count; ++i) out.push_back({v});
    return out;
}

// Piecewise-constant steps plus noise, 1 to 3 dimensions.
std::vector<Point> random_series(SplitMix64& rng, std::size_t n) {
    const std::size_t dims = 1 + rng.next() % 3;
    std::vector<Point> out(n, Point(dims));
    std::vector<double> level(dims);
    for (auto& l : level) l = rng.uniform() * 10;
    const double noise = rng.uniform() * 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.08)
            for (auto& l : level) l = rng.uniform() * 10;
        for (std::size_t d = 0; d < dims; ++d) out[i][d] = level[d] + noise * (rng.uniform() - 0.5);
    }
    return out;
}

FeatureSeries series_of(const std::vector<std::array<double, 3>>& peaks) {
    FeatureSeries fs;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        FeatureBlock b;
        b.index = i;
        b.peaks = peaks[i];
        b.sample_start = i * 50;
        b.sample_end = (i + 1) * 50;
        b.ts_start = static_cast<std::int64_t>(i) * 500;
        fs.blocks.push_back(b);
    }
    return fs;
}

} // namespace

// ---------------------------------------------------------------------------
// Segmentation

TEST_CASE("L2 cost matches the direct definition") {
    SplitMix64 rng(4);
    for (int round = 0; round < 50; ++round) {
        const auto pts = random_series(rng, 40);
        const L2Cost cost(pts);
        for (int q = 0; q < 20; ++q) {
            std::size_t a = rng.next() % 40, b = rng.next() % 40;
            if (a > b) std::swap(a, b);
            ++b;
            CHECK(std::abs(cost(a, b) - fixtures::direct_l2(pts, a, b)) < 1e-9);
        }
    }
}

TEST_CASE("pelt examples") {
    const auto step = line({{0.0, 10}, {10.0, 10}});
    const PeltConfig beta10{10.0, 2};
    const auto seg = pelt_segment(step, beta10);
    CHECK(seg.change_points == std::vector<std::size_t>{10});
    CHECK(seg.total_cost == doctest::Approx(10.0));
    const auto brute = brute_force_segment(step, beta10);
    CHECK(brute.change_points == seg.change_points);
    CHECK(brute.total_cost == seg.total_cost);

    SplitMix64 rng(5);
    std::vector<Point> noisy(20);
    for (auto& p : noisy) p = {rng.uniform() * 10};
    CHECK(pelt_segment(noisy, {1e9, 2}).change_points.empty());

    const auto flat = line({{3.0, 30}});
    for (double beta : {0.001, 1.0, 40.0}) CHECK(pelt_segment(flat, {beta, 2}).change_points.empty());
}

TEST_CASE("brute force examples") {
    CHECK(brute_force_segment(line({{0.0, 1}, {9.0, 1}}), {0.0, 2}).change_points.empty());
    const auto two_step = line({{0.0, 8}, {5.0, 8}, {0.0, 8}});
    CHECK(brute_force_segment(two_step, {1.0, 2}).change_points == std::vector<std::size_t>{8, 16});
    CHECK(pelt_segment(two_step, {1.0, 2}).change_points == std::vector<std::size_t>{8, 16});
}

TEST_CASE("segmentation errors") {
    CHECK(code_of([] { pelt_segment(line({{0.0, 1}}), {10.0, 2}); }) == ErrorCode::SeriesTooShort);
    CHECK(code_of([] { pelt_segment(line({{0.0, 10}}), {-1.0, 2}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { brute_force_segment(line({{0.0, 513}}), {1.0, 2}); }) == ErrorCode::SeriesTooLong);
    std::vector<Point> ragged{{0.0}, {1.0, 2.0}, {3.0}};
    CHECK(code_of([&] { pelt_segment(ragged, {1.0, 1}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("brute force agrees with exhaustive enumeration on small series") {
    SplitMix64 rng(6);
    for (int round = 0; round < 120; ++round) {
        const std::size_t n = 2 + rng.next() % 13;
        const auto pts = random_series(rng, n);
        const double beta = std::array{0.1, 1.0, 10.0, 40.0}[rng.next() % 4];
        const std::size_t m = 1 + rng.next() % 3;
        if (n < m) continue;
        const auto oracle = fixtures::enumerate_best_partition(pts, beta, m);
        const auto got = brute_force_segment(pts, {beta, m});
        CAPTURE(n);
        CAPTURE(beta);
        CAPTURE(m);
        CHECK(std::abs(got.total_cost - oracle.cost) < 1e-9);
        // Costs can tie exactly; only compare change points when the optimum is unique.
        if (got.change_points != oracle.change_points) {
            double alt = 0.0;
            std::size_t prev = 0;
            for (std::size_t k = 0; k <= got.change_points.size(); ++k) {
                const std::size_t end = k < got.change_points.size() ? got.change_points[k] : n;
                alt += fixtures::direct_l2(pts, prev, end);
                prev = end;
            }
            alt += beta * static_cast<double>(got.change_points.size());
            CHECK(std::abs(alt - oracle.cost) < 1e-9);
        }
    }
}

TEST_CASE("pelt equals brute force on randomized series") {
    SplitMix64 rng(7);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = 2 + rng.next() % 127;
        const auto pts = random_series(rng, n);
        const double beta = std::array{1.0, 10.0, 40.0, 160.0}[rng.next() % 4];
        const std::size_t m = 1 + rng.next() % 4;
        if (n < m) continue;
        const PeltConfig cfg{beta, m};
        const auto a = pelt_segment(pts, cfg);
        const auto b = brute_force_segment(pts, cfg);
        CHECK(a.change_points == b.change_points);
        CHECK(std::abs(a.total_cost - b.total_cost) < 1e-9);
    }
}

TEST_CASE("change point count never grows with the penalty") {
    SplitMix64 rng(8);
    for (int round = 0; round < 60; ++round) {
        const auto pts = random_series(rng, 100);
        std::size_t last = pts.size();
        for (double beta : {0.01, 0.1, 1.0, 4.0, 10.0, 40.0, 160.0, 1000.0}) {
            const auto cps = pelt_segment(pts, {beta, 2}).change_points.size();
            CHECK(cps <= last);
            last = cps;
        }
    }
}

TEST_CASE("segmentation invariants") {
    SplitMix64 rng(9);
    for (int round = 0; round < 50; ++round) {
        const auto pts = random_series(rng, 200);
        const auto seg = pelt_segment(pts, {1.0, 3});
        const auto parts = seg.segments();
        CHECK(parts.size() == seg.segment_count());
        CHECK(parts.front().first == 0);
        CHECK(parts.back().second == pts.size());
        for (std::size_t i = 0; i < parts.size(); ++i) {
            CHECK(parts[i].second - parts[i].first >= 3);
            if (i) CHECK(parts[i].first == parts[i - 1].second);
        }
    }
}

// ---------------------------------------------------------------------------
// Clustering

TEST_CASE("kmeans examples") {
    const std::vector<Point> pts{{0.0}, {0.1}, {10.0}, {10.1}};
    const auto m = kmeans_fit(pts, 2, 1);
    std::vector<double> cs{m.centroids[0][0], m.centroids[1][0]};
    std::sort(cs.begin(), cs.end());
    CHECK(cs[0] == doctest::Approx(0.05));
    CHECK(cs[1] == doctest::Approx(10.05));
    CHECK(m.inertia == doctest::Approx(0.01));
    CHECK(m.labels[0] == m.labels[1]);
    CHECK(m.labels[2] == m.labels[3]);
    CHECK(m.labels[0] != m.labels[2]);

    // Exhaustive check over the 2-partitions of the same fixture.
    double best = 1e300;
    for (int mask = 1; mask < 15; ++mask) {
        std::vector<int> labels(4);
        for (int i = 0; i < 4; ++i) labels[i] = mask >> i & 1;
        double cost = 0.0;
        for (int c = 0; c < 2; ++c) {
            std::vector<Point> members;
            for (int i = 0; i < 4; ++i)
                if (labels[i] == c) members.push_back(pts[i]);
            cost += fixtures::direct_l2(members, 0, members.size());
        }
        best = std::min(best, cost);
    }
    CHECK(m.inertia == doctest::Approx(best));

    const auto each = kmeans_fit(pts, 4, 1);
    CHECK(each.inertia == 0.0);
    std::vector<int> labels = each.labels;
    std::sort(labels.begin(), labels.end());
    CHECK(labels == std::vector<int>{0, 1, 2, 3});

    const auto one = kmeans_fit(pts, 1, 1);
    CHECK(one.centroids[0][0] == doctest::Approx(5.05));
}

TEST_CASE("kmeans errors") {
    const std::vector<Point> pts{{0.0}, {1.0}};
    CHECK(code_of([&] { kmeans_fit(pts, 3, 1); }) == ErrorCode::KExceedsN);
    CHECK(code_of([] { kmeans_fit(std::vector<Point>{}, 1, 1); }) == ErrorCode::EmptyInput);
    CHECK(code_of([] { kmeans_fit(std::vector<Point>{{0.0}, {1.0, 2.0}}, 1, 1); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("kmeans_assign") {
    KMeansModel m;
    m.k = 3;
    m.centroids = {{0.0, 0.0}, {5.0, 5.0}, {2.0, 0.0}};
    CHECK(kmeans_assign(m, std::vector<double>{5.0, 5.0}) == 1);
    CHECK(kmeans_assign(m, std::vector<double>{1.0, 0.0}) == 0);  // equidistant to 0 and 2
    CHECK(code_of([&] { kmeans_assign(m, std::vector<double>{1.0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("kmeans is bit-for-bit deterministic with non-increasing inertia") {
    SplitMix64 rng(10);
    for (int round = 0; round < 40; ++round) {
        const auto pts = random_series(rng, 30 + rng.next() % 200);
        const std::size_t k = 1 + rng.next() % 6;
        const std::uint64_t seed = rng.next();
        const auto a = kmeans_fit(pts, k, seed);
        const auto b = kmeans_fit(pts, k, seed);
        CHECK(a.centroids == b.centroids);
        CHECK(a.labels == b.labels);
        CHECK(a.inertia_history == b.inertia_history);
        CHECK(std::memcmp(&a.inertia, &b.inertia, sizeof(double)) == 0);
        CHECK(a.inertia_history.size() == a.iterations_run + 1);
        for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
            CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-9 * std::max(1.0, a.inertia_history[i - 1]));
        std::vector<std::size_t> sizes(k, 0);
        for (int l : a.labels) ++sizes[static_cast<std::size_t>(l)];
        for (auto s : sizes) CHECK(s > 0);
    }
}

TEST_CASE("kmeans is locally optimal under single-point relabeling") {
    SplitMix64 rng(11);
    for (int round = 0; round < 60; ++round) {
        const std::size_t n = 6 + rng.next() % 45;
        const auto pts = random_series(rng, n);
        const std::size_t k = 2 + rng.next() % 4;
        const auto model = kmeans_fit(pts, k, rng.next());

        auto sse = [&](const std::vector<int>& labels) {
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                std::vector<Point> members;
                for (std::size_t i = 0; i < n; ++i)
                    if (labels[i] == static_cast<int>(c)) members.push_back(pts[i]);
                if (!members.empty()) total += fixtures::direct_l2(members, 0, members.size());
            }
            return total;
        };
        const double base = sse(model.labels);
        CHECK(std::abs(base - model.inertia) < 1e-9 * std::max(1.0, base));
        std::vector<std::size_t> sizes(k, 0);
        for (int l : model.labels) ++sizes[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < n; ++i) {
            // Moves that empty a cluster are not k-partitions and are skipped.
            if (sizes[static_cast<std::size_t>(model.labels[i])] < 2) continue;
            for (std::size_t c = 0; c < k; ++c) {
                if (static_cast<int>(c) == model.labels[i]) continue;
                auto moved = model.labels;
                moved[i] = static_cast<int>(c);
                CHECK(sse(moved) >= base - 1e-9 * std::max(1.0, base));
            }
        }
        // Every label is the nearest centroid.
        for (std::size_t i = 0; i < n; ++i) CHECK(kmeans_assign(model, pts[i]) == model.labels[i]);
    }
}

TEST_CASE("uniform scaling leaves kmeans labels unchanged") {
    SplitMix64 rng(12);
    for (int round = 0; round < 30; ++round) {
        const auto pts = random_series(rng, 80);
        const std::uint64_t seed = rng.next();
        const auto base = kmeans_fit(pts, 3, seed);
        for (double c : {0.25, 2.0, 1024.0, 3.7}) {
            auto scaled = pts;
            for (auto& p : scaled)
                for (auto& v : p) v *= c;
            CHECK(kmeans_fit(scaled, 3, seed).labels == base.labels);
        }
    }
}

// ---------------------------------------------------------------------------
// Scoring

TEST_CASE("silhouette examples") {
    const std::vector<Point> pts{{0.0}, {0.1}, {10.0}, {10.1}};
    const std::vector<int> labels{0, 0, 1, 1};
    // a = 0.1 everywhere; b = 10.05 for the outer points and 9.95 for the inner ones.
    const double s_outer = (10.05 - 0.1) / 10.05;
    const double s_inner = (9.95 - 0.1) / 9.95;
    const double expected = (2 * s_outer + 2 * s_inner) / 4;
    CHECK(silhouette_score(pts, labels) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(silhouette_score(pts, labels) == doctest::Approx(0.99).epsilon(0.001));

    CHECK(silhouette_score(pts, std::vector<int>{4, 4, 4, 4}) == 0.0);
    CHECK(code_of([&] { silhouette_score(pts, std::vector<int>{0, 1}); }) == ErrorCode::LengthMismatch);
    CHECK(code_of([] { silhouette_score(std::vector<Point>{{1.0}}, std::vector<int>{0}); }) == ErrorCode::TooFewPoints);
}

TEST_CASE("silhouette matches the naive oracle and stays in [-1, 1]") {
    SplitMix64 rng(13);
    for (int round = 0; round < 150; ++round) {
        const std::size_t n = 2 + rng.next() % 299;
        const std::size_t dims = 1 + rng.next() % 4;
        const int k = 1 + static_cast<int>(rng.next() % 7);
        std::vector<Point> pts(n, Point(dims));
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k)) * 3 - 2;  // sparse, negative labels
            for (auto& v : pts[i]) v = rng.uniform() * 5 + labels[i];
        }
        const double got = silhouette_score(pts, labels);
        CHECK(std::abs(got - fixtures::naive_silhouette(pts, labels)) < 1e-9);
        CHECK(got >= -1.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("segment_features labels by majority with ties to the lowest") {
    const auto fs = series_of({{1, 2, 3}, {3, 2, 1}, {5, 5, 5}, {0, 0, 0}, {2, 2, 2}});
    Segmentation one{5, {}, 0.0};
    auto recs = segment_features(fs, one, std::vector<int>{2, 2, 2, 2, 2});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].cluster_label == 2);
    CHECK(recs[0].stats.duration_blocks == 5);
    CHECK(recs[0].stats.max == std::array<double, 3>{5, 5, 5});
    CHECK(recs[0].stats.mean[0] == doctest::Approx(11.0 / 5));

    Segmentation split{5, {3}, 0.0};
    recs = segment_features(fs, split, std::vector<int>{1, 1, 2, 2, 1});
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].cluster_label == 1);
    CHECK(recs[1].cluster_label == 1);  // {2, 1} tie
    CHECK(recs[1].block_start == 3);
    CHECK(recs[1].created_ts == 1500);
    CHECK(code_of([&] { segment_features(fs, split, std::vector<int>{1, 1}); }) == ErrorCode::LengthMismatch);
}
