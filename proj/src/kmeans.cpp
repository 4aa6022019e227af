#include "twinforge/analytics.hpp"

#include "twinforge/error.hpp"
#include "twinforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace twinforge {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

namespace {

int nearest(const std::vector<Point>& centroids, std::span<const double> p) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<Point> seed_plus_plus(std::span<const Point> points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.size();
    SplitMix64 rng(mix64(seed));
    std::vector<Point> centroids;
    std::vector<bool> chosen(n, false);

    std::size_t first = std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
    centroids.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

    while (centroids.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = n;
        const double r = rng.uniform() * total;
        if (total > 0.0) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // rounding left r at the very top of the range
                for (std::size_t i = n; i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        } else {
            // All remaining points coincide with a centroid.
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
    return centroids;
}

// Gives every empty cluster the point farthest from its own centroid,
// taken from clusters that keep at least one member.
void repair_empty(std::span<const Point> points, std::vector<Point>& centroids, std::vector<int>& labels) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] != 0) continue;
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto c = static_cast<std::size_t>(labels[i]);
            if (counts[c] < 2) continue;
            const double d = squared_distance(points[i], centroids[c]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == points.size()) break;
        --counts[static_cast<std::size_t>(labels[far])];
        labels[far] = static_cast<int>(j);
        ++counts[j];
        centroids[j] = points[far];
    }
}

double inertia_of(std::span<const Point> points, const std::vector<Point>& centroids, const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        total += squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
    return total;
}


std::vector<Point> means_of(std::span<const Point> points, const std::vector<int>& labels, std::size_t k,
                            const std::vector<Point>& fallback) {
    const std::size_t dims = points[0].size();
    std::vector<Point> sums(k, Point(dims, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t d = 0; d < dims; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            sums[c] = fallback[c];
        } else {
            for (auto& v : sums[c]) v /= static_cast<double>(counts[c]);
        }
    }
    return sums;
}

// Hartigan refinement: moves single points between clusters while that
// strictly lowers the within-cluster sum of squares, so the result is
// stable under every single-point relabeling that keeps k clusters.
void refine_single_moves(std::span<const Point> points, std::vector<Point>& centroids, std::vector<int>& labels) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    centroids = means_of(points, labels, k, centroids);

    bool moved = true;
    for (std::size_t pass = 0; moved && pass < 1000; ++pass) {
        moved = false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto from = static_cast<std::size_t>(labels[i]);
            if (counts[from] < 2) continue;
            const double na = static_cast<double>(counts[from]);
            const double leave = na / (na - 1.0) * squared_distance(points[i], centroids[from]);
            std::size_t best = from;
            double best_gain = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                if (c == from) continue;
                const double nb = static_cast<double>(counts[c]);
                const double gain = nb / (nb + 1.0) * squared_distance(points[i], centroids[c]) - leave;
                if (gain < best_gain) {
                    best_gain = gain;
                    best = c;
                }
            }
            if (best == from || best_gain > -1e-12 * std::max(1.0, leave)) continue;
            labels[i] = static_cast<int>(best);
            --counts[from];
            ++counts[best];
            centroids = means_of(points, labels, k, centroids);
            moved = true;
        }
    }
}

} // namespace

KMeansModel kmeans_fit(std::span<const Point> points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
    const std::size_t n = points.size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "kmeans_fit on no points");
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (k > n) throw Error(ErrorCode::KExceedsN, "k=" + std::to_string(k) + " > n=" + std::to_string(n));
    const std::size_t dims = points[0].size();
    for (const auto& p : points)
        if (p.size() != dims) throw Error(ErrorCode::DimensionMismatch, "ragged input vectors");

    KMeansModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = seed_plus_plus(points, k, seed);
    model.labels.assign(n, 0);

    for (std::size_t it = 0; it < options.max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) model.labels[i] = nearest(model.centroids, points[i]);
        repair_empty(points, model.centroids, model.labels);

        auto next = means_of(points, model.labels, k, model.centroids);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c)
            shift = std::max(shift, std::sqrt(squared_distance(next[c], model.centroids[c])));
        model.centroids = std::move(next);
        model.inertia_history.push_back(inertia_of(points, model.centroids, model.labels));
        model.iterations_run = it + 1;
        if (shift < options.tol) break;
    }

    for (std::size_t i = 0; i < n; ++i) model.labels[i] = nearest(model.centroids, points[i]);
    repair_empty(points, model.centroids, model.labels);
    refine_single_moves(points, model.centroids, model.labels);
    model.inertia = inertia_of(points, model.centroids, model.labels);
    model.inertia_history.push_back(model.inertia);
    return model;
}

int kmeans_assign(const KMeansModel& model, std::span<const double> point) {
    if (model.centroids.empty()) throw Error(ErrorCode::EmptyInput, "model has no centroids");
    if (point.size() != model.centroids[0].size()) {
        throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(point.size()) + " dims, model " +
                                                      std::to_string(model.centroids[0].size()));
    }
    return nearest(model.centroids, point);
}

} // namespace twinforge
