#pragma once

#include "twinforge/archive.hpp"
#include "twinforge/readiness.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace twinforge {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Change-point detection

struct PeltConfig {
    double penalty = 40.0;
    std::size_t min_segment = 2;
};

struct Segmentation {
    std::size_t n = 0;
    std::vector<std::size_t> change_points;  // strictly increasing, inside (0, n)
    double total_cost = 0.0;                 // sum of segment costs + penalty * change points

    std::vector<std::pair<std::size_t, std::size_t>> segments() const;
    std::size_t segment_count() const noexcept { return change_points.size() + 1; }
};

/// Multivariate L2 segment cost over prefix sums: the within-segment sum of
/// squared deviations from the segment mean, summed over dimensions.
class L2Cost {
public:
    explicit L2Cost(std::span<const Point> points);

    /// Cost of [start, end).
    double operator()(std::size_t start, std::size_t end) const noexcept;
    std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> sum_;     // (n+1) x dims
    std::vector<double> sum_sq_;  // (n+1) x dims
};

/// Exact penalized segmentation with PELT pruning. Throws SeriesTooShort,
/// InvalidArgument.
Segmentation pelt_segment(std::span<const Point> points, const PeltConfig& config);
Segmentation pelt_segment(const FeatureSeries& features, const PeltConfig& config);

inline constexpr std::size_t kBruteForceLimit = 512;

/// Full O(n^2) dynamic program over every admissible last change. Same
/// objective and tie rule as pelt_segment. Throws SeriesTooLong.
Segmentation brute_force_segment(std::span<const Point> points, const PeltConfig& config);
Segmentation brute_force_segment(const FeatureSeries& features, const PeltConfig& config);

// ---------------------------------------------------------------------------
// Clustering

struct KMeansOptions {
    std::size_t max_iter = 100;
    double tol = 1e-9;
};

struct KMeansModel {
    std::size_t k = 0;
    std::vector<Point> centroids;
    std::vector<int> labels;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration, then the final pass
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
};

/// k-means++ seeding from a SplitMix64 stream keyed on `seed`, Lloyd
/// iterations, then single-point (Hartigan) moves until none lowers the
/// inertia. Throws EmptyInput, KExceedsN, DimensionMismatch.
KMeansModel kmeans_fit(std::span<const Point> points, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& options = {});

/// Nearest centroid by squared distance, ties to the lowest index.
/// Throws DimensionMismatch.
int kmeans_assign(const KMeansModel& model, std::span<const double> point);

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

// ---------------------------------------------------------------------------
// Scoring

/// Mean silhouette with Euclidean distance. Singleton clusters score 0 and a
/// single cluster overall scores 0. Throws TooFewPoints, LengthMismatch.
double silhouette_score(std::span<const Point> points, std::span<const int> labels);

/// Per-segment statistics; the label is the majority block label, ties to
/// the lowest. Only the geometry, stats and label fields are filled.
/// Throws LengthMismatch.
std::vector<SegmentRecord> segment_features(const FeatureSeries& features, const Segmentation& seg,
                                             std::span<const int> labels);

} // namespace twinforge
