#include "twinforge/analytics.hpp"

#include "twinforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace twinforge {

double silhouette_score(std::span<const Point> points, std::span<const int> labels) {
    const std::size_t n = points.size();
    if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "labels and points differ in length");
    if (n < 2) throw Error(ErrorCode::TooFewPoints, "silhouette needs at least 2 points");

    std::vector<int> distinct(labels.begin(), labels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t k = distinct.size();
    if (k < 2) return 0.0;

    std::vector<std::size_t> cluster(n);
    std::vector<std::size_t> size(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        cluster[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), labels[i]) - distinct.begin());
        ++size[cluster[i]];
    }

    // dist_sum[i * k + c]: summed distance from point i to members of cluster c.
    std::vector<double> dist_sum(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(squared_distance(points[i], points[j]));
            dist_sum[i * k + cluster[j]] += d;
            dist_sum[j * k + cluster[i]] += d;
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = cluster[i];
        if (size[own] < 2) continue;  // singleton contributes 0
        const double a = dist_sum[i * k + own] / static_cast<double>(size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own) continue;
            b = std::min(b, dist_sum[i * k + c] / static_cast<double>(size[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

std::vector<SegmentRecord> segment_features(const FeatureSeries& features, const Segmentation& seg,
                                            std::span<const int> labels) {
    const std::size_t n = features.size();
    if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "labels do not match block count");
    if (seg.n != n) throw Error(ErrorCode::LengthMismatch, "segmentation does not match block count");

    std::vector<SegmentRecord> out;
    std::size_t index = 0;
    for (auto [a, b] : seg.segments()) {
        SegmentRecord r;
        r.segment_index = index++;
        r.block_start = a;
        r.block_end = b;
        r.stats.duration_blocks = b - a;
        r.stats.max.fill(-std::numeric_limits<double>::infinity());
        std::map<int, std::size_t> votes;
        for (std::size_t i = a; i < b; ++i) {
            const auto& p = features.blocks[i].peaks;
            for (std::size_t d = 0; d < 3; ++d) {
                r.stats.mean[d] += p[d];
                r.stats.max[d] = std::max(r.stats.max[d], p[d]);
            }
            ++votes[labels[i]];
        }
        for (auto& m : r.stats.mean) m /= static_cast<double>(b - a);
        std::size_t best = 0;
        for (const auto& [label, count] : votes) {
            if (count > best) {
                best = count;
                r.cluster_label = label;
            }
        }
        r.created_ts = features.blocks[a].ts_start;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace twinforge
