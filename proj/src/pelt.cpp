#include "twinforge/analytics.hpp"

#include "twinforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace twinforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const PeltConfig& config) {
    if (!(config.penalty >= 0.0) || !std::isfinite(config.penalty))
        throw Error(ErrorCode::InvalidArgument, "penalty must be finite and non-negative");
    if (config.min_segment == 0) throw Error(ErrorCode::InvalidArgument, "min_segment must be >= 1");
}

void check_length(std::size_t n, const PeltConfig& config) {
    if (n == 0 || n < config.min_segment) {
        throw Error(ErrorCode::SeriesTooShort,
                    std::to_string(n) + " blocks, min_segment " + std::to_string(config.min_segment));
    }
}

Segmentation backtrack(std::size_t n, const std::vector<std::size_t>& last, double total) {
    Segmentation seg;
    seg.n = n;
    seg.total_cost = total;
    for (std::size_t t = n; t > 0;) {
        const std::size_t s = last[t];
        if (s > 0) seg.change_points.push_back(s);
        t = s;
    }
    std::reverse(seg.change_points.begin(), seg.change_points.end());
    return seg;
}

std::vector<Point> as_points(const FeatureSeries& features) { return features.vectors(); }

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> Segmentation::segments() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t start = 0;
    for (auto cp : change_points) {
        out.emplace_back(start, cp);
        start = cp;
    }
    if (n > 0) out.emplace_back(start, n);
    return out;
}

L2Cost::L2Cost(std::span<const Point> points) : n_(points.size()), dims_(points.empty() ? 0 : points[0].size()) {
    sum_.assign((n_ + 1) * dims_, 0.0);
    sum_sq_.assign((n_ + 1) * dims_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        if (points[i].size() != dims_) throw Error(ErrorCode::DimensionMismatch, "ragged feature vectors");
        for (std::size_t d = 0; d < dims_; ++d) {
            const double x = points[i][d];
            sum_[(i + 1) * dims_ + d] = sum_[i * dims_ + d] + x;
            sum_sq_[(i + 1) * dims_ + d] = sum_sq_[i * dims_ + d] + x * x;
        }
    }
}

double L2Cost::operator()(std::size_t start, std::size_t end) const noexcept {
    const double len = static_cast<double>(end - start);
    double cost = 0.0;
    for (std::size_t d = 0; d < dims_; ++d) {
        const double s = sum_[end * dims_ + d] - sum_[start * dims_ + d];
        const double ss = sum_sq_[end * dims_ + d] - sum_sq_[start * dims_ + d];
        cost += ss - s * s / len;
    }
    return std::max(0.0, cost);
}

Segmentation pelt_segment(std::span<const Point> points, const PeltConfig& config) {
    check_config(config);
    const std::size_t n = points.size();
    check_length(n, config);
    const std::size_t m = config.min_segment;
    const double beta = config.penalty;
    const L2Cost cost(points);

    // F[t]: optimal penalized cost of [0, t), offset so that F[n] counts the
    // penalty once per change point rather than once per segment.
    std::vector<double> F(n + 1, kInf);
    std::vector<std::size_t> last(n + 1, 0);
    F[0] = -beta;

    struct Candidate {
        std::size_t s;
        std::size_t drop_at;  // first t at which s is provably never optimal
    };
    constexpr std::size_t kKeep = std::numeric_limits<std::size_t>::max();
    std::vector<Candidate> candidates{{0, kKeep}};

    for (std::size_t t = m; t <= n; ++t) {
        std::erase_if(candidates, [t](const Candidate& c) { return c.drop_at <= t; });

        double best = kInf;
        std::size_t arg = 0;
        for (const auto& c : candidates) {
            if (c.s + m > t) break;  // candidates are kept in ascending order
            const double v = F[c.s] + cost(c.s, t) + beta;
            if (v < best) {
                best = v;
                arg = c.s;
            }
        }
        F[t] = best;
        last[t] = arg;

        // s with F(s) + C(s,t) > F(t) loses to a change at t for every t'
        // with t' - t >= m; it stays usable for the shorter horizons.
        const double slack = 1e-9 * std::max(1.0, std::abs(F[t]));
        for (auto& c : candidates) {
            if (c.s + m > t) break;
            if (c.drop_at == kKeep && F[c.s] + cost(c.s, t) > F[t] + slack) c.drop_at = t + m;
        }
        candidates.push_back({t, kKeep});
    }
    return backtrack(n, last, F[n]);
}

Segmentation pelt_segment(const FeatureSeries& features, const PeltConfig& config) {
    const auto pts = as_points(features);
    return pelt_segment(std::span<const Point>(pts), config);
}

Segmentation brute_force_segment(std::span<const Point> points, const PeltConfig& config) {
    check_config(config);
    const std::size_t n = points.size();
    if (n > kBruteForceLimit)
        throw Error(ErrorCode::SeriesTooLong, std::to_string(n) + " blocks exceeds " + std::to_string(kBruteForceLimit));
    check_length(n, config);
    const std::size_t m = config.min_segment;
    const double beta = config.penalty;
    const L2Cost cost(points);

    std::vector<double> F(n + 1, kInf);
    std::vector<std::size_t> last(n + 1, 0);
    F[0] = -beta;
    for (std::size_t t = m; t <= n; ++t) {
        double best = kInf;
        std::size_t arg = 0;
        for (std::size_t s = 0; s + m <= t; ++s) {
            if (F[s] == kInf) continue;
            const double v = F[s] + cost(s, t) + beta;
            if (v < best) {
                best = v;
                arg = s;
            }
        }
        F[t] = best;
        last[t] = arg;
    }
    return backtrack(n, last, F[n]);
}

Segmentation brute_force_segment(const FeatureSeries& features, const PeltConfig& config) {
    const auto pts = as_points(features);
    return brute_force_segment(std::span<const Point>(pts), config);
}

} // namespace twinforge
