// Test-only oracles and fixtures. Nothing here calls the code under test.
#pragma once

#include "twinforge/random.hpp"
#include "twinforge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <vector>

namespace fixtures {

using twinforge::SplitMix64;

// Mean and population sd, plain two-pass.
inline std::pair<double, double> population_moments(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

struct SpikeFixture {
    std::vector<double> base;      // spike-free signal
    std::vector<double> spiked;    // base plus spikes
    std::vector<std::size_t> at;   // spike positions, ascending, never adjacent or at the ends
    double base_sd = 0.0;
};

// Active-phase accelerometer trace clipped to 3 sd, with `rate` of the samples
// displaced by `magnitude` base standard deviations in a random direction.
inline SpikeFixture spike_fixture(std::uint64_t seed, std::size_t n, double rate, double magnitude,
                                  twinforge::Channel axis = twinforge::Channel::AccelX) {
    using namespace twinforge;
    ScenarioSpec spec = default_scenario(seed, 1.0);
    SpikeFixture f;
    f.base.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.base[i] = simulate_accel(spec, "fixture", axis, i, MachineState::Active);
    auto [mean, sd] = population_moments(f.base);
    for (double& x : f.base) x = std::clamp(x, mean - 3 * sd, mean + 3 * sd);
    std::tie(mean, sd) = population_moments(f.base);
    f.base_sd = sd;

    SplitMix64 rng(seed ^ 0x5eed);
    const std::size_t want = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
    std::set<std::size_t> chosen;
    while (chosen.size() < want) {
        const std::size_t p = 1 + rng.next() % (n - 2);
        if (chosen.count(p) || chosen.count(p - 1) || chosen.count(p + 1)) continue;
        chosen.insert(p);
    }
    f.at.assign(chosen.begin(), chosen.end());
    f.spiked = f.base;
    for (std::size_t p : f.at) f.spiked[p] += (rng.next() & 1 ? 1.0 : -1.0) * magnitude * sd;
    return f;
}

// Silhouette straight from the definition, O(n^2) with fresh distance sums per point.
inline double naive_silhouette(const std::vector<std::vector<double>>& pts, const std::vector<int>& labels) {
    const std::size_t n = pts.size();
    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) return 0.0;
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t d = 0; d < pts[i].size(); ++d) s += (pts[i][d] - pts[j][d]) * (pts[i][d] - pts[j][d]);
        return std::sqrt(s);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;  // singleton scores 0
        std::map<int, double> sum;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[labels[j]] += dist(i, j);
        const double a = sum[labels[i]] / static_cast<double>(sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [l, s] : sum)
            if (l != labels[i]) b = std::min(b, s / static_cast<double>(sizes[l]));
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

// Sum of squared deviations from the segment mean, computed directly.
inline double direct_l2(const std::vector<std::vector<double>>& pts, std::size_t a, std::size_t b) {
    double cost = 0.0;
    for (std::size_t d = 0; d < pts[0].size(); ++d) {
        double mean = 0.0;
        for (std::size_t i = a; i < b; ++i) mean += pts[i][d];
        mean /= static_cast<double>(b - a);
        for (std::size_t i = a; i < b; ++i) cost += (pts[i][d] - mean) * (pts[i][d] - mean);
    }
    return cost;
}

struct Partition {
    std::vector<std::size_t> change_points;
    double cost = std::numeric_limits<double>::infinity();
};

// Enumerates every subset of change points (2^(n-1)) and keeps the cheapest
// admissible one. Only usable for small n.
inline Partition enumerate_best_partition(const std::vector<std::vector<double>>& pts, double penalty,
                                          std::size_t min_segment) {
    const std::size_t n = pts.size();
    Partition best;
    const std::uint64_t subsets = std::uint64_t{1} << (n - 1);
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        std::vector<std::size_t> cps;
        for (std::size_t i = 1; i < n; ++i)
            if (mask >> (i - 1) & 1) cps.push_back(i);
        std::size_t prev = 0;
        bool ok = true;
        double cost = 0.0;
        for (std::size_t k = 0; k <= cps.size() && ok; ++k) {
            const std::size_t end = k < cps.size() ? cps[k] : n;
            if (end - prev < min_segment) ok = false;
            else cost += direct_l2(pts, prev, end);
            prev = end;
        }
        if (!ok) continue;
        cost += penalty * static_cast<double>(cps.size());
        if (cost < best.cost - 1e-9) best = {cps, cost};
    }
    return best;
}

} // namespace fixtures
