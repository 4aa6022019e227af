#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace twinforge {

enum class GapFill { Linear, Hold };

struct ReadinessConfig {
    double sigma_threshold = 7.0;
    std::size_t smooth_window = 5;
    std::size_t block_size = 50;
    GapFill gap_fill = GapFill::Linear;
    bool normalize = true;

    bool operator==(const ReadinessConfig&) const = default;
};

/// Throws InvalidArgument when a field is out of range.
void validate(const ReadinessConfig& config);

struct FeatureBlock {
    std::size_t index = 0;
    std::array<double, 3> peaks{};
    std::size_t sample_start = 0;  // [sample_start, sample_end) in the input
    std::size_t sample_end = 0;
    std::int64_t ts_start = 0;     // timestamps of the first and last sample, when known
    std::int64_t ts_end = 0;

    bool operator==(const FeatureBlock&) const = default;
};

struct FeatureSeries {
    std::vector<FeatureBlock> blocks;
    ReadinessConfig config;

    std::size_t size() const noexcept { return blocks.size(); }
    std::vector<std::vector<double>> vectors() const;

    bool operator==(const FeatureSeries&) const = default;
};

/// mask[i] is set when |x_i - mean| > threshold * sd, with the population
/// moments of the whole input. A zero sd flags nothing. Throws EmptySeries.
std::vector<bool> detect_outliers(std::span<const double> series, double sigma_threshold);

/// Replaces flagged positions. Interior runs are interpolated linearly
/// between the nearest unflagged neighbours (or held from the left one under
/// GapFill::Hold); leading and trailing runs take the nearest valid value.
/// Throws AllMissing, LengthMismatch.
std::vector<double> fill_gaps(std::span<const double> series, const std::vector<bool>& missing,
                              GapFill mode = GapFill::Linear);

/// Centered moving average; the window is truncated at the edges.
/// Throws InvalidArgument for an even or zero window, WindowTooLarge.
std::vector<double> smooth(std::span<const double> series, std::size_t window);

/// Throws EmptySeries. Zero sd yields all zeros.
std::vector<double> zscore_normalize(std::span<const double> series);

/// Peak of each consecutive block; a trailing partial block is kept.
/// Throws EmptySeries, InvalidArgument.
std::vector<double> rolling_max(std::span<const double> series, std::size_t block_size);

/// Raw accelerometer window. Non-finite values mark missing samples.
struct AxisWindow {
    std::array<std::vector<double>, 3> axes;
    std::vector<std::int64_t> ts;  // optional; same length as the axes when present
};

/// outliers -> gap fill -> smooth -> (z-score) -> rolling max, per axis.
/// Throws AxisLengthMismatch plus anything the stages throw.
FeatureSeries run_readiness(const AxisWindow& raw, const ReadinessConfig& config = {});

} // namespace twinforge
