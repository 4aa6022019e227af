#include "twinforge/readiness.hpp"

#include "twinforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twinforge {

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
};

// Two-pass population moments, accumulated left to right. Shifting by the
// first sample makes a constant series come out with sd exactly 0.
Moments moments(std::span<const double> xs) {
    const double shift = xs.front();
    double sum = 0.0;
    for (double x : xs) sum += x - shift;
    const double mean = shift + sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

} // namespace

void validate(const ReadinessConfig& c) {
    if (!(c.sigma_threshold > 0.0) || !std::isfinite(c.sigma_threshold))
        throw Error(ErrorCode::InvalidArgument, "sigma_threshold must be positive");
    if (c.smooth_window == 0 || c.smooth_window % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "smooth_window must be odd and >= 1");
    if (c.block_size == 0) throw Error(ErrorCode::InvalidArgument, "block_size must be >= 1");
}

std::vector<std::vector<double>> FeatureSeries::vectors() const {
    std::vector<std::vector<double>> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.emplace_back(b.peaks.begin(), b.peaks.end());
    return out;
}

std::vector<bool> detect_outliers(std::span<const double> series, double sigma_threshold) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "detect_outliers on empty series");
    std::vector<bool> mask(series.size(), false);
    const auto m = moments(series);
    if (m.sd == 0.0) return mask;
    const double limit = sigma_threshold * m.sd;
    for (std::size_t i = 0; i < series.size(); ++i) mask[i] = std::abs(series[i] - m.mean) > limit;
    return mask;
}

std::vector<double> fill_gaps(std::span<const double> series, const std::vector<bool>& missing, GapFill mode) {
    if (missing.size() != series.size())
        throw Error(ErrorCode::LengthMismatch, "mask length differs from series length");
    std::vector<double> out(series.begin(), series.end());
    const std::size_t n = out.size();

    std::size_t first_valid = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!missing[i]) {
            first_valid = i;
            break;
        }
    }
    if (first_valid == n) {
        if (n == 0) return out;
        throw Error(ErrorCode::AllMissing, "no valid sample to fill from");
    }

    for (std::size_t i = 0; i < first_valid; ++i) out[i] = series[first_valid];

    std::size_t prev = first_valid;
    for (std::size_t i = first_valid + 1; i < n; ++i) {
        if (missing[i]) continue;
        if (i > prev + 1) {
            const double left = series[prev];
            const double right = series[i];
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j) {
                out[j] = mode == GapFill::Linear ? left + (right - left) * (static_cast<double>(j - prev) / span) : left;
            }
        }
        prev = i;
    }
    for (std::size_t j = prev + 1; j < n; ++j) out[j] = series[prev];
    return out;
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
    if (window == 0 || window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "smoothing window must be odd and >= 1");
    if (window > series.size())
        throw Error(ErrorCode::WindowTooLarge,
                    "window " + std::to_string(window) + " exceeds series length " + std::to_string(series.size()));
    const std::size_t n = series.size();
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        // Averaging deviations from the centre keeps constant runs exact.
        const double anchor = series[i];
        double sum = 0.0;
        for (std::size_t j = lo; j < hi; ++j) sum += series[j] - anchor;
        out[i] = anchor + sum / static_cast<double>(hi - lo);
    }
    return out;
}

std::vector<double> zscore_normalize(std::span<const double> series) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "zscore_normalize on empty series");
    const auto m = moments(series);
    std::vector<double> out(series.size(), 0.0);
    if (m.sd == 0.0) return out;
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - m.mean) / m.sd;
    return out;
}

std::vector<double> rolling_max(std::span<const double> series, std::size_t block_size) {
    if (block_size == 0) throw Error(ErrorCode::InvalidArgument, "block_size must be >= 1");
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "rolling_max on empty series");
    std::vector<double> peaks;
    peaks.reserve((series.size() + block_size - 1) / block_size);
    for (std::size_t lo = 0; lo < series.size(); lo += block_size) {
        const std::size_t hi = std::min(series.size(), lo + block_size);
        peaks.push_back(*std::max_element(series.begin() + static_cast<std::ptrdiff_t>(lo),
                                          series.begin() + static_cast<std::ptrdiff_t>(hi)));
    }
    return peaks;
}

namespace {

std::vector<double> prepare_axis(const std::vector<double>& raw, const ReadinessConfig& config) {
    // Outlier statistics are taken over the finite samples only; non-finite
    // entries are missing and are filled together with the outliers.
    std::vector<double> finite;
    std::vector<std::size_t> where;
    finite.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (std::isfinite(raw[i])) {
            finite.push_back(raw[i]);
            where.push_back(i);
        }
    }
    if (finite.empty()) throw Error(ErrorCode::AllMissing, "axis has no valid samples");

    std::vector<bool> missing(raw.size(), true);
    const auto outliers = detect_outliers(finite, config.sigma_threshold);
    for (std::size_t k = 0; k < finite.size(); ++k) missing[where[k]] = outliers[k];

    std::vector<double> base(raw.size(), 0.0);
    for (std::size_t k = 0; k < finite.size(); ++k) base[where[k]] = finite[k];

    auto filled = fill_gaps(base, missing, config.gap_fill);
    auto smoothed = smooth(filled, config.smooth_window);
    if (config.normalize) smoothed = zscore_normalize(smoothed);
    return rolling_max(smoothed, config.block_size);
}

} // namespace

FeatureSeries run_readiness(const AxisWindow& raw, const ReadinessConfig& config) {
    validate(config);
    const std::size_t n = raw.axes[0].size();
    if (raw.axes[1].size() != n || raw.axes[2].size() != n) {
        throw Error(ErrorCode::AxisLengthMismatch, "axis lengths " + std::to_string(raw.axes[0].size()) + "/" +
                                                       std::to_string(raw.axes[1].size()) + "/" +
                                                       std::to_string(raw.axes[2].size()));
    }
    if (n == 0) throw Error(ErrorCode::EmptySeries, "empty accelerometer window");
    if (!raw.ts.empty() && raw.ts.size() != n) throw Error(ErrorCode::LengthMismatch, "timestamps do not match axes");

    std::array<std::vector<double>, 3> peaks;
    for (std::size_t a = 0; a < 3; ++a) peaks[a] = prepare_axis(raw.axes[a], config);

    FeatureSeries out;
    out.config = config;
    const std::size_t blocks = peaks[0].size();
    out.blocks.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        FeatureBlock block;
        block.index = b;
        block.peaks = {peaks[0][b], peaks[1][b], peaks[2][b]};
        block.sample_start = b * config.block_size;
        block.sample_end = std::min(n, block.sample_start + config.block_size);
        if (!raw.ts.empty()) {
            block.ts_start = raw.ts[block.sample_start];
            block.ts_end = raw.ts[block.sample_end - 1];
        }
        out.blocks.push_back(block);
    }
    return out;
}

} // namespace twinforge
