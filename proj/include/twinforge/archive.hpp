#pragma once

#include "twinforge/telemetry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace twinforge {

using Tags = std::map<std::string, std::string>;

struct ArchiveEntry {
    std::uint64_t seq = 0;
    TelemetrySample sample;
    Tags tags;

    bool operator==(const ArchiveEntry&) const = default;
};

/// Half-open [start, end) in nanoseconds.
struct TimeRange {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t ts) const noexcept { return ts >= start && ts < end; }
};

/// Empty channel or quality sets mean "any".
struct WindowQuery {
    std::string asset_id;
    std::set<Channel> channels;
    TimeRange time_range;
    Tags tag_filter;
    std::set<Quality> quality_filter;
};

struct Gap {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool operator==(const Gap&) const = default;
};

struct QualityReport {
    bool freshness_ok = false;
    std::size_t total = 0;
    std::size_t missing_count = 0;
    double missing_fraction = 0.0;
    std::size_t range_violations = 0;
    std::vector<Gap> gaps;
};

/// Spacing above this multiple of the nominal period counts as a gap.
inline constexpr double kGapFactor = 3.0;

QualityReport validate_quality(const std::vector<TelemetrySample>& samples, std::int64_t nominal_period_ns,
                               std::int64_t now_ns, std::int64_t freshness_timeout_ns);

struct SegmentStats {
    std::array<double, 3> mean{};
    std::array<double, 3> max{};
    std::size_t duration_blocks = 0;

    bool operator==(const SegmentStats&) const = default;
};

struct SegmentRecord {
    std::string replica_version;
    std::string asset_id;
    std::size_t segment_index = 0;
    std::size_t block_start = 0;
    std::size_t block_end = 0;
    int cluster_label = 0;
    SegmentStats stats;
    std::int64_t created_ts = 0;  // source timestamp of the segment's first sample

    bool operator==(const SegmentRecord&) const = default;
};

/// Append-only, in-memory time-series store. Raw samples are kept in
/// arrival order per asset; segment statistics are versioned by replica.
/// Readers hold a shared lock for the duration of a query, so every query
/// sees either all or none of a concurrent append.
class Archive {
public:
    Archive() = default;
    Archive(const Archive&) = delete;
    Archive& operator=(const Archive&) = delete;

    std::uint64_t append(const TelemetrySample& sample, const Tags& tags = {});

    /// Throws UnknownAsset.
    std::vector<ArchiveEntry> query(const WindowQuery& q) const;

    /// Every entry of every asset in append order (assets sorted by id).
    std::vector<ArchiveEntry> scan() const;

    std::vector<std::string> assets() const;
    bool has_asset(std::string_view asset_id) const;
    std::size_t size() const;
    std::optional<TimeRange> time_span(std::string_view asset_id) const;

    /// Throws OverlappingSegment when the block range intersects a record
    /// of the same asset already stored under the same replica version.
    void record_segment(const SegmentRecord& record);

    bool has_replica(std::string_view replica_version) const;
    std::vector<std::string> replica_versions() const;

    /// Throws UnknownReplicaVersion.
    std::vector<SegmentRecord> segments(std::string_view replica_version) const;
    std::vector<SegmentRecord> segments(std::string_view replica_version, TimeRange range) const;

    /// Record counts per cluster label over records whose created_ts lies in
    /// range. Throws UnknownReplicaVersion.
    std::map<int, std::size_t> cluster_histogram(std::string_view replica_version, TimeRange range) const;

    /// Raw samples go to `trace` in append order, segment records to the
    /// JSON sidecar. Tags are not persisted.
    void dump(const std::filesystem::path& trace, const std::filesystem::path& sidecar) const;
    void load(const std::filesystem::path& trace, const std::filesystem::path& sidecar);

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::vector<ArchiveEntry>, std::less<>> log_;
    std::map<std::string, std::vector<SegmentRecord>, std::less<>> segments_;
};

// Free-function forms.
std::uint64_t append_sample(Archive& archive, const TelemetrySample& sample, const Tags& tags = {});
std::vector<ArchiveEntry> query_window(const Archive& archive, const WindowQuery& q);
void record_segment_stats(Archive& archive, const SegmentRecord& record);
std::map<int, std::size_t> cluster_frequency_histogram(const Archive& archive, std::string_view replica_version,
                                                       TimeRange range);

} // namespace twinforge
