#pragma once

#include "twinforge/analytics.hpp"
#include "twinforge/anomaly.hpp"
#include "twinforge/archive.hpp"
#include "twinforge/readiness.hpp"
#include "twinforge/twin.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct HyperParams {
    double penalty = 40.0;
    std::size_t k = 3;
    ReadinessConfig readiness;  // block_size lives here

    std::size_t block_size() const noexcept { return readiness.block_size; }
    /// Canonical "name=value;..." form, hashed into the replica version.
    std::string canonical() const;

    bool operator==(const HyperParams&) const = default;
};

/// Parameter name -> candidate values. Recognised names: block_size, k,
/// normalize, penalty, sigma_threshold, smooth_window.
using ParamGrid = std::map<std::string, std::vector<double>>;

/// Penalties {10, 40, 160}, k {2..5}, block sizes {25, 50}.
ParamGrid default_grid();

inline constexpr double kDefaultRarityThreshold = 0.05;
inline constexpr std::uint64_t kDefaultReplicaSeed = 0x7717f0e5ULL;

/// Cartesian product; parameters in name order with the first varying
/// slowest, values in the order given. Throws EmptyGrid, InvalidArgument.
std::vector<HyperParams> spawn_replica_grid(const ParamGrid& grid);

/// "v<seq>-<8 hex digits of the FNV-1a hash of hp.canonical()>".
std::string replica_version(std::size_t seq, const HyperParams& hp);

struct ReplicaResult {
    std::string replica_version;
    std::string machine;
    HyperParams hyperparams;
    FeatureSeries features;
    Segmentation segmentation;
    KMeansModel model;
    std::vector<int> labels;
    std::vector<SegmentRecord> segments;
    double silhouette = 0.0;
    std::size_t segment_count = 0;
    std::size_t anomaly_count = 0;  // under the threshold passed to run_replica
    std::chrono::nanoseconds wall_time{0};
};

struct ReplicaOptions {
    std::uint64_t seed = kDefaultReplicaSeed;
    double rarity_threshold = kDefaultRarityThreshold;
    std::size_t min_segment = 2;
};

/// Raw accelerometer window of one machine, built from archive entries.
/// Missing-quality samples become NaN.
AxisWindow window_from_entries(const std::vector<ArchiveEntry>& entries);

/// readiness -> PELT -> k-means -> segment stats -> silhouette on a private
/// copy of the window. Stage errors are rethrown as ReplicaError.
ReplicaResult run_replica(const std::string& machine, const AxisWindow& window, const HyperParams& hp,
                          std::size_t seq, const ReplicaOptions& options = {});

struct BenchmarkReport {
    std::vector<ReplicaResult> results;  // ranked
    std::string selected;
    std::string ranking_rule;

    const ReplicaResult& winner() const;
};

inline constexpr const char* kRankingRule =
    "silhouette desc, segment_count asc, penalty asc, replica_version asc";

/// Throws NoResults.
BenchmarkReport rank_replicas(std::vector<ReplicaResult> results);

/// Cluster frequency = blocks carrying the label / all blocks. Every segment
/// whose label frequency is below the threshold yields one event.
/// Throws MixedVersions.
std::vector<AnomalyEvent> flag_anomalies(const std::vector<SegmentRecord>& records,
                                         double rarity_threshold = kDefaultRarityThreshold);

struct TimelineRow {
    std::size_t block_start = 0;
    std::size_t block_end = 0;
    int cluster = 0;
    bool is_anomaly = false;

    bool operator==(const TimelineRow&) const = default;
};

struct Timeline {
    std::size_t block_count = 0;
    std::vector<TimelineRow> rows;
    std::vector<std::size_t> change_points;

    std::string to_csv() const;
    std::string change_points_text() const;
};

/// Throws LengthMismatch.
Timeline build_timeline(const FeatureSeries& features, const Segmentation& seg, std::span<const int> labels,
                        const std::vector<AnomalyEvent>& anomalies);

/// Appends an AnomalyDetected event when the twin is Synchronized; returns
/// nullopt (nothing appended) otherwise.
std::optional<DigitalEvent> emit_augmentation_event(TwinInstance& twin, const AnomalyEvent& anomaly);

struct ZeroConfOptions {
    ParamGrid grid = default_grid();
    double rarity_threshold = kDefaultRarityThreshold;
    std::uint64_t seed = kDefaultReplicaSeed;
    std::size_t threads = 1;
    TwinInstance* twin = nullptr;  // receives augmentation events when set
};

struct ZeroConfOutcome {
    BenchmarkReport report;
    Timeline timeline;
    std::vector<AnomalyEvent> anomalies;
    std::vector<bool> emitted;  // per anomaly: delivered to the twin
};

/// Query -> grid -> replicas (parallel) -> rank -> persist winning segment
/// records -> flag -> timeline -> augmentation. Throws NoData.
ZeroConfOutcome zeroconf_run(Archive& archive, const std::string& machine, TimeRange range,
                             const ZeroConfOptions& options = {});

/// Runs every config on up to `threads` workers; result i belongs to grid[i].
std::vector<ReplicaResult> run_replicas(const std::string& machine, const AxisWindow& window,
                                        const std::vector<HyperParams>& grid, const ReplicaOptions& options,
                                        std::size_t threads);

} // namespace twinforge
