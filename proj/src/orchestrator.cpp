#include "twinforge/orchestrator.hpp"

#include "twinforge/error.hpp"
#include "twinforge/random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

namespace twinforge {

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::size_t as_count(const std::string& name, double v) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
        throw Error(ErrorCode::InvalidArgument, name + " must be a non-negative integer, got " + num(v));
    return static_cast<std::size_t>(v);
}

void set_param(HyperParams& hp, const std::string& name, double v) {
    if (name == "penalty") {
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "penalty must be >= 0");
        hp.penalty = v;
    } else if (name == "k") {
        hp.k = as_count(name, v);
        if (hp.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    } else if (name == "block_size") {
        hp.readiness.block_size = as_count(name, v);
    } else if (name == "smooth_window") {
        hp.readiness.smooth_window = as_count(name, v);
    } else if (name == "sigma_threshold") {
        hp.readiness.sigma_threshold = v;
    } else if (name == "normalize") {
        if (v != 0.0 && v != 1.0) throw Error(ErrorCode::InvalidArgument, "normalize must be 0 or 1");
        hp.readiness.normalize = v == 1.0;
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown grid parameter '" + name + "'");
    }
}

} // namespace

std::string HyperParams::canonical() const {
    std::ostringstream out;
    out << "block_size=" << readiness.block_size << ";gap_fill=" << (readiness.gap_fill == GapFill::Linear ? "linear" : "hold")
        << ";k=" << k << ";normalize=" << (readiness.normalize ? 1 : 0) << ";penalty=" << num(penalty)
        << ";sigma_threshold=" << num(readiness.sigma_threshold) << ";smooth_window=" << readiness.smooth_window;
    return out.str();
}

ParamGrid default_grid() {
    return {
        {"block_size", {25, 50}},
        {"k", {2, 3, 4, 5}},
        {"penalty", {10, 40, 160}},
    };
}

std::vector<HyperParams> spawn_replica_grid(const ParamGrid& grid) {
    if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "no parameters in grid");
    for (const auto& [name, values] : grid)
        if (values.empty()) throw Error(ErrorCode::EmptyGrid, "parameter '" + name + "' has no values");

    std::vector<HyperParams> out;
    std::vector<std::size_t> idx(grid.size(), 0);
    std::vector<const std::pair<const std::string, std::vector<double>>*> params;
    for (const auto& entry : grid) params.push_back(&entry);

    while (true) {
        HyperParams hp;
        for (std::size_t p = 0; p < params.size(); ++p) set_param(hp, params[p]->first, params[p]->second[idx[p]]);
        validate(hp.readiness);
        out.push_back(hp);

        // odometer: the last parameter varies fastest
        std::size_t p = params.size();
        while (p > 0) {
            --p;
            if (++idx[p] < params[p]->second.size()) break;
            idx[p] = 0;
            if (p == 0) return out;
        }
    }
}

std::string replica_version(std::size_t seq, const HyperParams& hp) {
    const std::uint64_t h = fnv1a64(hp.canonical());
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", static_cast<unsigned>((h ^ (h >> 32)) & 0xffffffffU));
    return "v" + std::to_string(seq) + "-" + hex;
}

AxisWindow window_from_entries(const std::vector<ArchiveEntry>& entries) {
    AxisWindow w;
    for (const auto& e : entries) {
        const auto& s = e.sample;
        std::size_t axis;
        switch (s.channel) {
        case Channel::AccelX: axis = 0; break;
        case Channel::AccelY: axis = 1; break;
        case Channel::AccelZ: axis = 2; break;
        default: continue;
        }
        w.axes[axis].push_back(s.quality == Quality::Missing ? std::numeric_limits<double>::quiet_NaN() : s.value);
        if (axis == 0) w.ts.push_back(s.ts);
    }
    if (w.ts.size() != w.axes[0].size()) w.ts.clear();
    return w;
}

ReplicaResult run_replica(const std::string& machine, const AxisWindow& window, const HyperParams& hp, std::size_t seq,
                          const ReplicaOptions& options) {
    ReplicaResult r;
    r.replica_version = replica_version(seq, hp);
    r.machine = machine;
    r.hyperparams = hp;
    const auto started = std::chrono::steady_clock::now();
    try {
        r.features = run_readiness(window, hp.readiness);
        r.segmentation = pelt_segment(r.features, PeltConfig{hp.penalty, options.min_segment});
        const auto points = r.features.vectors();
        r.model = kmeans_fit(points, hp.k, options.seed);
        r.labels = r.model.labels;
        r.segments = segment_features(r.features, r.segmentation, r.labels);
        for (auto& s : r.segments) {
            s.replica_version = r.replica_version;
            s.asset_id = machine;
        }
        // Score the segmented view: every block carries its segment's label,
        // so replicas that differ only in penalty are still told apart.
        std::vector<int> segment_labels(points.size());
        for (const auto& s : r.segments)
            std::fill(segment_labels.begin() + static_cast<std::ptrdiff_t>(s.block_start),
                      segment_labels.begin() + static_cast<std::ptrdiff_t>(s.block_end), s.cluster_label);
        r.silhouette = silhouette_score(points, segment_labels);
        r.segment_count = r.segmentation.segment_count();
        r.anomaly_count = flag_anomalies(r.segments, options.rarity_threshold).size();
    } catch (const ReplicaError&) {
        throw;
    } catch (const Error& e) {
        throw ReplicaError(e.code(), r.replica_version, e.detail());
    }
    r.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started);
    return r;
}

std::vector<ReplicaResult> run_replicas(const std::string& machine, const AxisWindow& window,
                                        const std::vector<HyperParams>& grid, const ReplicaOptions& options,
                                        std::size_t threads) {
    std::vector<ReplicaResult> results(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            try {
                results[i] = run_replica(machine, window, grid[i], i + 1, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, grid.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

const ReplicaResult& BenchmarkReport::winner() const {
    for (const auto& r : results)
        if (r.replica_version == selected) return r;
    throw Error(ErrorCode::NoResults, "selected replica not in report");
}

BenchmarkReport rank_replicas(std::vector<ReplicaResult> results) {
    if (results.empty()) throw Error(ErrorCode::NoResults, "nothing to rank");
    std::sort(results.begin(), results.end(), [](const ReplicaResult& a, const ReplicaResult& b) {
        if (a.silhouette != b.silhouette) return a.silhouette > b.silhouette;
        if (a.segment_count != b.segment_count) return a.segment_count < b.segment_count;
        if (a.hyperparams.penalty != b.hyperparams.penalty) return a.hyperparams.penalty < b.hyperparams.penalty;
        return a.replica_version < b.replica_version;
    });
    BenchmarkReport report;
    report.selected = results.front().replica_version;
    report.ranking_rule = kRankingRule;
    report.results = std::move(results);
    return report;
}

std::vector<AnomalyEvent> flag_anomalies(const std::vector<SegmentRecord>& records, double rarity_threshold) {
    std::vector<AnomalyEvent> out;
    if (records.empty()) return out;
    for (const auto& r : records) {
        if (r.replica_version != records.front().replica_version)
            throw Error(ErrorCode::MixedVersions,
                        "records from " + records.front().replica_version + " and " + r.replica_version);
    }
    std::size_t total = 0;
    std::map<int, std::size_t> blocks;
    for (const auto& r : records) {
        const std::size_t len = r.block_end - r.block_start;
        total += len;
        blocks[r.cluster_label] += len;
    }
    if (total == 0) return out;
    for (const auto& r : records) {
        const double freq = static_cast<double>(blocks[r.cluster_label]) / static_cast<double>(total);
        if (freq < rarity_threshold) {
            out.push_back(AnomalyEvent{r.asset_id, r.replica_version, r.segment_index, r.block_start, r.block_end,
                                       r.cluster_label, freq, r.created_ts});
        }
    }
    return out;
}

std::string Timeline::to_csv() const {
    std::string out = "block_start,block_end,cluster,is_anomaly\n";
    for (const auto& r : rows) {
        out += std::to_string(r.block_start) + "," + std::to_string(r.block_end) + "," + std::to_string(r.cluster) + "," +
               (r.is_anomaly ? "1" : "0") + "\n";
    }
    return out;
}

std::string Timeline::change_points_text() const {
    std::string out;
    for (auto cp : change_points) out += std::to_string(cp) + "\n";
    return out;
}

Timeline build_timeline(const FeatureSeries& features, const Segmentation& seg, std::span<const int> labels,
                        const std::vector<AnomalyEvent>& anomalies) {
    const auto records = segment_features(features, seg, labels);  // validates lengths
    Timeline t;
    t.block_count = features.size();
    t.change_points = seg.change_points;
    for (const auto& r : records) {
        const bool flagged = std::any_of(anomalies.begin(), anomalies.end(), [&](const AnomalyEvent& a) {
            return a.block_start == r.block_start && a.block_end == r.block_end;
        });
        t.rows.push_back({r.block_start, r.block_end, r.cluster_label, flagged});
    }
    return t;
}

std::optional<DigitalEvent> emit_augmentation_event(TwinInstance& twin, const AnomalyEvent& anomaly) {
    DigitalEvent ev;
    ev.kind = DigitalEventKind::AnomalyDetected;
    ev.phase = LifecyclePhase::Synchronized;
    ev.ts = anomaly.ts;
    ev.anomaly = anomaly;
    if (!twin.append_event_if(LifecyclePhase::Synchronized, ev)) return std::nullopt;
    return ev;
}

ZeroConfOutcome zeroconf_run(Archive& archive, const std::string& machine, TimeRange range,
                             const ZeroConfOptions& options) {
    if (!archive.has_asset(machine)) throw Error(ErrorCode::NoData, "no samples for machine '" + machine + "'");
    if (!(range.start < range.end)) throw Error(ErrorCode::NoData, "empty time range");

    WindowQuery q;
    q.asset_id = machine;
    q.channels = {Channel::AccelX, Channel::AccelY, Channel::AccelZ};
    q.time_range = range;
    const auto entries = archive.query(q);
    if (entries.empty()) throw Error(ErrorCode::NoData, "no accelerometer samples for '" + machine + "' in range");
    const AxisWindow window = window_from_entries(entries);

    const auto grid = spawn_replica_grid(options.grid);
    ReplicaOptions ropts;
    ropts.seed = options.seed;
    ropts.rarity_threshold = options.rarity_threshold;

    ZeroConfOutcome out;
    out.report = rank_replicas(run_replicas(machine, window, grid, ropts, options.threads));
    const auto& winner = out.report.winner();

    if (archive.has_replica(winner.replica_version)) {
        std::vector<SegmentRecord> mine;
        for (auto& r : archive.segments(winner.replica_version))
            if (r.asset_id == machine) mine.push_back(std::move(r));
        if (mine.empty()) {
            for (const auto& r : winner.segments) archive.record_segment(r);
        } else if (mine != winner.segments) {
            throw Error(ErrorCode::OverlappingSegment,
                        "archive already holds different segments for " + winner.replica_version);
        }
    } else {
        for (const auto& r : winner.segments) archive.record_segment(r);
    }

    out.anomalies = flag_anomalies(winner.segments, options.rarity_threshold);
    out.timeline = build_timeline(winner.features, winner.segmentation, winner.labels, out.anomalies);
    out.emitted.assign(out.anomalies.size(), false);
    if (options.twin) {
        for (std::size_t i = 0; i < out.anomalies.size(); ++i)
            out.emitted[i] = emit_augmentation_event(*options.twin, out.anomalies[i]).has_value();
    }
    return out;
}

} // namespace twinforge
