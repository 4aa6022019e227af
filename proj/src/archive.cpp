#include "twinforge/archive.hpp"

#include "twinforge/error.hpp"
#include "twinforge/json_io.hpp"
#include "twinforge/machine_state.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

namespace twinforge {

namespace {

bool tags_match(const Tags& have, const Tags& want) {
    for (const auto& [k, v] : want) {
        auto it = have.find(k);
        if (it == have.end() || it->second != v) return false;
    }
    return true;
}

// Records of different assets may share a replica version (same grid run on
// several machines); block ranges only conflict within one asset.
bool overlaps(const SegmentRecord& a, const SegmentRecord& b) {
    return a.asset_id == b.asset_id && a.block_start < b.block_end && b.block_start < a.block_end;
}

} // namespace

std::uint64_t Archive::append(const TelemetrySample& sample, const Tags& tags) {
    validate_sample(sample);
    std::unique_lock lock(mutex_);
    auto& entries = log_[sample.asset_id];
    const std::uint64_t seq = entries.size() + 1;
    entries.push_back(ArchiveEntry{seq, sample, tags});
    return seq;
}

std::vector<ArchiveEntry> Archive::query(const WindowQuery& q) const {
    if (!(q.time_range.start < q.time_range.end))
        throw Error(ErrorCode::InvalidArgument, "query range must satisfy start < end");
    std::vector<ArchiveEntry> out;
    {
        std::shared_lock lock(mutex_);
        auto it = log_.find(q.asset_id);
        if (it == log_.end()) throw Error(ErrorCode::UnknownAsset, q.asset_id);
        for (const auto& e : it->second) {
            const auto& s = e.sample;
            if (!q.time_range.contains(s.ts)) continue;
            if (!q.channels.empty() && !q.channels.count(s.channel)) continue;
            if (!q.quality_filter.empty() && !q.quality_filter.count(s.quality)) continue;
            if (!tags_match(e.tags, q.tag_filter)) continue;
            out.push_back(e);
        }
    }
    // seq is unique per asset, so (ts, seq) is a total order.
    std::sort(out.begin(), out.end(), [](const ArchiveEntry& a, const ArchiveEntry& b) {
        return a.sample.ts != b.sample.ts ? a.sample.ts < b.sample.ts : a.seq < b.seq;
    });
    return out;
}

std::vector<ArchiveEntry> Archive::scan() const {
    std::shared_lock lock(mutex_);
    std::vector<ArchiveEntry> out;
    for (const auto& [_, entries] : log_) out.insert(out.end(), entries.begin(), entries.end());
    return out;
}

std::vector<std::string> Archive::assets() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : log_) ids.push_back(id);
    return ids;
}

bool Archive::has_asset(std::string_view asset_id) const {
    std::shared_lock lock(mutex_);
    return log_.find(asset_id) != log_.end();
}

std::size_t Archive::size() const {
    std::shared_lock lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, entries] : log_) n += entries.size();
    return n;
}

std::optional<TimeRange> Archive::time_span(std::string_view asset_id) const {
    std::shared_lock lock(mutex_);
    auto it = log_.find(asset_id);
    if (it == log_.end() || it->second.empty()) return std::nullopt;
    TimeRange r{it->second.front().sample.ts, it->second.front().sample.ts};
    for (const auto& e : it->second) {
        r.start = std::min(r.start, e.sample.ts);
        r.end = std::max(r.end, e.sample.ts);
    }
    r.end += 1;
    return r;
}

void Archive::record_segment(const SegmentRecord& record) {
    if (record.replica_version.empty()) throw Error(ErrorCode::InvalidArgument, "segment record without replica version");
    if (!(record.block_start < record.block_end)) throw Error(ErrorCode::InvalidArgument, "empty segment block range");
    std::unique_lock lock(mutex_);
    auto& records = segments_[record.replica_version];
    for (const auto& existing : records) {
        if (overlaps(existing, record)) {
            std::ostringstream msg;
            msg << "[" << record.block_start << "," << record.block_end << ") overlaps [" << existing.block_start
                << "," << existing.block_end << ") in " << record.replica_version;
            throw Error(ErrorCode::OverlappingSegment, msg.str());
        }
    }
    records.push_back(record);
}

bool Archive::has_replica(std::string_view replica_version) const {
    std::shared_lock lock(mutex_);
    return segments_.find(replica_version) != segments_.end();
}

std::vector<std::string> Archive::replica_versions() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [v, _] : segments_) out.push_back(v);
    return out;
}

std::vector<SegmentRecord> Archive::segments(std::string_view replica_version) const {
    std::shared_lock lock(mutex_);
    auto it = segments_.find(replica_version);
    if (it == segments_.end()) throw Error(ErrorCode::UnknownReplicaVersion, std::string(replica_version));
    return it->second;
}

std::vector<SegmentRecord> Archive::segments(std::string_view replica_version, TimeRange range) const {
    auto all = segments(replica_version);
    std::erase_if(all, [&](const SegmentRecord& r) { return !range.contains(r.created_ts); });
    return all;
}

std::map<int, std::size_t> Archive::cluster_histogram(std::string_view replica_version, TimeRange range) const {
    std::map<int, std::size_t> counts;
    for (const auto& r : segments(replica_version, range)) ++counts[r.cluster_label];
    return counts;
}

void Archive::dump(const std::filesystem::path& trace, const std::filesystem::path& sidecar) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(trace, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + trace.string());
    for (const auto& [_, entries] : log_)
        for (const auto& e : entries) out << encode_sample(e.sample) << '\n';

    nlohmann::json side = nlohmann::json::object();
    side["segments"] = nlohmann::json::array();
    for (const auto& [_, records] : segments_)
        for (const auto& r : records) side["segments"].push_back(segment_record_to_json(r));
    std::ofstream sc(sidecar, std::ios::binary | std::ios::trunc);
    if (!sc) throw Error(ErrorCode::IoError, "cannot write " + sidecar.string());
    sc << dump_pretty(side);
}

void Archive::load(const std::filesystem::path& trace, const std::filesystem::path& sidecar) {
    for (const auto& s : replay_trace(trace)) append(s);
    if (!std::filesystem::exists(sidecar)) return;
    std::ifstream in(sidecar, std::ios::binary);
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, sidecar.string() + ": " + e.what());
    }
    if (!side.is_object() || !side.contains("segments") || !side["segments"].is_array())
        throw Error(ErrorCode::MalformedLine, sidecar.string() + ": expected {\"segments\": [...]}");
    for (const auto& j : side["segments"]) record_segment(segment_record_from_json(j));
}

QualityReport validate_quality(const std::vector<TelemetrySample>& samples, std::int64_t nominal_period_ns,
                               std::int64_t now_ns, std::int64_t freshness_timeout_ns) {
    QualityReport report;
    report.total = samples.size();
    if (samples.empty()) return report;

    report.freshness_ok = (now_ns - samples.back().ts) <= freshness_timeout_ns;
    const double gap_limit = kGapFactor * static_cast<double>(nominal_period_ns);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.quality == Quality::Missing) ++report.missing_count;
        if (s.channel == Channel::PlcState && s.quality != Quality::Missing && !decode_machine_state(s.value))
            ++report.range_violations;
        if (i > 0 && static_cast<double>(s.ts - samples[i - 1].ts) > gap_limit)
            report.gaps.push_back({samples[i - 1].ts, s.ts});
    }
    report.missing_fraction = static_cast<double>(report.missing_count) / static_cast<double>(report.total);
    return report;
}

std::uint64_t append_sample(Archive& archive, const TelemetrySample& sample, const Tags& tags) {
    return archive.append(sample, tags);
}

std::vector<ArchiveEntry> query_window(const Archive& archive, const WindowQuery& q) { return archive.query(q); }

void record_segment_stats(Archive& archive, const SegmentRecord& record) { archive.record_segment(record); }

std::map<int, std::size_t> cluster_frequency_histogram(const Archive& archive, std::string_view replica_version,
                                                       TimeRange range) {
    return archive.cluster_histogram(replica_version, range);
}

} // namespace twinforge
