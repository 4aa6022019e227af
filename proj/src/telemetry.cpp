#include "twinforge/telemetry.hpp"

#include "twinforge/error.hpp"
#include "twinforge/machine_state.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <thread>

namespace twinforge {

namespace {

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedLine, why); }

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string_view to_string(Channel channel) noexcept {
    switch (channel) {
    case Channel::AccelX: return "accel_x";
    case Channel::AccelY: return "accel_y";
    case Channel::AccelZ: return "accel_z";
    case Channel::PlcState: return "plc_state";
    }
    return "unknown";
}

std::string_view to_string(Quality quality) noexcept {
    switch (quality) {
    case Quality::Good: return "good";
    case Quality::Suspect: return "suspect";
    case Quality::Missing: return "missing";
    }
    return "unknown";
}

std::optional<Channel> parse_channel(std::string_view name) noexcept {
    for (auto c : {Channel::AccelX, Channel::AccelY, Channel::AccelZ, Channel::PlcState}) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::optional<Quality> parse_quality(std::string_view name) noexcept {
    for (auto q : {Quality::Good, Quality::Suspect, Quality::Missing}) {
        if (to_string(q) == name) return q;
    }
    return std::nullopt;
}

bool is_valid_asset_id(std::string_view id) noexcept {
    if (id.empty()) return false;
    for (unsigned char c : id) {
        if (c <= 0x20 || c >= 0x7f || c == '/' || c == '"' || c == '\\') return false;
    }
    return true;
}

void validate_sample(const TelemetrySample& s) {
    if (!is_valid_asset_id(s.asset_id)) throw Error(ErrorCode::InvalidArgument, "invalid asset id '" + s.asset_id + "'");
    if (s.ts < 0) throw Error(ErrorCode::InvalidArgument, "negative timestamp");
    if (!std::isfinite(s.value)) throw Error(ErrorCode::InvalidArgument, "non-finite value");
    if (s.channel == Channel::PlcState && s.quality == Quality::Good && !decode_machine_state(s.value))
        throw Error(ErrorCode::InvalidArgument, "plc_state code outside 0..3");
}

std::string topic_for(std::string_view asset_id, Channel channel) {
    if (!is_valid_asset_id(asset_id))
        throw Error(ErrorCode::InvalidAssetId, "asset id '" + std::string(asset_id) + "' is not a valid topic level");
    std::string topic = "mf/";
    topic += asset_id;
    topic += '/';
    topic += to_string(channel);
    return topic;
}

std::string encode_sample(const TelemetrySample& s) {
    std::string line;
    line.reserve(64 + s.asset_id.size());
    line += "{\"asset\":\"";
    line += s.asset_id;  // valid ids need no escaping
    line += "\",\"ch\":\"";
    line += to_string(s.channel);
    line += "\",\"ts\":";
    line += std::to_string(s.ts);
    line += ",\"v\":";
    line += format_double(s.value);
    line += ",\"q\":\"";
    line += to_string(s.quality);
    line += "\"}";
    return line;
}

TelemetrySample decode_sample(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        malformed(std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object()) malformed("not an object");
    if (j.size() != 5) malformed("expected exactly the keys asset, ch, ts, v, q");
    for (const char* key : {"asset", "ch", "ts", "v", "q"}) {
        if (!j.contains(key)) malformed(std::string("missing key '") + key + "'");
    }

    TelemetrySample s;
    const auto& asset = j["asset"];
    if (!asset.is_string() || !is_valid_asset_id(asset.get_ref<const std::string&>())) malformed("bad asset");
    s.asset_id = asset.get<std::string>();

    const auto& ch = j["ch"];
    if (!ch.is_string()) malformed("bad channel");
    auto channel = parse_channel(ch.get_ref<const std::string&>());
    if (!channel) malformed("unknown channel '" + ch.get<std::string>() + "'");
    s.channel = *channel;

    const auto& ts = j["ts"];
    if (ts.is_number_unsigned()) {
        auto u = ts.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) malformed("ts out of range");
        s.ts = static_cast<std::int64_t>(u);
    } else if (ts.is_number_integer()) {
        s.ts = ts.get<std::int64_t>();
        if (s.ts < 0) malformed("negative ts");
    } else {
        malformed("ts must be an integer");
    }

    const auto& v = j["v"];
    if (!v.is_number()) malformed("v must be a number");
    s.value = v.get<double>();
    if (!std::isfinite(s.value)) malformed("v not finite");

    const auto& q = j["q"];
    if (!q.is_string()) malformed("bad quality");
    auto quality = parse_quality(q.get_ref<const std::string&>());
    if (!quality) malformed("unknown quality '" + q.get<std::string>() + "'");
    s.quality = *quality;

    if (s.channel == Channel::PlcState && s.quality == Quality::Good && !decode_machine_state(s.value))
        malformed("plc_state code outside 0..3");
    return s;
}

TraceReader::TraceReader(const std::filesystem::path& path, ReplaySpeed speed) : speed_(speed) {
    if (!std::filesystem::is_regular_file(path)) throw Error(ErrorCode::FileNotFound, path.string());
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(ErrorCode::FileNotFound, path.string());
    if (!speed_.max && !(speed_.multiplier > 0.0))
        throw Error(ErrorCode::InvalidArgument, "replay multiplier must be positive");
}

std::optional<TelemetrySample> TraceReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        TelemetrySample s;
        try {
            s = decode_sample(line);
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no_) + ": " + e.detail());
        }
        pace(s.ts);
        return s;
    }
    return std::nullopt;
}

void TraceReader::pace(std::int64_t ts) {
    if (speed_.max) return;
    if (!first_ts_) {
        first_ts_ = ts;
        started_ = std::chrono::steady_clock::now();
        return;
    }
    const double offset_ns = static_cast<double>(ts - *first_ts_) / speed_.multiplier;
    if (offset_ns <= 0) return;
    std::this_thread::sleep_until(started_ + std::chrono::nanoseconds(static_cast<std::int64_t>(offset_ns)));
}

std::vector<TelemetrySample> replay_trace(const std::filesystem::path& path, ReplaySpeed speed) {
    TraceReader reader(path, speed);
    std::vector<TelemetrySample> out;
    while (auto s = reader.next()) out.push_back(std::move(*s));
    return out;
}

void write_trace(const std::filesystem::path& path, const std::vector<TelemetrySample>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& s : samples) {
        out << encode_sample(s) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

} // namespace twinforge
