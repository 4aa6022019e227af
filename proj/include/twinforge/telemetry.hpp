#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twinforge {

enum class Channel { AccelX, AccelY, AccelZ, PlcState };
enum class Quality { Good, Suspect, Missing };

inline constexpr Channel kAccelChannels[] = {Channel::AccelX, Channel::AccelY, Channel::AccelZ};

std::string_view to_string(Channel channel) noexcept;
std::string_view to_string(Quality quality) noexcept;
std::optional<Channel> parse_channel(std::string_view name) noexcept;
std::optional<Quality> parse_quality(std::string_view name) noexcept;

/// One timestamped reading from one asset channel. For plc_state the value
/// is the integer machine-state code stored as a real.
struct TelemetrySample {
    std::string asset_id;
    Channel channel = Channel::AccelX;
    std::int64_t ts = 0;  // nanoseconds since epoch
    double value = 0.0;
    Quality quality = Quality::Good;

    bool operator==(const TelemetrySample&) const = default;
};

/// Non-empty, printable ASCII, no '/', no whitespace.
bool is_valid_asset_id(std::string_view id) noexcept;

/// Throws InvalidArgument when the sample breaks its invariants
/// (bad id, negative ts, non-finite value, plc code outside 0..3 when good).
void validate_sample(const TelemetrySample& sample);

/// "mf/<asset_id>/<channel>"; throws InvalidAssetId.
std::string topic_for(std::string_view asset_id, Channel channel);

/// One JSON object with keys asset, ch, ts, v, q in that order. No newline.
std::string encode_sample(const TelemetrySample& sample);

/// Strict inverse of encode_sample; throws MalformedLine.
TelemetrySample decode_sample(std::string_view line);

/// Replay pacing: either as fast as possible or scaled real time.
struct ReplaySpeed {
    double multiplier = 1.0;
    bool max = true;

    static ReplaySpeed as_fast_as_possible() { return {}; }
    static ReplaySpeed scaled(double m) { return {m, false}; }
};

/// Pull-based reader over a trace file. Errors name the 1-based line.
class TraceReader {
public:
    TraceReader(const std::filesystem::path& path, ReplaySpeed speed = {});

    /// Next sample in file order, or nullopt at end of file.
    std::optional<TelemetrySample> next();

    std::size_t line_number() const noexcept { return line_no_; }

private:
    void pace(std::int64_t ts);

    std::ifstream in_;
    ReplaySpeed speed_;
    std::size_t line_no_ = 0;
    std::optional<std::int64_t> first_ts_;
    std::chrono::steady_clock::time_point started_;
};

/// Reads the whole trace eagerly.
std::vector<TelemetrySample> replay_trace(const std::filesystem::path& path,
                                          ReplaySpeed speed = ReplaySpeed::as_fast_as_possible());

void write_trace(const std::filesystem::path& path, const std::vector<TelemetrySample>& samples);

} // namespace twinforge
