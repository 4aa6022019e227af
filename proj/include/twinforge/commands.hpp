#pragma once

#include "twinforge/orchestrator.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace twinforge {

inline constexpr const char* kThreadsEnvVar = "TWINFORGE_THREADS";

/// Worker cap from TWINFORGE_THREADS, else hardware concurrency (min 1).
std::size_t threads_from_env();

struct SimulateOptions {
    std::optional<std::filesystem::path> spec_path;
    std::uint64_t seed = 42;
    double duration_s = 120.0;
    std::filesystem::path out_dir = "out";
};

struct SimulateOutput {
    std::filesystem::path trace;
    std::filesystem::path ground_truth;
    std::size_t sample_count = 0;
};

/// Writes <out>/trace.jsonl and <out>/ground_truth.json.
SimulateOutput simulate_command(const SimulateOptions& options);

struct RunOptions {
    std::filesystem::path trace = "out/trace.jsonl";
    std::optional<std::string> machine;  // default: first asset in the trace
    std::filesystem::path out_dir = "out";
    std::optional<std::string> grid_json;
    double rarity_threshold = kDefaultRarityThreshold;
    std::size_t threads = 1;
};

struct RunOutput {
    std::string machine;
    std::string selected;
    std::size_t segment_count = 0;
    std::size_t anomaly_count = 0;
    std::filesystem::path report;
    std::filesystem::path timeline;
    std::filesystem::path anomalies;
};

/// Ingests the trace through twin shadowing into an archive, runs the
/// ZeroConf pipeline for one machine and writes report.json, timeline.csv,
/// changepoints.txt, anomalies.json and manifest.json.
RunOutput run_command(const RunOptions& options);

/// Ranking table for a report.json. Throws MalformedLine on bad input.
std::string format_report(const std::filesystem::path& report_path);

struct BenchOutput {
    std::uint64_t samples = 0;
    double seconds = 0.0;
    double rate = 0.0;  // samples per second
    std::string champion;
};

/// Fits a champion on the first machine, then replays the trace at max
/// speed through readiness + nearest-centroid assignment until at least
/// `min_samples` accelerometer samples were processed. Throws NoData.
BenchOutput bench_command(const std::filesystem::path& trace, std::uint64_t min_samples = 100000,
                          std::size_t threads = 1);

} // namespace twinforge
