#include "twinforge/commands.hpp"

#include "twinforge/error.hpp"
#include "twinforge/json_io.hpp"
#include "twinforge/simulator.hpp"

#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace twinforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "twinforge 0.3.0";

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
}

ScenarioSpec load_scenario(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw Error(ErrorCode::FileNotFound, path.string());
    std::ifstream in(path, std::ios::binary);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace

std::size_t threads_from_env() {
    if (const char* v = std::getenv(kThreadsEnvVar)) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SimulateOutput simulate_command(const SimulateOptions& options) {
    const ScenarioSpec spec =
        options.spec_path ? load_scenario(*options.spec_path) : default_scenario(options.seed, options.duration_s);
    validate_scenario(spec);
    const GroundTruth truth = project_ground_truth(spec);

    ensure_dir(options.out_dir);
    SimulateOutput out;
    out.trace = options.out_dir / "trace.jsonl";
    out.ground_truth = options.out_dir / "ground_truth.json";

    std::ofstream trace(out.trace, std::ios::binary | std::ios::trunc);
    if (!trace) throw Error(ErrorCode::IoError, "cannot write " + out.trace.string());
    ScenarioStream stream(spec);
    while (auto s = stream.next()) {
        trace << encode_sample(*s) << '\n';
        ++out.sample_count;
    }
    trace.close();
    if (!trace) throw Error(ErrorCode::IoError, "write failed for " + out.trace.string());

    json gt = ground_truth_to_json(truth);
    gt["scenario"] = scenario_to_json(spec);
    write_file(out.ground_truth, dump_pretty(gt));
    return out;
}

RunOutput run_command(const RunOptions& options) {
    TwinRuntime runtime;
    Archive archive;
    std::string first_asset;
    const std::string source = options.trace.filename().string();

    TraceReader reader(options.trace);
    while (auto s = reader.next()) {
        TwinInstance* twin = runtime.find(s->asset_id);
        if (!twin) {
            twin = &runtime.create_twin(s->asset_id);
            twin->apply(LifecycleEvent::Bind);
            if (first_asset.empty()) first_asset = s->asset_id;
        }
        for (const auto& id : runtime.asset_ids()) {
            auto* other = runtime.find(id);
            if (auto ev = other->check_freshness(s->ts, kDefaultFreshnessTimeout)) other->apply(*ev);
        }
        twin->shadow(*s);
        if (twin->phase() == LifecyclePhase::Bound) twin->apply(LifecycleEvent::SyncEstablished);
        archive.append(*s, {{"phase", std::string(to_string(twin->phase()))}, {"source", source}});
    }

    RunOutput out;
    out.machine = options.machine.value_or(first_asset);
    if (out.machine.empty() || !archive.has_asset(out.machine))
        throw Error(ErrorCode::NoData, out.machine.empty() ? "trace holds no samples" : "no samples for machine '" + out.machine + "'");
    TwinInstance* twin = runtime.find(out.machine);

    ZeroConfOptions zc;
    if (options.grid_json) zc.grid = grid_from_json(*options.grid_json);
    zc.rarity_threshold = options.rarity_threshold;
    zc.threads = options.threads;
    zc.twin = twin;
    const auto span = archive.time_span(out.machine);
    const auto result = zeroconf_run(archive, out.machine, *span, zc);

    ensure_dir(options.out_dir);
    out.report = options.out_dir / "report.json";
    out.timeline = options.out_dir / "timeline.csv";
    out.anomalies = options.out_dir / "anomalies.json";
    write_file(out.report, dump_pretty(report_to_json(result.report)));
    write_file(out.timeline, result.timeline.to_csv());
    write_file(options.out_dir / "changepoints.txt", result.timeline.change_points_text());

    json anomalies;
    anomalies["format_version"] = kAnomaliesFormatVersion;
    anomalies["machine"] = out.machine;
    anomalies["replica_version"] = result.report.selected;
    anomalies["rarity_threshold"] = options.rarity_threshold;
    anomalies["anomalies"] = json::array();
    for (std::size_t i = 0; i < result.anomalies.size(); ++i) {
        json a = anomaly_to_json(result.anomalies[i]);
        a["delivered_to_twin"] = static_cast<bool>(result.emitted[i]);
        anomalies["anomalies"].push_back(std::move(a));
    }
    write_file(out.anomalies, dump_pretty(anomalies));

    json manifest;
    manifest["tool"] = kToolVersion;
    manifest["trace"] = options.trace.generic_string();
    manifest["machine"] = out.machine;
    manifest["grid"] = grid_to_json(zc.grid);
    manifest["rarity_threshold"] = options.rarity_threshold;
    manifest["replica_seed"] = zc.seed;
    manifest["out_dir"] = options.out_dir.generic_string();
    if (options.grid_json) manifest["grid_override"] = json::parse(*options.grid_json);
    // simulate writes its scenario next to the trace; record it when present.
    if (const auto gt = options.trace.parent_path() / "ground_truth.json"; fs::is_regular_file(gt)) {
        std::ifstream in(gt, std::ios::binary);
        const json truth = json::parse(in, nullptr, false);
        if (truth.is_object() && truth.contains("scenario")) manifest["scenario"] = truth["scenario"];
    }
    manifest["format_versions"] = {{"report", kReportFormatVersion},
                                   {"timeline", kTimelineFormatVersion},
                                   {"anomalies", kAnomaliesFormatVersion}};
    write_file(options.out_dir / "manifest.json", dump_pretty(manifest));

    const auto& winner = result.report.winner();
    out.selected = winner.replica_version;
    out.segment_count = winner.segment_count;
    out.anomaly_count = result.anomalies.size();
    return out;
}

std::string format_report(const fs::path& report_path) {
    if (!fs::is_regular_file(report_path)) throw Error(ErrorCode::FileNotFound, report_path.string());
    std::ifstream in(report_path, std::ios::binary);
    std::ostringstream table;
    try {
        const json j = json::parse(in);
        const auto& results = j.at("results");
        if (!results.is_array()) throw Error(ErrorCode::MalformedLine, "results must be an array");
        if (results.empty()) return "no replicas\n";
        const std::string selected = j.at("selected").get<std::string>();
        char line[160];
        std::snprintf(line, sizeof line, "  %-14s %8s %3s %6s %10s %9s %9s\n", "version", "penalty", "k", "block",
                      "silhouette", "segments", "anomalies");
        table << line;
        for (const auto& r : results) {
            const auto version = r.at("replica_version").get<std::string>();
            const auto& hp = r.at("hyperparams");
            std::snprintf(line, sizeof line, "%c %-14s %8g %3zu %6zu %10.4f %9zu %9zu\n", version == selected ? '*' : ' ',
                          version.c_str(), hp.at("penalty").get<double>(), hp.at("k").get<std::size_t>(),
                          hp.at("block_size").get<std::size_t>(), r.at("silhouette").get<double>(),
                          r.at("segment_count").get<std::size_t>(), r.at("anomaly_count").get<std::size_t>());
            table << line;
        }
        if (auto rule = j.find("ranking_rule"); rule != j.end() && rule->is_string())
            table << "ranked by " << rule->get<std::string>() << "\n";
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedLine, report_path.string() + ": " + e.what());
    }
    return table.str();
}

BenchOutput bench_command(const fs::path& trace, std::uint64_t min_samples, std::size_t threads) {
    // Champion: ZeroConf selection on the first machine of the trace.
    Archive archive;
    std::string champion_machine;
    std::uint64_t accel_in_trace = 0;
    {
        TraceReader reader(trace);
        while (auto s = reader.next()) {
            if (s->channel == Channel::PlcState) continue;
            ++accel_in_trace;
            if (champion_machine.empty()) champion_machine = s->asset_id;
            if (s->asset_id == champion_machine) archive.append(*s);
        }
    }
    if (accel_in_trace == 0) throw Error(ErrorCode::NoData, "trace holds no accelerometer samples");

    ZeroConfOptions zc;
    zc.threads = threads;
    const auto fitted = zeroconf_run(archive, champion_machine, *archive.time_span(champion_machine), zc);
    const auto& champion = fitted.report.winner();
    const ReadinessConfig config = champion.hyperparams.readiness;
    const std::size_t chunk = config.block_size * 20;

    BenchOutput out;
    out.champion = champion.replica_version;
    auto process = [&](AxisWindow& w) {
        if (w.axes[0].size() >= config.smooth_window && w.axes[0].size() == w.axes[1].size() &&
            w.axes[1].size() == w.axes[2].size()) {
            const auto features = run_readiness(w, config);
            for (const auto& b : features.blocks) {
                kmeans_assign(champion.model, b.peaks);
            }
        }
        for (auto& a : w.axes) a.clear();
        w.ts.clear();
    };

    const auto started = std::chrono::steady_clock::now();
    while (out.samples < min_samples) {
        std::map<std::string, AxisWindow, std::less<>> buffers;
        TraceReader reader(trace, ReplaySpeed::as_fast_as_possible());
        while (auto s = reader.next()) {
            std::size_t axis;
            switch (s->channel) {
            case Channel::AccelX: axis = 0; break;
            case Channel::AccelY: axis = 1; break;
            case Channel::AccelZ: axis = 2; break;
            default: continue;
            }
            auto& w = buffers[s->asset_id];
            w.axes[axis].push_back(s->quality == Quality::Missing ? std::nan("") : s->value);
            ++out.samples;
            if (w.axes[0].size() >= chunk && w.axes[1].size() >= chunk && w.axes[2].size() >= chunk) process(w);
        }
        for (auto& [_, w] : buffers) process(w);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.rate = out.seconds > 0.0 ? static_cast<double>(out.samples) / out.seconds : 0.0;
    return out;
}

} // namespace twinforge
