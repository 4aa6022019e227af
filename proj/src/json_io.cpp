#include "twinforge/json_io.hpp"

#include "twinforge/error.hpp"

#include <cmath>
#include <cstdint>
#include <set>

namespace twinforge {

using nlohmann::json;

namespace {

[[noreturn]] void bad_spec(const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); }

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) bad_spec(std::string(where) + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) bad_spec(std::string("unknown key '") + key + "' in " + where);
}

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) bad_spec(std::string(key) + " must be a number");
    return j[key].get<double>();
}

std::string text(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) bad_spec(std::string(key) + " must be a string");
    return j[key].get<std::string>();
}

MachineState state_of(const json& j) {
    auto s = parse_machine_state(text(j, "state"));
    if (!s) bad_spec("unknown machine state '" + j["state"].get<std::string>() + "'");
    return *s;
}

json stats_to_json(const SegmentStats& s) {
    return json{{"mean", s.mean}, {"max", s.max}, {"duration_blocks", s.duration_blocks}};
}

} // namespace

ScenarioSpec scenario_from_json(const json& j) {
    only_keys(j, {"seed", "machines", "duration", "sample_rate", "start_ts", "phase_schedule", "failure_windows", "signal"},
              "scenario");
    ScenarioSpec spec;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<std::int64_t>() >= 0))
            bad_spec("seed must be a non-negative integer");
        spec.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("machines")) {
        if (!j["machines"].is_array()) bad_spec("machines must be an array");
        for (const auto& m : j["machines"]) {
            if (!m.is_string()) bad_spec("machine ids must be strings");
            spec.machines.push_back(m.get<std::string>());
        }
    } else {
        spec.machines = default_scenario().machines;
    }
    spec.duration_s = number(j, "duration", 120.0);
    spec.sample_rate_hz = number(j, "sample_rate", 100.0);
    if (j.contains("start_ts")) {
        if (!j["start_ts"].is_number_integer()) bad_spec("start_ts must be an integer");
        spec.start_ts = j["start_ts"].get<std::int64_t>();
    }
    if (j.contains("phase_schedule")) {
        if (!j["phase_schedule"].is_array()) bad_spec("phase_schedule must be an array");
        for (const auto& p : j["phase_schedule"]) {
            only_keys(p, {"machine", "start", "end", "state"}, "phase_schedule entry");
            spec.phase_schedule.push_back(
                {text(p, "machine"), number(p, "start", -1.0), number(p, "end", -1.0), state_of(p)});
        }
    }
    if (j.contains("failure_windows")) {
        if (!j["failure_windows"].is_array()) bad_spec("failure_windows must be an array");
        for (const auto& w : j["failure_windows"]) {
            only_keys(w, {"machine", "start", "end"}, "failure_windows entry");
            spec.failure_windows.push_back({text(w, "machine"), number(w, "start", -1.0), number(w, "end", -1.0)});
        }
    }
    if (j.contains("signal")) {
        const auto& s = j["signal"];
        only_keys(s, {"idle_sigma", "active_sigma", "active_amplitude", "active_frequency_hz", "waiting_sigma",
                      "failure_gain", "spike_rate", "spike_magnitude", "missing_rate"},
                  "signal");
        auto& m = spec.signal;
        m.idle_sigma = number(s, "idle_sigma", m.idle_sigma);
        m.active_sigma = number(s, "active_sigma", m.active_sigma);
        m.active_amplitude = number(s, "active_amplitude", m.active_amplitude);
        m.active_frequency_hz = number(s, "active_frequency_hz", m.active_frequency_hz);
        m.waiting_sigma = number(s, "waiting_sigma", m.waiting_sigma);
        m.failure_gain = number(s, "failure_gain", m.failure_gain);
        m.spike_rate = number(s, "spike_rate", m.spike_rate);
        m.spike_magnitude = number(s, "spike_magnitude", m.spike_magnitude);
        m.missing_rate = number(s, "missing_rate", m.missing_rate);
    }
    validate_scenario(spec);
    return spec;
}

json scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["seed"] = spec.seed;
    j["machines"] = spec.machines;
    j["duration"] = spec.duration_s;
    j["sample_rate"] = spec.sample_rate_hz;
    j["start_ts"] = spec.start_ts;
    j["phase_schedule"] = json::array();
    for (const auto& p : spec.phase_schedule)
        j["phase_schedule"].push_back(
            {{"machine", p.machine}, {"start", p.start_s}, {"end", p.end_s}, {"state", std::string(to_string(p.state))}});
    j["failure_windows"] = json::array();
    for (const auto& w : spec.failure_windows)
        j["failure_windows"].push_back({{"machine", w.machine}, {"start", w.start_s}, {"end", w.end_s}});
    const auto& m = spec.signal;
    j["signal"] = {{"idle_sigma", m.idle_sigma},
                   {"active_sigma", m.active_sigma},
                   {"active_amplitude", m.active_amplitude},
                   {"active_frequency_hz", m.active_frequency_hz},
                   {"waiting_sigma", m.waiting_sigma},
                   {"failure_gain", m.failure_gain},
                   {"spike_rate", m.spike_rate},
                   {"spike_magnitude", m.spike_magnitude},
                   {"missing_rate", m.missing_rate}};
    return j;
}

json ground_truth_to_json(const GroundTruth& truth) {
    json j;
    j["block_size"] = truth.block_size;
    j["machines"] = json::array();
    for (const auto& m : truth.machines) {
        json states = json::array();
        for (auto s : m.block_states) states.push_back(std::string(to_string(s)));
        j["machines"].push_back({{"machine", m.machine},
                                 {"sample_count", m.sample_count},
                                 {"block_count", m.block_count},
                                 {"segment_count", m.segment_count()},
                                 {"change_samples", m.change_samples},
                                 {"change_points", m.change_points},
                                 {"anomaly_blocks", m.anomaly_blocks},
                                 {"block_states", states}});
    }
    return j;
}

json segment_record_to_json(const SegmentRecord& r) {
    return json{{"replica_version", r.replica_version},
                {"asset", r.asset_id},
                {"segment_index", r.segment_index},
                {"block_start", r.block_start},
                {"block_end", r.block_end},
                {"cluster", r.cluster_label},
                {"stats", stats_to_json(r.stats)},
                {"created_ts", r.created_ts}};
}

SegmentRecord segment_record_from_json(const json& j) {
    try {
        SegmentRecord r;
        r.replica_version = j.at("replica_version").get<std::string>();
        r.asset_id = j.at("asset").get<std::string>();
        r.segment_index = j.at("segment_index").get<std::size_t>();
        r.block_start = j.at("block_start").get<std::size_t>();
        r.block_end = j.at("block_end").get<std::size_t>();
        r.cluster_label = j.at("cluster").get<int>();
        const auto& s = j.at("stats");
        r.stats.mean = s.at("mean").get<std::array<double, 3>>();
        r.stats.max = s.at("max").get<std::array<double, 3>>();
        r.stats.duration_blocks = s.at("duration_blocks").get<std::size_t>();
        r.created_ts = j.at("created_ts").get<std::int64_t>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedLine, std::string("segment record: ") + e.what());
    }
}

json anomaly_to_json(const AnomalyEvent& a) {
    return json{{"machine", a.machine},
                {"replica_version", a.replica_version},
                {"segment_index", a.segment_index},
                {"block_start", a.block_start},
                {"block_end", a.block_end},
                {"cluster", a.cluster_label},
                {"rarity", a.rarity},
                {"ts", a.ts}};
}

json report_to_json(const BenchmarkReport& report) {
    json j;
    j["format_version"] = kReportFormatVersion;
    j["selected"] = report.selected;
    j["ranking_rule"] = report.ranking_rule;
    j["results"] = json::array();
    for (const auto& r : report.results) {
        const auto& hp = r.hyperparams;
        j["results"].push_back({
            {"replica_version", r.replica_version},
            {"machine", r.machine},
            {"hyperparams",
             {{"penalty", hp.penalty},
              {"k", hp.k},
              {"block_size", hp.readiness.block_size},
              {"sigma_threshold", hp.readiness.sigma_threshold},
              {"smooth_window", hp.readiness.smooth_window},
              {"gap_fill", hp.readiness.gap_fill == GapFill::Linear ? "linear" : "hold"},
              {"normalize", hp.readiness.normalize}}},
            {"silhouette", r.silhouette},
            {"segment_count", r.segment_count},
            {"change_points", r.segmentation.change_points},
            {"total_cost", r.segmentation.total_cost},
            {"block_count", r.features.size()},
            {"inertia", r.model.inertia},
            {"kmeans_iterations", r.model.iterations_run},
            {"centroids", r.model.centroids},
            {"anomaly_count", r.anomaly_count},
        });
    }
    return j;
}

ParamGrid grid_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("grid is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "grid must be a JSON object");
    ParamGrid grid;
    for (const auto& [name, values] : j.items()) {
        if (!values.is_array()) throw Error(ErrorCode::InvalidArgument, "grid entry '" + name + "' must be an array");
        auto& out = grid[name];
        for (const auto& v : values) {
            if (v.is_boolean()) {
                out.push_back(v.get<bool>() ? 1.0 : 0.0);
            } else if (v.is_number()) {
                out.push_back(v.get<double>());
            } else {
                throw Error(ErrorCode::InvalidArgument, "grid entry '" + name + "' must hold numbers");
            }
        }
    }
    spawn_replica_grid(grid);  // validates names and values
    return grid;
}

json grid_to_json(const ParamGrid& grid) {
    json j = json::object();
    for (const auto& [name, values] : grid) {
        json arr = json::array();
        for (double v : values) {
            // Integral values print without a fraction so manifests read naturally.
            if (std::trunc(v) == v && std::fabs(v) < 9.0e15)
                arr.push_back(static_cast<std::int64_t>(v));
            else
                arr.push_back(v);
        }
        j[name] = std::move(arr);
    }
    return j;
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

} // namespace twinforge
