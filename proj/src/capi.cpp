#include "twinforge/twinforge.h"

#include "twinforge/archive.hpp"
#include "twinforge/commands.hpp"
#include "twinforge/error.hpp"
#include "twinforge/json_io.hpp"
#include "twinforge/orchestrator.hpp"
#include "twinforge/twin.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

using namespace twinforge;
using nlohmann::json;

struct tf_runtime {
    TwinRuntime runtime;
};

struct tf_archive {
    Archive archive;
};

namespace {

thread_local std::string g_last_error;

tf_status to_status(ErrorCode code) {
    // ErrorCode and tf_status share their order, offset by TF_OK.
    return static_cast<tf_status>(static_cast<int>(code) + 1);
}

template <class F>
tf_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return TF_OK;
    } catch (const ReplicaError& e) {
        g_last_error = e.what();
        return TF_ERR_REPLICA;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TF_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return TF_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

TwinInstance* twin_of(tf_twin* t) { return reinterpret_cast<TwinInstance*>(t); }
const TwinInstance* twin_of(const tf_twin* t) { return reinterpret_cast<const TwinInstance*>(t); }

TelemetrySample from_c(const tf_sample* s) {
    require(s && s->asset_id, "sample and asset_id must be non-null");
    require(s->channel >= TF_ACCEL_X && s->channel <= TF_PLC_STATE, "channel out of range");
    require(s->quality >= TF_QUALITY_GOOD && s->quality <= TF_QUALITY_MISSING, "quality out of range");
    return TelemetrySample{s->asset_id, static_cast<Channel>(s->channel), s->ts, s->value,
                           static_cast<Quality>(s->quality)};
}

std::map<std::string, std::string> string_map(const char* text, const char* what) {
    std::map<std::string, std::string> out;
    if (!text) return out;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": " + e.what());
    }
    require(j.is_object(), what);
    for (const auto& [k, v] : j.items()) {
        require(v.is_string(), what);
        out[k] = v.get<std::string>();
    }
    return out;
}

json snapshot_json(const TwinSnapshot& snap) {
    json j;
    j["asset"] = snap.asset_id;
    j["phase"] = std::string(to_string(snap.phase));
    j["machine_state"] = snap.machine_state ? json(std::string(to_string(*snap.machine_state))) : json(nullptr);
    j["properties"] = json::object();
    for (const auto& [name, p] : snap.state.properties) j["properties"][name] = {{"value", p.value}, {"ts", p.ts}};
    j["events"] = json::array();
    for (const auto& e : snap.state.events) {
        json ev{{"kind", std::string(to_string(e.kind))}, {"phase", std::string(to_string(e.phase))}, {"ts", e.ts}};
        if (e.kind == DigitalEventKind::StateChanged) {
            ev["from"] = e.from_state ? json(std::string(to_string(*e.from_state))) : json(nullptr);
            ev["to"] = std::string(to_string(e.to_state));
        }
        if (e.anomaly) ev["anomaly"] = anomaly_to_json(*e.anomaly);
        j["events"].push_back(std::move(ev));
    }
    j["relationships"] = snap.state.relationships;
    j["actions"] = json::object();
    for (const auto& [name, a] : snap.state.actions) j["actions"][name] = a.description;
    return j;
}

} // namespace

extern "C" {

const char* tf_version(void) { return "0.3.0"; }

const char* tf_last_error(void) { return g_last_error.c_str(); }

const char* tf_status_name(tf_status status) {
    if (status == TF_OK) return "OK";
    if (status == TF_ERR_REPLICA) return "ReplicaError";
    if (status == TF_ERR_INTERNAL) return "Internal";
    if (status > TF_OK && status < TF_ERR_REPLICA)
        return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
    return "Unknown";
}

void tf_free_string(char* s) { std::free(s); }

size_t tf_threads_from_env(void) { return threads_from_env(); }

tf_status tf_topic_for(const char* asset_id, tf_channel channel, char** out_topic) {
    return guarded([&] {
        require(asset_id && out_topic, "null argument");
        require(channel >= TF_ACCEL_X && channel <= TF_PLC_STATE, "channel out of range");
        put(out_topic, topic_for(asset_id, static_cast<Channel>(channel)));
    });
}

tf_status tf_encode_sample(const tf_sample* sample, char** out_line) {
    return guarded([&] {
        require(out_line != nullptr, "null argument");
        const auto s = from_c(sample);
        validate_sample(s);
        put(out_line, encode_sample(s));
    });
}

tf_status tf_decode_sample(const char* line, tf_sample* out, char** out_asset) {
    return guarded([&] {
        require(line && out && out_asset, "null argument");
        const auto s = decode_sample(line);
        *out_asset = dup(s.asset_id);
        out->asset_id = *out_asset;
        out->channel = static_cast<tf_channel>(s.channel);
        out->ts = s.ts;
        out->value = s.value;
        out->quality = static_cast<tf_quality>(s.quality);
    });
}

tf_status tf_runtime_create(tf_runtime** out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = new tf_runtime;
    });
}

void tf_runtime_destroy(tf_runtime* runtime) { delete runtime; }

tf_status tf_twin_create(tf_runtime* runtime, const char* asset_id, const char* relationships_json, tf_twin** out) {
    return guarded([&] {
        require(runtime && asset_id && out, "null argument");
        auto& twin = runtime->runtime.create_twin(asset_id, string_map(relationships_json, "relationships"));
        *out = reinterpret_cast<tf_twin*>(&twin);
    });
}

tf_status tf_twin_find(tf_runtime* runtime, const char* asset_id, tf_twin** out) {
    return guarded([&] {
        require(runtime && asset_id && out, "null argument");
        auto* twin = runtime->runtime.find(asset_id);
        if (!twin) throw Error(ErrorCode::UnknownAsset, asset_id);
        *out = reinterpret_cast<tf_twin*>(twin);
    });
}

tf_status tf_twin_phase(const tf_twin* twin, tf_phase* out) {
    return guarded([&] {
        require(twin && out, "null argument");
        *out = static_cast<tf_phase>(twin_of(twin)->phase());
    });
}

tf_status tf_twin_apply_event(tf_twin* twin, tf_lifecycle_event event, tf_phase* out_phase) {
    return guarded([&] {
        require(twin != nullptr, "null argument");
        require(event >= TF_EVENT_BIND && event <= TF_EVENT_FAULT, "event out of range");
        const auto phase = twin_of(twin)->apply(static_cast<LifecycleEvent>(event));
        if (out_phase) *out_phase = static_cast<tf_phase>(phase);
    });
}

tf_status tf_twin_shadow(tf_twin* twin, const tf_sample* sample, int* out_stale, size_t* out_events) {
    return guarded([&] {
        require(twin != nullptr, "null argument");
        const auto delta = twin_of(twin)->shadow(from_c(sample));
        if (out_stale) *out_stale = delta.stale ? 1 : 0;
        if (out_events) *out_events = delta.events.size();
    });
}

tf_status tf_twin_check_freshness(const tf_twin* twin, int64_t now_ns, int64_t timeout_ns, int* out_has_event,
                                  tf_lifecycle_event* out_event) {
    return guarded([&] {
        require(twin && out_has_event, "null argument");
        const auto ev = twin_of(twin)->check_freshness(now_ns, std::chrono::nanoseconds(timeout_ns));
        *out_has_event = ev ? 1 : 0;
        if (ev && out_event) *out_event = static_cast<tf_lifecycle_event>(*ev);
    });
}

tf_status tf_twin_snapshot_json(const tf_twin* twin, char** out_json) {
    return guarded([&] {
        require(twin && out_json, "null argument");
        put(out_json, snapshot_json(twin_of(twin)->snapshot()).dump());
    });
}

tf_status tf_compute_oee(double uptime_s, double downtime_s, double actual_rate, double ideal_rate,
                         double quality_factor, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = compute_oee(OeeInputs{uptime_s, downtime_s, actual_rate, ideal_rate, quality_factor});
    });
}

tf_status tf_archive_create(tf_archive** out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = new tf_archive;
    });
}

void tf_archive_destroy(tf_archive* archive) { delete archive; }

tf_status tf_archive_append(tf_archive* archive, const tf_sample* sample, const char* tags_json, uint64_t* out_seq) {
    return guarded([&] {
        require(archive != nullptr, "null argument");
        const auto seq = archive->archive.append(from_c(sample), string_map(tags_json, "tags"));
        if (out_seq) *out_seq = seq;
    });
}

tf_status tf_archive_load_trace(tf_archive* archive, const char* trace_path, size_t* out_count) {
    return guarded([&] {
        require(archive && trace_path, "null argument");
        std::size_t n = 0;
        TraceReader reader(trace_path);
        while (auto s = reader.next()) {
            archive->archive.append(*s);
            ++n;
        }
        if (out_count) *out_count = n;
    });
}

tf_status tf_archive_size(const tf_archive* archive, size_t* out) {
    return guarded([&] {
        require(archive && out, "null argument");
        *out = archive->archive.size();
    });
}

tf_status tf_archive_query(const tf_archive* archive, const char* asset_id, unsigned channel_mask, int64_t t_start,
                           int64_t t_end, char** out_lines) {
    return guarded([&] {
        require(archive && asset_id && out_lines, "null argument");
        WindowQuery q;
        q.asset_id = asset_id;
        q.time_range = {t_start, t_end};
        for (unsigned c = 0; c < 4; ++c)
            if (channel_mask & (1u << c)) q.channels.insert(static_cast<Channel>(c));
        std::string lines;
        for (const auto& e : archive->archive.query(q)) {
            lines += encode_sample(e.sample);
            lines += '\n';
        }
        put(out_lines, lines);
    });
}

tf_status tf_archive_histogram_json(const tf_archive* archive, const char* replica_version, int64_t t_start,
                                    int64_t t_end, char** out_json) {
    return guarded([&] {
        require(archive && replica_version && out_json, "null argument");
        json j = json::object();
        for (const auto& [label, count] : archive->archive.cluster_histogram(replica_version, {t_start, t_end}))
            j[std::to_string(label)] = count;
        put(out_json, j.dump());
    });
}

tf_status tf_zeroconf_run(tf_archive* archive, const char* machine, int64_t t_start, int64_t t_end,
                          const char* grid_json, double rarity_threshold, size_t threads, char** out_report_json,
                          char** out_timeline_csv, char** out_anomalies_json) {
    return guarded([&] {
        require(archive && machine, "null argument");
        ZeroConfOptions opts;
        if (grid_json) opts.grid = grid_from_json(grid_json);
        opts.rarity_threshold = rarity_threshold;
        opts.threads = threads;
        const auto out = zeroconf_run(archive->archive, machine, {t_start, t_end}, opts);
        json anomalies = json::array();
        for (const auto& a : out.anomalies) anomalies.push_back(anomaly_to_json(a));
        put(out_report_json, report_to_json(out.report).dump());
        put(out_timeline_csv, out.timeline.to_csv());
        put(out_anomalies_json, anomalies.dump());
    });
}

tf_status tf_simulate(const char* spec_path, uint64_t seed, double duration_s, const char* out_dir,
                      size_t* out_sample_count) {
    return guarded([&] {
        require(out_dir != nullptr, "null argument");
        SimulateOptions opts;
        if (spec_path) opts.spec_path = spec_path;
        opts.seed = seed;
        opts.duration_s = duration_s;
        opts.out_dir = out_dir;
        const auto out = simulate_command(opts);
        if (out_sample_count) *out_sample_count = out.sample_count;
    });
}

tf_status tf_run(const char* trace_path, const char* machine, const char* out_dir, const char* grid_json,
                 double rarity_threshold, size_t threads, char** out_summary_json) {
    return guarded([&] {
        require(trace_path && out_dir, "null argument");
        RunOptions opts;
        opts.trace = trace_path;
        if (machine) opts.machine = machine;
        opts.out_dir = out_dir;
        if (grid_json) opts.grid_json = grid_json;
        opts.rarity_threshold = rarity_threshold;
        opts.threads = threads == 0 ? 1 : threads;
        const auto out = run_command(opts);
        put(out_summary_json, json{{"machine", out.machine},
                                   {"selected", out.selected},
                                   {"segment_count", out.segment_count},
                                   {"anomaly_count", out.anomaly_count},
                                   {"report", out.report.generic_string()},
                                   {"timeline", out.timeline.generic_string()},
                                   {"anomalies", out.anomalies.generic_string()}}
                                  .dump());
    });
}

tf_status tf_report_format(const char* report_path, char** out_text) {
    return guarded([&] {
        require(report_path && out_text, "null argument");
        put(out_text, format_report(report_path));
    });
}

tf_status tf_bench(const char* trace_path, uint64_t min_samples, size_t threads, uint64_t* out_samples,
                   double* out_rate) {
    return guarded([&] {
        require(trace_path != nullptr, "null argument");
        const auto out = bench_command(trace_path, min_samples, threads == 0 ? 1 : threads);
        if (out_samples) *out_samples = out.samples;
        if (out_rate) *out_rate = out.rate;
    });
}

} // extern "C"
