// Exercises the shared library through its C header only.
#include <doctest.h>

#include "twinforge/twinforge.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

// Owns a string returned by the library.
struct Owned {
    char* p = nullptr;
    ~Owned() { tf_free_string(p); }
    std::string str() const { return p ? p : ""; }
};

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "twinforge_test_capi" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("status names and version") {
    CHECK(std::string(tf_version()) == "0.3.0");
    CHECK(std::string(tf_status_name(TF_OK)) == "OK");
    CHECK(std::string(tf_status_name(TF_ERR_INVALID_TRANSITION)) == "InvalidTransition");
    CHECK(std::string(tf_status_name(TF_ERR_IO)) == "IoError");
    CHECK(std::string(tf_status_name(TF_ERR_REPLICA)) == "ReplicaError");
    CHECK(tf_threads_from_env() >= 1);
}

TEST_CASE("encode and decode through the C API") {
    tf_sample s{"drill-1", TF_ACCEL_X, 1000, 0.5, TF_QUALITY_GOOD};
    Owned line;
    REQUIRE(tf_encode_sample(&s, &line.p) == TF_OK);
    CHECK(line.str() == R"({"asset":"drill-1","ch":"accel_x","ts":1000,"v":0.5,"q":"good"})");

    tf_sample back{};
    Owned asset;
    REQUIRE(tf_decode_sample(line.p, &back, &asset.p) == TF_OK);
    CHECK(std::string(back.asset_id) == "drill-1");
    CHECK(back.ts == 1000);
    CHECK(back.value == 0.5);

    CHECK(tf_decode_sample("{\"asset\":1}", &back, &asset.p) == TF_ERR_MALFORMED_LINE);
    CHECK(std::string(tf_last_error()).find("MalformedLine") == 0);

    Owned topic;
    CHECK(tf_topic_for("oven-1", TF_PLC_STATE, &topic.p) == TF_OK);
    CHECK(topic.str() == "mf/oven-1/plc_state");
    Owned bad;
    CHECK(tf_topic_for("a/b", TF_ACCEL_Y, &bad.p) == TF_ERR_INVALID_ASSET_ID);
    CHECK(bad.p == nullptr);
    CHECK(tf_encode_sample(nullptr, &bad.p) == TF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("twin lifecycle through opaque handles") {
    tf_runtime* rt = nullptr;
    REQUIRE(tf_runtime_create(&rt) == TF_OK);
    tf_twin* twin = nullptr;
    REQUIRE(tf_twin_create(rt, "drill-1", R"({"downstream":"oven-1"})", &twin) == TF_OK);
    tf_twin* dup = nullptr;
    CHECK(tf_twin_create(rt, "drill-1", nullptr, &dup) == TF_ERR_DUPLICATE_ASSET_ID);
    CHECK(tf_twin_create(rt, "", nullptr, &dup) == TF_ERR_INVALID_ID);
    CHECK(tf_twin_create(rt, "x", "[1,2]", &dup) == TF_ERR_INVALID_ARGUMENT);

    tf_twin* found = nullptr;
    CHECK(tf_twin_find(rt, "drill-1", &found) == TF_OK);
    CHECK(found == twin);
    CHECK(tf_twin_find(rt, "ghost", &found) == TF_ERR_UNKNOWN_ASSET);

    tf_phase phase;
    CHECK(tf_twin_apply_event(twin, TF_EVENT_STOP, &phase) == TF_ERR_INVALID_TRANSITION);
    CHECK(tf_twin_apply_event(twin, TF_EVENT_BIND, &phase) == TF_OK);
    CHECK(phase == TF_PHASE_BOUND);
    CHECK(tf_twin_apply_event(twin, TF_EVENT_SYNC_ESTABLISHED, &phase) == TF_OK);

    tf_sample plc{"drill-1", TF_PLC_STATE, 5, 1.0, TF_QUALITY_GOOD};
    int stale = -1;
    size_t events = 0;
    CHECK(tf_twin_shadow(twin, &plc, &stale, &events) == TF_OK);
    CHECK(stale == 0);
    CHECK(events == 1);
    plc.ts = 1;
    CHECK(tf_twin_shadow(twin, &plc, &stale, &events) == TF_OK);
    CHECK(stale == 1);

    int has = 0;
    tf_lifecycle_event ev;
    CHECK(tf_twin_check_freshness(twin, 6'000'000'005, 5'000'000'000, &has, &ev) == TF_OK);
    CHECK(has == 1);
    CHECK(ev == TF_EVENT_SYNC_LOST);

    Owned snap;
    CHECK(tf_twin_snapshot_json(twin, &snap.p) == TF_OK);
    CHECK(snap.str().find(R"("machine_state":"active")") != std::string::npos);
    CHECK(snap.str().find(R"("downstream":"oven-1")") != std::string::npos);

    double oee = 0;
    CHECK(tf_compute_oee(90, 10, 45, 50, 1.0, &oee) == TF_OK);
    CHECK(oee == doctest::Approx(0.81));
    CHECK(tf_compute_oee(90, 10, 45, 0, 1.0, &oee) == TF_ERR_INVALID_ARGUMENT);

    tf_runtime_destroy(rt);
}

TEST_CASE("archive and pipeline through the C API") {
    const auto dir = fresh_dir("pipeline");
    size_t count = 0;
    REQUIRE(tf_simulate(nullptr, 42, 60.0, dir.string().c_str(), &count) == TF_OK);
    CHECK(count > 0);

    tf_archive* archive = nullptr;
    REQUIRE(tf_archive_create(&archive) == TF_OK);
    size_t loaded = 0;
    REQUIRE(tf_archive_load_trace(archive, (dir / "trace.jsonl").string().c_str(), &loaded) == TF_OK);
    CHECK(loaded == count);
    size_t size = 0;
    CHECK(tf_archive_size(archive, &size) == TF_OK);
    CHECK(size == count);

    tf_sample s{"extra-1", TF_ACCEL_Z, 7, 0.25, TF_QUALITY_GOOD};
    uint64_t seq = 0;
    CHECK(tf_archive_append(archive, &s, R"({"phase":"Bound"})", &seq) == TF_OK);
    CHECK(seq == 1);
    CHECK(tf_archive_append(archive, &s, R"({"phase":3})", &seq) == TF_ERR_INVALID_ARGUMENT);

    Owned lines;
    CHECK(tf_archive_query(archive, "drill-1", 1u << TF_PLC_STATE, 0, INT64_MAX, &lines.p) == TF_OK);
    CHECK(lines.str().rfind(R"({"asset":"drill-1","ch":"plc_state","ts":0,"v":0,"q":"good"})", 0) == 0);
    Owned none;
    CHECK(tf_archive_query(archive, "ghost", 0, 0, 1, &none.p) == TF_ERR_UNKNOWN_ASSET);

    Owned report, timeline, anomalies;
    REQUIRE(tf_zeroconf_run(archive, "mill-1", 0, INT64_MAX, R"({"penalty":[10,40],"k":[3]})", 0.05, 2, &report.p,
                            &timeline.p, &anomalies.p) == TF_OK);
    CHECK(report.str().find("\"selected\"") != std::string::npos);
    CHECK(timeline.str().rfind("block_start,block_end,cluster,is_anomaly\n", 0) == 0);
    CHECK(anomalies.str() == "[]");

    Owned bad;
    CHECK(tf_zeroconf_run(archive, "ghost", 0, INT64_MAX, nullptr, 0.05, 1, &bad.p, nullptr, nullptr) ==
          TF_ERR_NO_DATA);
    tf_archive_destroy(archive);
}

TEST_CASE("commands through the C API") {
    const auto dir = fresh_dir("commands");
    REQUIRE(tf_simulate(nullptr, 42, 30.0, dir.string().c_str(), nullptr) == TF_OK);
    Owned summary;
    REQUIRE(tf_run((dir / "trace.jsonl").string().c_str(), nullptr, dir.string().c_str(), R"({"penalty":[10,40]})",
                   0.05, 1, &summary.p) == TF_OK);
    CHECK(summary.str().find(R"("machine":"drill-1")") != std::string::npos);

    Owned table;
    CHECK(tf_report_format((dir / "report.json").string().c_str(), &table.p) == TF_OK);
    CHECK(table.str().find("* v") != std::string::npos);

    uint64_t samples = 0;
    double rate = 0;
    CHECK(tf_bench((dir / "trace.jsonl").string().c_str(), 1000, 1, &samples, &rate) == TF_OK);
    CHECK(rate > 0);

    CHECK(tf_run((dir / "trace.jsonl").string().c_str(), "ghost", dir.string().c_str(), nullptr, 0.05, 1, nullptr) ==
          TF_ERR_NO_DATA);
    CHECK(tf_simulate("/nonexistent/spec.json", 1, 1, dir.string().c_str(), nullptr) == TF_ERR_FILE_NOT_FOUND);
}
