#include <doctest.h>

#include "twinforge/commands.hpp"
#include "twinforge/error.hpp"
#include "twinforge/json_io.hpp"
#include "twinforge/simulator.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace twinforge;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "twinforge_test_commands" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

} // namespace

TEST_CASE("simulate is deterministic") {
    const auto a = fresh_dir("sim_a");
    const auto b = fresh_dir("sim_b");
    const auto out_a = simulate_command({std::nullopt, 42, 30.0, a});
    simulate_command({std::nullopt, 42, 30.0, b});
    CHECK(out_a.sample_count > 0);
    CHECK(slurp(a / "trace.jsonl") == slurp(b / "trace.jsonl"));
    CHECK(slurp(a / "ground_truth.json") == slurp(b / "ground_truth.json"));
}

TEST_CASE("simulate with duration 0 writes an empty trace") {
    const auto dir = fresh_dir("sim_empty");
    const auto out = simulate_command({std::nullopt, 42, 0.0, dir});
    CHECK(out.sample_count == 0);
    CHECK(slurp(dir / "trace.jsonl").empty());
}

TEST_CASE("simulate from a spec file") {
    const auto dir = fresh_dir("sim_spec");
    write(dir / "spec.json", scenario_to_json(default_scenario(7, 12.0)).dump());
    simulate_command({dir / "spec.json", 0, 0.0, dir / "from_spec"});
    simulate_command({std::nullopt, 7, 12.0, dir / "from_flags"});
    CHECK(slurp(dir / "from_spec" / "trace.jsonl") == slurp(dir / "from_flags" / "trace.jsonl"));

    write(dir / "broken.json", "{\"machines\": [\"a\"");
    CHECK(code_of([&] { simulate_command({dir / "broken.json", 0, 0.0, dir / "x"}); }) == ErrorCode::InvalidSpec);
    write(dir / "unknown.json", R"({"machines":["a"],"duration":1,"colour":"red"})");
    CHECK(code_of([&] { simulate_command({dir / "unknown.json", 0, 0.0, dir / "x"}); }) == ErrorCode::InvalidSpec);
    write(dir / "gap.json", R"({"machines":["a"],"duration":10,"phase_schedule":[{"machine":"a","start":0,"end":4,"state":"idle"}]})");
    CHECK(code_of([&] { simulate_command({dir / "gap.json", 0, 0.0, dir / "x"}); }) == ErrorCode::InvalidSpec);
    CHECK(code_of([&] { simulate_command({dir / "missing.json", 0, 0.0, dir / "x"}); }) == ErrorCode::FileNotFound);
}

TEST_CASE("run writes reproducible artifacts") {
    const auto dir = fresh_dir("run");
    simulate_command({std::nullopt, 42, 120.0, dir});
    RunOptions opts;
    opts.trace = dir / "trace.jsonl";
    opts.out_dir = dir / "one";
    const auto first = run_command(opts);
    CHECK(first.machine == "drill-1");
    const auto truth = project_ground_truth(default_scenario(42, 120.0));
    CHECK(first.segment_count == truth.find("drill-1")->segment_count());
    for (const char* f : {"report.json", "timeline.csv", "anomalies.json", "changepoints.txt", "manifest.json"})
        CHECK(fs::is_regular_file(dir / "one" / f));

    opts.out_dir = dir / "two";
    opts.threads = 4;
    run_command(opts);
    for (const char* f : {"report.json", "timeline.csv", "anomalies.json", "changepoints.txt"})
        CHECK(slurp(dir / "one" / f) == slurp(dir / "two" / f));

    const auto manifest = nlohmann::json::parse(slurp(dir / "one" / "manifest.json"));
    CHECK(manifest.at("scenario").at("seed") == 42);
    CHECK(manifest.at("format_versions").at("report") == kReportFormatVersion);

    opts.machine = "oven-1";
    opts.out_dir = dir / "oven";
    CHECK(run_command(opts).segment_count == 3);

    opts.machine = "ghost";
    CHECK(code_of([&] { run_command(opts); }) == ErrorCode::NoData);

    opts.machine.reset();
    opts.grid_json = R"({"penalty":[40],"k":[3]})";
    opts.out_dir = dir / "grid";
    run_command(opts);
    CHECK(nlohmann::json::parse(slurp(dir / "grid" / "report.json")).at("results").size() == 1);

    opts.grid_json = "{not json";
    CHECK(code_of([&] { run_command(opts); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("run on an empty or missing trace") {
    const auto dir = fresh_dir("run_empty");
    write(dir / "empty.jsonl", "");
    RunOptions opts;
    opts.trace = dir / "empty.jsonl";
    opts.out_dir = dir;
    CHECK(code_of([&] { run_command(opts); }) == ErrorCode::NoData);
    opts.trace = dir / "nope.jsonl";
    CHECK(code_of([&] { run_command(opts); }) == ErrorCode::FileNotFound);
}

TEST_CASE("format_report") {
    const auto dir = fresh_dir("report");
    simulate_command({std::nullopt, 42, 30.0, dir});
    RunOptions opts;
    opts.trace = dir / "trace.jsonl";
    opts.out_dir = dir;
    opts.grid_json = R"({"penalty":[10,40,160]})";
    const auto run = run_command(opts);
    const auto text = format_report(dir / "report.json");
    std::istringstream lines(text);
    std::string line;
    int rows = 0, marked = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("* ", 0) == 0) {
            ++marked;
            CHECK(line.find(run.selected) != std::string::npos);
        }
        if (line.find(" v") != std::string::npos && line.find('-') != std::string::npos) ++rows;
    }
    CHECK(rows == 3);
    CHECK(marked == 1);

    write(dir / "empty.json", R"({"format_version":1,"results":[],"selected":null})");
    CHECK(format_report(dir / "empty.json") == "no replicas\n");

    const auto full = slurp(dir / "report.json");
    write(dir / "truncated.json", full.substr(0, full.size() / 2));
    CHECK(code_of([&] { format_report(dir / "truncated.json"); }) == ErrorCode::MalformedLine);
}

TEST_CASE("bench reports a positive rate") {
    const auto dir = fresh_dir("bench");
    simulate_command({std::nullopt, 42, 30.0, dir});
    const auto out = bench_command(dir / "trace.jsonl", 20000, 1);
    CHECK(out.samples >= 20000);
    CHECK(out.rate > 0.0);
    CHECK_FALSE(out.champion.empty());

    write(dir / "empty.jsonl", "");
    CHECK(code_of([&] { bench_command(dir / "empty.jsonl", 100, 1); }) == ErrorCode::NoData);
}

TEST_CASE("threads_from_env") {
    setenv(kThreadsEnvVar, "3", 1);
    CHECK(threads_from_env() == 3);
    setenv(kThreadsEnvVar, "zero", 1);
    CHECK(threads_from_env() >= 1);
    unsetenv(kThreadsEnvVar);
    CHECK(threads_from_env() >= 1);
}
