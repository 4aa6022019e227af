// Runs the CLI binary and checks exit codes and output contracts.
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr discarded; stdout captured.
Result cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" TWINFORGE_CLI "\" " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "twinforge_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("simulate") {
    const auto dir = fresh_dir("simulate");
    CHECK(cli("simulate --seed 42 --duration 20 --out " + q(dir / "a")).code == 0);
    CHECK(cli("simulate --seed 42 --duration 20 --out " + q(dir / "b")).code == 0);
    CHECK(slurp(dir / "a" / "trace.jsonl") == slurp(dir / "b" / "trace.jsonl"));

    CHECK(cli("simulate --duration 0 --out " + q(dir / "zero")).code == 0);
    CHECK(slurp(dir / "zero" / "trace.jsonl").empty());

    std::ofstream(dir / "bad.json") << "{ nope";
    CHECK(cli("simulate " + q(dir / "bad.json") + " --out " + q(dir / "c")).code == 2);
    CHECK(cli("simulate --duration -3").code == 2);
    CHECK(cli("simulate --bogus").code == 2);
    CHECK(cli("").code == 2);
}

TEST_CASE("run, report and bench") {
    const auto dir = fresh_dir("run");
    REQUIRE(cli("simulate --out " + q(dir)).code == 0);
    const auto run = cli("run " + q(dir / "trace.jsonl") + " --out " + q(dir / "out"));
    CHECK(run.code == 0);
    CHECK(run.out.find("\"segment_count\":4") != std::string::npos);

    CHECK(cli("run " + q(dir / "trace.jsonl") + " --machine ghost --out " + q(dir / "g")).code == 3);
    CHECK(cli("run " + q(dir / "missing.jsonl") + " --out " + q(dir / "g")).code == 2);
    CHECK(cli("run " + q(dir / "trace.jsonl") + " --grid '{\"k\":[]}' --out " + q(dir / "g")).code == 2);
    CHECK(cli("run " + q(dir / "trace.jsonl") + " --threshold 2 --out " + q(dir / "g")).code == 2);
    // Every replica fails when k exceeds the block count: a pipeline error.
    CHECK(cli("run " + q(dir / "trace.jsonl") + " --grid '{\"k\":[100000]}' --out " + q(dir / "g")).code == 4);

    const auto report = cli("report " + q(dir / "out" / "report.json"));
    CHECK(report.code == 0);
    CHECK(report.out.find("\n* v") != std::string::npos);

    std::ofstream(dir / "empty_report.json") << R"({"format_version":1,"results":[],"selected":null})";
    const auto empty = cli("report " + q(dir / "empty_report.json"));
    CHECK(empty.code == 0);
    CHECK(empty.out == "no replicas\n");
    std::ofstream(dir / "truncated.json") << R"({"format_version":1,"results":[{"replica)";
    CHECK(cli("report " + q(dir / "truncated.json")).code == 2);

    const auto bench = cli("bench " + q(dir / "trace.jsonl") + " --min-samples 20000", "TWINFORGE_THREADS=2");
    CHECK(bench.code == 0);
    CHECK(std::regex_match(bench.out, std::regex("[0-9]+ samples/s\n")));

    std::ofstream(dir / "empty.jsonl") << "";
    CHECK(cli("bench " + q(dir / "empty.jsonl")).code == 3);
}
