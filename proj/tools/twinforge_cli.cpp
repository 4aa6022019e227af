// twinforge command-line entry point. Talks to the library only through the C API.
#include "twinforge/twinforge.h"

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace {

// Exit codes: 0 ok, 2 bad input, 3 no data, 4 pipeline failure.
int exit_code_for(tf_status s) {
    switch (s) {
    case TF_OK:
        return 0;
    case TF_ERR_INVALID_ARGUMENT:
    case TF_ERR_INVALID_ASSET_ID:
    case TF_ERR_MALFORMED_LINE:
    case TF_ERR_FILE_NOT_FOUND:
    case TF_ERR_INVALID_SPEC:
    case TF_ERR_EMPTY_GRID:
    case TF_ERR_IO:
        return 2;
    case TF_ERR_UNKNOWN_ASSET:
    case TF_ERR_NO_DATA:
        return 3;
    default:
        return 4;
    }
}

int fail(tf_status s) {
    std::fprintf(stderr, "twinforge: %s\n", tf_last_error());
    return exit_code_for(s);
}

const char* opt_cstr(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"twinforge: zero-configuration digital twin analytics"};
    app.set_version_flag("--version", std::string(tf_version()));
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic microfactory trace and its ground truth");
    std::optional<std::string> spec_path;
    std::uint64_t seed = 42;
    double duration = 120.0;
    std::string sim_out = "out";
    simulate->add_option("spec", spec_path, "Scenario JSON file (defaults built from --seed/--duration)");
    simulate->add_option("--seed", seed, "Scenario seed");
    simulate->add_option("--duration", duration, "Duration in seconds")->check(CLI::NonNegativeNumber);
    simulate->add_option("--out", sim_out, "Output directory");

    auto* run = app.add_subcommand("run", "Ingest a trace and run the ZeroConf replica sweep for one machine");
    std::string run_trace = "out/trace.jsonl";
    std::optional<std::string> machine;
    std::string run_out = "out";
    std::optional<std::string> grid;
    double threshold = 0.05;
    run->add_option("trace", run_trace, "Trace file");
    run->add_option("--machine", machine, "Machine to analyse (default: first in the trace)");
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--grid", grid, R"(Grid override, e.g. {"penalty":[10,40],"k":[2,3]})");
    run->add_option("--threshold", threshold, "Rarity threshold for anomalous clusters")->check(CLI::Range(0.0, 1.0));

    auto* report = app.add_subcommand("report", "Print the ranking table of a report.json");
    std::string report_path = "out/report.json";
    report->add_option("report", report_path, "report.json produced by run");

    auto* bench = app.add_subcommand("bench", "Measure streaming throughput of the champion model");
    std::string bench_trace = "out/trace.jsonl";
    std::uint64_t min_samples = 100000;
    bench->add_option("trace", bench_trace, "Trace file");
    bench->add_option("--min-samples", min_samples, "Minimum accelerometer samples to replay");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::size_t threads = tf_threads_from_env();

    if (*simulate) {
        std::size_t count = 0;
        const tf_status s = tf_simulate(opt_cstr(spec_path), seed, duration, sim_out.c_str(), &count);
        if (s != TF_OK) return fail(s);
        std::printf("wrote %zu samples to %s\n", count, sim_out.c_str());
        return 0;
    }

    if (*run) {
        char* summary = nullptr;
        const tf_status s = tf_run(run_trace.c_str(), opt_cstr(machine), run_out.c_str(), opt_cstr(grid), threshold,
                                   threads, &summary);
        if (s != TF_OK) return fail(s);
        std::printf("%s\n", summary);
        tf_free_string(summary);
        return 0;
    }

    if (*report) {
        char* text = nullptr;
        const tf_status s = tf_report_format(report_path.c_str(), &text);
        if (s != TF_OK) return fail(s);
        std::fputs(text, stdout);
        tf_free_string(text);
        return 0;
    }

    std::uint64_t samples = 0;
    double rate = 0.0;
    const tf_status s = tf_bench(bench_trace.c_str(), min_samples, threads, &samples, &rate);
    if (s != TF_OK) return fail(s);
    std::fprintf(stderr, "replayed %" PRIu64 " samples\n", samples);
    std::printf("%.0f samples/s\n", std::floor(rate));
    return 0;
}
