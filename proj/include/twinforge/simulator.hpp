#pragma once

#include "twinforge/machine_state.hpp"
#include "twinforge/telemetry.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct PhaseInterval {
    std::string machine;
    double start_s = 0.0;
    double end_s = 0.0;
    MachineState state = MachineState::Idle;
};

struct FailureWindow {
    std::string machine;
    double start_s = 0.0;
    double end_s = 0.0;
};

/// Per-phase accelerometer model. Active and Failure share the sinusoid;
/// Failure scales its amplitude by failure_gain and adds sparse spikes that
/// the readiness outlier filter is expected to strip.
struct SignalModel {
    double idle_sigma = 0.05;
    double active_sigma = 0.2;
    double active_amplitude = 1.0;
    double active_frequency_hz = 5.0;
    double waiting_sigma = 0.1;
    double failure_gain = 2.5;
    double spike_rate = 0.05;
    double spike_magnitude = 10.0;
    double missing_rate = 0.0;  // fraction of accel samples emitted with quality=missing
};

struct ScenarioSpec {
    std::uint64_t seed = 42;
    std::vector<std::string> machines;
    double duration_s = 0.0;
    double sample_rate_hz = 100.0;
    std::int64_t start_ts = 0;  // ns
    std::vector<PhaseInterval> phase_schedule;
    std::vector<FailureWindow> failure_windows;
    SignalModel signal;

    std::size_t samples_per_machine() const noexcept;
    std::int64_t sample_ts(std::size_t index) const noexcept;
};

inline constexpr std::size_t kDefaultBlockSize = 50;

/// Four machines, Idle -> Active -> Waiting on each; the first machine
/// has a Failure phase (and matching failure window) between Active and
/// Waiting. Boundaries scale with duration.
ScenarioSpec default_scenario(std::uint64_t seed = 42, double duration_s = 120.0);

/// Throws InvalidSpec with the first violated invariant.
void validate_scenario(const ScenarioSpec& spec);

struct MachineTruth {
    std::string machine;
    std::size_t sample_count = 0;
    std::size_t block_count = 0;
    std::vector<std::size_t> change_samples;  // sample indices of phase boundaries
    std::vector<std::size_t> change_points;   // projected onto block indices
    std::vector<MachineState> block_states;   // phase at each block's midpoint
    std::vector<std::size_t> anomaly_blocks;  // blocks overlapping a failure window

    std::size_t segment_count() const noexcept { return change_points.size() + 1; }
};

struct GroundTruth {
    std::size_t block_size = kDefaultBlockSize;
    std::vector<MachineTruth> machines;

    const MachineTruth* find(std::string_view machine) const noexcept;
};

GroundTruth project_ground_truth(const ScenarioSpec& spec, std::size_t block_size = kDefaultBlockSize);

/// Pull-based generator. Samples are ordered by sample index, then machine
/// (spec order), then channel with plc_state first.
class ScenarioStream {
public:
    explicit ScenarioStream(ScenarioSpec spec);

    std::optional<TelemetrySample> next();

private:
    void fill_pending();

    ScenarioSpec spec_;
    std::size_t total_ = 0;
    std::size_t index_ = 0;
    std::vector<TelemetrySample> pending_;
    std::size_t pending_pos_ = 0;
    std::vector<std::vector<MachineState>> states_;  // per machine, per sample
};

/// Accelerometer value for one (machine, axis, sample) cell; exposed so
/// tests can regenerate individual points without replaying the stream.
double simulate_accel(const ScenarioSpec& spec, std::string_view machine, Channel axis,
                      std::size_t index, MachineState state);

struct SimulationResult {
    std::vector<TelemetrySample> samples;
    GroundTruth truth;
};

SimulationResult simulate_scenario(const ScenarioSpec& spec, std::size_t block_size = kDefaultBlockSize);

} // namespace twinforge
