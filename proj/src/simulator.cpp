#include "twinforge/simulator.hpp"

#include "twinforge/error.hpp"
#include "twinforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace twinforge {

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); }

std::size_t sample_at_or_after(double seconds, double rate) {
    // Small epsilon so boundaries like 40 s * 100 Hz land on 4000 exactly.
    const double x = seconds * rate;
    return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9)));
}

std::vector<MachineState> expand_schedule(const ScenarioSpec& spec, const std::string& machine) {
    const std::size_t n = spec.samples_per_machine();
    std::vector<MachineState> states(n, MachineState::Idle);
    for (const auto& p : spec.phase_schedule) {
        if (p.machine != machine) continue;
        const std::size_t a = std::min(n, sample_at_or_after(p.start_s, spec.sample_rate_hz));
        const std::size_t b = std::min(n, sample_at_or_after(p.end_s, spec.sample_rate_hz));
        std::fill(states.begin() + static_cast<std::ptrdiff_t>(a), states.begin() + static_cast<std::ptrdiff_t>(b),
                  p.state);
    }
    return states;
}

std::size_t axis_index(Channel axis) {
    switch (axis) {
    case Channel::AccelX: return 0;
    case Channel::AccelY: return 1;
    case Channel::AccelZ: return 2;
    default: return 3;
    }
}

} // namespace

std::size_t ScenarioSpec::samples_per_machine() const noexcept {
    if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) return 0;
    return static_cast<std::size_t>(std::floor(duration_s * sample_rate_hz + 1e-9));
}

std::int64_t ScenarioSpec::sample_ts(std::size_t index) const noexcept {
    return start_ts + std::llround(static_cast<double>(index) * 1e9 / sample_rate_hz);
}

ScenarioSpec default_scenario(std::uint64_t seed, double duration_s) {
    ScenarioSpec spec;
    spec.seed = seed;
    spec.duration_s = duration_s;
    spec.machines = {"drill-1", "mill-1", "oven-1", "sorter-1"};
    if (!(duration_s > 0.0)) return spec;

    // Fractions of the run; the first machine fails at the end of its Active phase.
    struct Plan {
        double active_start, waiting_start, failure_start;
    };
    const Plan plans[] = {
        {1.0 / 3.0, 2.0 / 3.0, 0.625},
        {0.25, 0.6, -1.0},
        {0.4, 0.75, -1.0},
        {0.3, 0.55, -1.0},
    };
    // Boundaries sit on a 0.5 s grid, or on the sample grid for short runs.
    const double step = duration_s >= 30.0 ? 0.5 : 1.0 / spec.sample_rate_hz;
    auto at = [&](double f) { return std::clamp(std::round(f * duration_s / step) * step, 0.0, duration_s); };
    for (std::size_t m = 0; m < spec.machines.size(); ++m) {
        const auto& id = spec.machines[m];
        const auto& plan = plans[m];
        const double a = at(plan.active_start);
        const double w = at(plan.waiting_start);
        const double f = plan.failure_start > 0.0 ? at(plan.failure_start) : w;
        const PhaseInterval parts[] = {{id, 0.0, a, MachineState::Idle},
                                       {id, a, f, MachineState::Active},
                                       {id, f, w, MachineState::Failure},
                                       {id, w, duration_s, MachineState::Waiting}};
        for (const auto& p : parts) {
            if (!(p.start_s < p.end_s)) continue;  // collapsed at very short durations
            spec.phase_schedule.push_back(p);
            if (p.state == MachineState::Failure) spec.failure_windows.push_back({id, p.start_s, p.end_s});
        }
    }
    return spec;
}

void validate_scenario(const ScenarioSpec& spec) {
    if (!(spec.sample_rate_hz > 0.0) || !std::isfinite(spec.sample_rate_hz)) invalid("sample_rate must be positive");
    if (!(spec.duration_s >= 0.0) || !std::isfinite(spec.duration_s)) invalid("duration must be non-negative");
    if (spec.start_ts < 0) invalid("start_ts must be non-negative");
    if (spec.machines.empty()) invalid("at least one machine is required");
    std::map<std::string, int> seen;
    for (const auto& m : spec.machines) {
        if (!is_valid_asset_id(m)) invalid("invalid machine id '" + m + "'");
        if (seen[m]++) invalid("duplicate machine id '" + m + "'");
    }
    const auto& sm = spec.signal;
    for (double v : {sm.idle_sigma, sm.active_sigma, sm.waiting_sigma, sm.active_amplitude, sm.failure_gain,
                     sm.spike_magnitude, sm.active_frequency_hz}) {
        if (!(v >= 0.0) || !std::isfinite(v)) invalid("signal model parameters must be finite and non-negative");
    }
    if (!(sm.spike_rate >= 0.0 && sm.spike_rate <= 1.0)) invalid("spike_rate must lie in [0,1]");
    if (!(sm.missing_rate >= 0.0 && sm.missing_rate < 1.0)) invalid("missing_rate must lie in [0,1)");

    for (const auto& p : spec.phase_schedule) {
        if (!seen.count(p.machine)) invalid("schedule names unknown machine '" + p.machine + "'");
        if (!(p.start_s < p.end_s)) invalid("empty or inverted schedule interval for '" + p.machine + "'");
    }
    if (spec.duration_s > 0.0) {
        for (const auto& m : spec.machines) {
            std::vector<PhaseInterval> mine;
            for (const auto& p : spec.phase_schedule)
                if (p.machine == m) mine.push_back(p);
            std::sort(mine.begin(), mine.end(), [](auto& a, auto& b) { return a.start_s < b.start_s; });
            double cursor = 0.0;
            for (const auto& p : mine) {
                if (p.start_s != cursor) invalid("schedule for '" + m + "' has a gap or overlap at " + std::to_string(cursor) + " s");
                cursor = p.end_s;
            }
            if (cursor != spec.duration_s) invalid("schedule for '" + m + "' does not cover [0, duration)");
        }
    }
    for (const auto& w : spec.failure_windows) {
        if (!seen.count(w.machine)) invalid("failure window names unknown machine '" + w.machine + "'");
        if (!(w.start_s < w.end_s)) invalid("empty failure window");
        const bool inside = std::any_of(spec.phase_schedule.begin(), spec.phase_schedule.end(), [&](const auto& p) {
            return p.machine == w.machine && p.state == MachineState::Failure && p.start_s <= w.start_s &&
                   w.end_s <= p.end_s;
        });
        if (!inside) invalid("failure window for '" + w.machine + "' is not inside a Failure interval");
    }
}

const MachineTruth* GroundTruth::find(std::string_view machine) const noexcept {
    for (const auto& m : machines)
        if (m.machine == machine) return &m;
    return nullptr;
}

GroundTruth project_ground_truth(const ScenarioSpec& spec, std::size_t block_size) {
    validate_scenario(spec);
    if (block_size == 0) throw Error(ErrorCode::InvalidArgument, "block_size must be >= 1");
    GroundTruth truth;
    truth.block_size = block_size;
    const std::size_t n = spec.samples_per_machine();
    if (n == 0) return truth;
    const std::size_t blocks = (n + block_size - 1) / block_size;

    for (const auto& machine : spec.machines) {
        MachineTruth mt;
        mt.machine = machine;
        mt.sample_count = n;
        mt.block_count = blocks;
        const auto states = expand_schedule(spec, machine);
        for (std::size_t i = 1; i < n; ++i)
            if (states[i] != states[i - 1]) mt.change_samples.push_back(i);
        for (auto c : mt.change_samples) {
            // nearest block boundary
            const std::size_t b = (c + block_size / 2) / block_size;
            if (b == 0 || b >= blocks) continue;
            if (mt.change_points.empty() || mt.change_points.back() < b) mt.change_points.push_back(b);
        }
        mt.block_states.reserve(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t lo = b * block_size;
            const std::size_t hi = std::min(n, lo + block_size);
            mt.block_states.push_back(states[lo + (hi - lo) / 2]);
        }
        std::vector<bool> flagged(blocks, false);
        for (const auto& w : spec.failure_windows) {
            if (w.machine != machine) continue;
            const std::size_t a = std::min(n, sample_at_or_after(w.start_s, spec.sample_rate_hz));
            const std::size_t e = std::min(n, sample_at_or_after(w.end_s, spec.sample_rate_hz));
            if (a >= e) continue;
            for (std::size_t b = a / block_size; b < (e + block_size - 1) / block_size; ++b) flagged[b] = true;
        }
        for (std::size_t b = 0; b < blocks; ++b)
            if (flagged[b]) mt.anomaly_blocks.push_back(b);
        truth.machines.push_back(std::move(mt));
    }
    return truth;
}

double simulate_accel(const ScenarioSpec& spec, std::string_view machine, Channel axis, std::size_t index,
                      MachineState state) {
    const auto& sm = spec.signal;
    const std::size_t a = axis_index(axis);
    const CounterRng rng = CounterRng(spec.seed).derive(fnv1a64(machine)).derive(a);
    const double t = static_cast<double>(index) / spec.sample_rate_hz;
    const double phase_offset = 2.0 * std::numbers::pi * static_cast<double>(a) / 3.0;
    const double wave = std::sin(2.0 * std::numbers::pi * sm.active_frequency_hz * t + phase_offset);

    switch (state) {
    case MachineState::Idle: return sm.idle_sigma * rng.normal(index);
    case MachineState::Waiting: return sm.waiting_sigma * rng.normal(index);
    case MachineState::Active: return sm.active_amplitude * wave + sm.active_sigma * rng.normal(index);
    case MachineState::Failure: {
        double v = sm.failure_gain * sm.active_amplitude * wave + sm.active_sigma * rng.normal(index);
        if (rng.uniform(index, 2) < sm.spike_rate) v += (rng.uniform(index, 3) < 0.5 ? -1.0 : 1.0) * sm.spike_magnitude;
        return v;
    }
    }
    return 0.0;
}

ScenarioStream::ScenarioStream(ScenarioSpec spec) : spec_(std::move(spec)) {
    validate_scenario(spec_);
    total_ = spec_.samples_per_machine();
    states_.reserve(spec_.machines.size());
    for (const auto& m : spec_.machines) states_.push_back(expand_schedule(spec_, m));
}

void ScenarioStream::fill_pending() {
    pending_.clear();
    pending_pos_ = 0;
    const std::size_t i = index_++;
    const std::int64_t ts = spec_.sample_ts(i);
    for (std::size_t m = 0; m < spec_.machines.size(); ++m) {
        const auto& id = spec_.machines[m];
        const MachineState state = states_[m][i];
        if (i == 0 || states_[m][i - 1] != state)
            pending_.push_back({id, Channel::PlcState, ts, encode_machine_state(state), Quality::Good});
        const CounterRng drop = CounterRng(spec_.seed).derive(fnv1a64(id)).derive(0xd209);
        for (Channel axis : kAccelChannels) {
            TelemetrySample s{id, axis, ts, simulate_accel(spec_, id, axis, i, state), Quality::Good};
            if (spec_.signal.missing_rate > 0.0 && drop.uniform(i, axis_index(axis)) < spec_.signal.missing_rate) {
                s.value = 0.0;
                s.quality = Quality::Missing;
            }
            pending_.push_back(std::move(s));
        }
    }
}

std::optional<TelemetrySample> ScenarioStream::next() {
    while (pending_pos_ >= pending_.size()) {
        if (index_ >= total_) return std::nullopt;
        fill_pending();
    }
    return std::move(pending_[pending_pos_++]);
}

SimulationResult simulate_scenario(const ScenarioSpec& spec, std::size_t block_size) {
    SimulationResult result;
    result.truth = project_ground_truth(spec, block_size);
    ScenarioStream stream(spec);
    result.samples.reserve(spec.samples_per_machine() * spec.machines.size() * 3);
    while (auto s = stream.next()) result.samples.push_back(std::move(*s));
    return result;
}

} // namespace twinforge
