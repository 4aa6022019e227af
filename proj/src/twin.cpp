#include "twinforge/twin.hpp"

#include "twinforge/error.hpp"

#include <algorithm>
#include <cmath>

namespace twinforge {

std::string_view to_string(LifecyclePhase phase) noexcept {
    switch (phase) {
    case LifecyclePhase::Unbound: return "Unbound";
    case LifecyclePhase::Bound: return "Bound";
    case LifecyclePhase::Synchronized: return "Synchronized";
    case LifecyclePhase::OutOfSync: return "OutOfSync";
    case LifecyclePhase::Done: return "Done";
    case LifecyclePhase::Stopped: return "Stopped";
    }
    return "Unknown";
}

std::string_view to_string(LifecycleEvent event) noexcept {
    switch (event) {
    case LifecycleEvent::Bind: return "Bind";
    case LifecycleEvent::SyncEstablished: return "SyncEstablished";
    case LifecycleEvent::SyncLost: return "SyncLost";
    case LifecycleEvent::SyncRecovered: return "SyncRecovered";
    case LifecycleEvent::WorkComplete: return "WorkComplete";
    case LifecycleEvent::Stop: return "Stop";
    case LifecycleEvent::Fault: return "Fault";
    }
    return "Unknown";
}

std::string_view to_string(DigitalEventKind kind) noexcept {
    switch (kind) {
    case DigitalEventKind::StateChanged: return "state_changed";
    case DigitalEventKind::AnomalyDetected: return "anomaly_detected";
    }
    return "unknown";
}

std::optional<LifecyclePhase> next_phase(LifecyclePhase phase, LifecycleEvent event) noexcept {
    using P = LifecyclePhase;
    using E = LifecycleEvent;
    if (event == E::Fault) return P::Unbound;
    switch (phase) {
    case P::Unbound:
        if (event == E::Bind) return P::Bound;
        break;
    case P::Bound:
        if (event == E::SyncEstablished) return P::Synchronized;
        break;
    case P::Synchronized:
        if (event == E::SyncLost) return P::OutOfSync;
        if (event == E::WorkComplete) return P::Done;
        break;
    case P::OutOfSync:
        if (event == E::SyncRecovered) return P::Synchronized;
        break;
    case P::Done:
        if (event == E::Stop) return P::Stopped;
        break;
    case P::Stopped:
        break;
    }
    return std::nullopt;
}

TwinInstance::TwinInstance(std::string asset_id, std::map<std::string, std::string> relationships)
    : asset_id_(std::move(asset_id)) {
    state_.relationships = std::move(relationships);
}

LifecyclePhase TwinInstance::phase() const {
    std::lock_guard lock(mutex_);
    return phase_;
}

LifecyclePhase TwinInstance::apply_locked(LifecycleEvent event) {
    auto next = next_phase(phase_, event);
    if (!next) {
        throw Error(ErrorCode::InvalidTransition, std::string(to_string(event)) + " is not accepted in phase " +
                                                      std::string(to_string(phase_)));
    }
    phase_ = *next;
    return phase_;
}

LifecyclePhase TwinInstance::apply(LifecycleEvent event) {
    std::lock_guard lock(mutex_);
    return apply_locked(event);
}

StateDelta TwinInstance::shadow(const TelemetrySample& sample) {
    std::lock_guard lock(mutex_);
    if (phase_ != LifecyclePhase::Bound && phase_ != LifecyclePhase::Synchronized &&
        phase_ != LifecyclePhase::OutOfSync) {
        throw Error(ErrorCode::TwinNotBound,
                    "twin '" + asset_id_ + "' cannot shadow in phase " + std::string(to_string(phase_)));
    }

    if (sample.asset_id != asset_id_)
        throw Error(ErrorCode::InvalidArgument, "sample for '" + sample.asset_id + "' sent to twin '" + asset_id_ + "'");

    StateDelta delta;
    const bool is_plc = sample.channel == Channel::PlcState;
    const std::string name = is_plc ? std::string(kMachineStateProperty) : std::string(to_string(sample.channel));

    auto it = state_.properties.find(name);
    if (it != state_.properties.end() && sample.ts < it->second.ts) {
        delta.stale = true;
        return delta;
    }

    if (phase_ == LifecyclePhase::OutOfSync) {
        apply_locked(LifecycleEvent::SyncRecovered);
        delta.recovered = true;
    }

    state_.properties[name] = PropertyValue{sample.value, sample.ts};
    delta.changed_properties.push_back(name);

    if (is_plc && sample.quality == Quality::Good) {
        if (auto decoded = decode_machine_state(sample.value); decoded && decoded != machine_state_) {
            DigitalEvent ev;
            ev.kind = DigitalEventKind::StateChanged;
            ev.phase = phase_;
            ev.ts = sample.ts;
            ev.from_state = machine_state_;
            ev.to_state = *decoded;
            machine_state_ = decoded;
            state_.events.push_back(ev);
            delta.events.push_back(std::move(ev));
        }
    }
    return delta;
}

std::optional<LifecycleEvent> TwinInstance::check_freshness(std::int64_t now_ns,
                                                            std::chrono::nanoseconds timeout) const {
    if (timeout.count() <= 0) throw Error(ErrorCode::InvalidArgument, "freshness timeout must be positive");
    std::lock_guard lock(mutex_);
    if (phase_ != LifecyclePhase::Synchronized) return std::nullopt;
    // A synchronized twin that never saw a sample counts as last seen at 0.
    std::int64_t latest = 0;
    for (const auto& [_, p] : state_.properties) latest = std::max(latest, p.ts);
    if (now_ns - latest > timeout.count()) return LifecycleEvent::SyncLost;
    return std::nullopt;
}

bool TwinInstance::append_event_if(LifecyclePhase required, DigitalEvent event) {
    std::lock_guard lock(mutex_);
    if (phase_ != required) return false;
    event.phase = phase_;
    state_.events.push_back(std::move(event));
    return true;
}

void TwinInstance::register_action(ActionDescriptor action) {
    std::lock_guard lock(mutex_);
    auto name = action.name;
    state_.actions[name] = std::move(action);
}

TwinSnapshot TwinInstance::snapshot() const {
    std::lock_guard lock(mutex_);
    return TwinSnapshot{asset_id_, phase_, machine_state_, state_};
}

TwinInstance& TwinRuntime::create_twin(const std::string& asset_id, std::map<std::string, std::string> relationships) {
    if (!is_valid_asset_id(asset_id)) throw Error(ErrorCode::InvalidId, "invalid asset id '" + asset_id + "'");
    std::lock_guard lock(mutex_);
    if (twins_.count(asset_id)) throw Error(ErrorCode::DuplicateAssetId, asset_id);
    auto twin = std::make_unique<TwinInstance>(asset_id, std::move(relationships));
    auto& ref = *twin;
    twins_.emplace(asset_id, std::move(twin));
    return ref;
}

TwinInstance* TwinRuntime::find(std::string_view asset_id) noexcept {
    std::lock_guard lock(mutex_);
    auto it = twins_.find(asset_id);
    return it == twins_.end() ? nullptr : it->second.get();
}

const TwinInstance* TwinRuntime::find(std::string_view asset_id) const noexcept {
    std::lock_guard lock(mutex_);
    auto it = twins_.find(asset_id);
    return it == twins_.end() ? nullptr : it->second.get();
}

std::vector<std::string> TwinRuntime::asset_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : twins_) ids.push_back(id);
    return ids;
}

TwinInstance& create_twin(TwinRuntime& runtime, const std::string& asset_id,
                          std::map<std::string, std::string> relationships) {
    return runtime.create_twin(asset_id, std::move(relationships));
}

LifecyclePhase apply_lifecycle_event(TwinInstance& twin, LifecycleEvent event) { return twin.apply(event); }

StateDelta shadow_sample(TwinInstance& twin, const TelemetrySample& sample) { return twin.shadow(sample); }

std::optional<LifecycleEvent> check_freshness(const TwinInstance& twin, std::int64_t now_ns,
                                              std::chrono::nanoseconds timeout) {
    return twin.check_freshness(now_ns, timeout);
}

TwinSnapshot snapshot_state(const TwinInstance& twin) { return twin.snapshot(); }

double compute_oee(const OeeInputs& in) {
    auto bad = [](double v) { return !std::isfinite(v) || v < 0.0; };
    if (bad(in.uptime_s) || bad(in.downtime_s) || bad(in.actual_rate) || bad(in.ideal_rate))
        throw Error(ErrorCode::InvalidArgument, "OEE inputs must be finite and non-negative");
    if (!(in.ideal_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "ideal_rate must be positive");
    if (!(in.quality_factor >= 0.0 && in.quality_factor <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "quality_factor must lie in [0,1]");

    const double total = in.uptime_s + in.downtime_s;
    const double availability = total > 0.0 ? in.uptime_s / total : 0.0;
    const double performance = std::min(1.0, in.actual_rate / in.ideal_rate);
    return availability * performance * in.quality_factor;
}

} // namespace twinforge
