#pragma once

#include "twinforge/anomaly.hpp"
#include "twinforge/machine_state.hpp"
#include "twinforge/telemetry.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twinforge {

enum class LifecyclePhase { Unbound, Bound, Synchronized, OutOfSync, Done, Stopped };
enum class LifecycleEvent { Bind, SyncEstablished, SyncLost, SyncRecovered, WorkComplete, Stop, Fault };

inline constexpr LifecyclePhase kAllPhases[] = {
    LifecyclePhase::Unbound, LifecyclePhase::Bound, LifecyclePhase::Synchronized,
    LifecyclePhase::OutOfSync, LifecyclePhase::Done, LifecyclePhase::Stopped};
inline constexpr LifecycleEvent kAllEvents[] = {
    LifecycleEvent::Bind, LifecycleEvent::SyncEstablished, LifecycleEvent::SyncLost,
    LifecycleEvent::SyncRecovered, LifecycleEvent::WorkComplete, LifecycleEvent::Stop,
    LifecycleEvent::Fault};

std::string_view to_string(LifecyclePhase phase) noexcept;
std::string_view to_string(LifecycleEvent event) noexcept;

/// The transition table. Returns nullopt for pairs the table does not list.
std::optional<LifecyclePhase> next_phase(LifecyclePhase phase, LifecycleEvent event) noexcept;

inline constexpr auto kDefaultFreshnessTimeout = std::chrono::seconds(5);

struct PropertyValue {
    double value = 0.0;
    std::int64_t ts = 0;

    bool operator==(const PropertyValue&) const = default;
};

enum class DigitalEventKind { StateChanged, AnomalyDetected };

std::string_view to_string(DigitalEventKind kind) noexcept;

struct DigitalEvent {
    DigitalEventKind kind = DigitalEventKind::StateChanged;
    LifecyclePhase phase = LifecyclePhase::Unbound;  // phase the twin was in when emitted
    std::int64_t ts = 0;
    std::optional<MachineState> from_state;  // StateChanged only
    MachineState to_state = MachineState::Idle;
    std::optional<AnomalyEvent> anomaly;     // AnomalyDetected only

    bool operator==(const DigitalEvent&) const = default;
};

struct ActionDescriptor {
    std::string name;
    std::string description;

    bool operator==(const ActionDescriptor&) const = default;
};

struct TwinState {
    std::map<std::string, PropertyValue> properties;
    std::vector<DigitalEvent> events;
    std::map<std::string, std::string> relationships;
    std::map<std::string, ActionDescriptor> actions;

    bool operator==(const TwinState&) const = default;
};

struct TwinSnapshot {
    std::string asset_id;
    LifecyclePhase phase = LifecyclePhase::Unbound;
    std::optional<MachineState> machine_state;
    TwinState state;

    bool operator==(const TwinSnapshot&) const = default;
};

struct StateDelta {
    std::vector<std::string> changed_properties;
    std::vector<DigitalEvent> events;
    bool stale = false;      // sample older than the stored property; nothing applied
    bool recovered = false;  // sample pulled the twin from OutOfSync back to Synchronized
};

inline constexpr std::string_view kMachineStateProperty = "machine_state";

/// Lifecycle-aware digital state of one machine. All mutations are
/// serialized on an internal mutex; snapshots are detached copies.
class TwinInstance {
public:
    TwinInstance(std::string asset_id, std::map<std::string, std::string> relationships);

    TwinInstance(const TwinInstance&) = delete;
    TwinInstance& operator=(const TwinInstance&) = delete;

    const std::string& asset_id() const noexcept { return asset_id_; }
    LifecyclePhase phase() const;

    /// Throws InvalidTransition and leaves the phase unchanged when the pair
    /// is not in the table.
    LifecyclePhase apply(LifecycleEvent event);

    /// Throws TwinNotBound outside Bound/Synchronized/OutOfSync.
    StateDelta shadow(const TelemetrySample& sample);

    std::optional<LifecycleEvent> check_freshness(std::int64_t now_ns,
                                                  std::chrono::nanoseconds timeout) const;

    /// Appends only if the twin is currently in `required`. Returns whether
    /// the event was appended; the check and the append are atomic.
    bool append_event_if(LifecyclePhase required, DigitalEvent event);

    void register_action(ActionDescriptor action);

    TwinSnapshot snapshot() const;

private:
    LifecyclePhase apply_locked(LifecycleEvent event);

    std::string asset_id_;
    mutable std::mutex mutex_;
    LifecyclePhase phase_ = LifecyclePhase::Unbound;
    std::optional<MachineState> machine_state_;
    TwinState state_;
};

/// Owns the twins of one runtime; asset ids are unique.
class TwinRuntime {
public:
    /// Throws InvalidId (empty or malformed id) or DuplicateAssetId.
    TwinInstance& create_twin(const std::string& asset_id,
                              std::map<std::string, std::string> relationships = {});

    TwinInstance* find(std::string_view asset_id) noexcept;
    const TwinInstance* find(std::string_view asset_id) const noexcept;

    std::vector<std::string> asset_ids() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<TwinInstance>, std::less<>> twins_;
};

// Free-function forms of the twin operations.
TwinInstance& create_twin(TwinRuntime& runtime, const std::string& asset_id,
                          std::map<std::string, std::string> relationships = {});
LifecyclePhase apply_lifecycle_event(TwinInstance& twin, LifecycleEvent event);
StateDelta shadow_sample(TwinInstance& twin, const TelemetrySample& sample);
std::optional<LifecycleEvent> check_freshness(const TwinInstance& twin, std::int64_t now_ns,
                                              std::chrono::nanoseconds timeout = kDefaultFreshnessTimeout);
TwinSnapshot snapshot_state(const TwinInstance& twin);

/// Standard availability x performance x quality decomposition.
struct OeeInputs {
    double uptime_s = 0.0;
    double downtime_s = 0.0;
    double actual_rate = 0.0;  // units/hour
    double ideal_rate = 1.0;   // units/hour, > 0
    double quality_factor = 1.0;
};

/// Throws InvalidArgument when the inputs are out of domain.
double compute_oee(const OeeInputs& inputs);

} // namespace twinforge
