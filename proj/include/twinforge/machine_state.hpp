#pragma once

#include <optional>
#include <string_view>

namespace twinforge {

/// Operational state reported on the PLC channel as integer codes 0..3.
enum class MachineState { Idle = 0, Active = 1, Waiting = 2, Failure = 3 };

std::string_view to_string(MachineState state) noexcept;
std::optional<MachineState> parse_machine_state(std::string_view name) noexcept;

/// Decodes a PLC value; only the exact codes 0, 1, 2, 3 are accepted.
std::optional<MachineState> decode_machine_state(double code) noexcept;

constexpr double encode_machine_state(MachineState state) noexcept {
    return static_cast<double>(static_cast<int>(state));
}

} // namespace twinforge
