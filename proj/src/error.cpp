#include "twinforge/error.hpp"
#include "twinforge/machine_state.hpp"

namespace twinforge {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidId: return "InvalidId";
    case ErrorCode::DuplicateAssetId: return "DuplicateAssetId";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::TwinNotBound: return "TwinNotBound";
    case ErrorCode::InvalidAssetId: return "InvalidAssetId";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnknownAsset: return "UnknownAsset";
    case ErrorCode::OverlappingSegment: return "OverlappingSegment";
    case ErrorCode::UnknownReplicaVersion: return "UnknownReplicaVersion";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::AxisLengthMismatch: return "AxisLengthMismatch";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::SeriesTooLong: return "SeriesTooLong";
    case ErrorCode::KExceedsN: return "KExceedsN";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoResults: return "NoResults";
    case ErrorCode::MixedVersions: return "MixedVersions";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(MachineState state) noexcept {
    switch (state) {
    case MachineState::Idle: return "idle";
    case MachineState::Active: return "active";
    case MachineState::Waiting: return "waiting";
    case MachineState::Failure: return "failure";
    }
    return "unknown";
}

std::optional<MachineState> parse_machine_state(std::string_view name) noexcept {
    for (auto s : {MachineState::Idle, MachineState::Active, MachineState::Waiting, MachineState::Failure}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

std::optional<MachineState> decode_machine_state(double code) noexcept {
    if (code == 0.0) return MachineState::Idle;
    if (code == 1.0) return MachineState::Active;
    if (code == 2.0) return MachineState::Waiting;
    if (code == 3.0) return MachineState::Failure;
    return std::nullopt;
}

} // namespace twinforge
