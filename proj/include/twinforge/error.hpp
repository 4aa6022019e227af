#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twinforge {

enum class ErrorCode {
    InvalidArgument,
    InvalidId,
    DuplicateAssetId,
    InvalidTransition,
    TwinNotBound,
    InvalidAssetId,
    MalformedLine,
    FileNotFound,
    InvalidSpec,
    UnknownAsset,
    OverlappingSegment,
    UnknownReplicaVersion,
    EmptySeries,
    AllMissing,
    WindowTooLarge,
    AxisLengthMismatch,
    SeriesTooShort,
    SeriesTooLong,
    KExceedsN,
    EmptyInput,
    DimensionMismatch,
    TooFewPoints,
    LengthMismatch,
    EmptyGrid,
    NoResults,
    MixedVersions,
    NoData,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the core carries one of the codes above; the
/// C API maps them one-to-one onto tf_status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix, for re-wrapping.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

/// A stage failure inside one pipeline replica, tagged with the replica
/// version that produced it.
class ReplicaError : public Error {
public:
    ReplicaError(ErrorCode code, std::string replica_version, const std::string& message)
        : Error(code, "replica " + replica_version + ": " + message),
          replica_version_(std::move(replica_version)) {}

    const std::string& replica_version() const noexcept { return replica_version_; }

private:
    std::string replica_version_;
};

} // namespace twinforge
