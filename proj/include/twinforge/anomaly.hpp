#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace twinforge {

/// A segment flagged because its cluster is rare within one replica's output.
struct AnomalyEvent {
    std::string machine;
    std::string replica_version;
    std::size_t segment_index = 0;
    std::size_t block_start = 0;
    std::size_t block_end = 0;
    int cluster_label = 0;
    double rarity = 0.0;
    std::int64_t ts = 0;

    bool operator==(const AnomalyEvent&) const = default;
};

} // namespace twinforge
