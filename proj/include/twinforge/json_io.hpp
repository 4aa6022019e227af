#pragma once

#include "twinforge/archive.hpp"
#include "twinforge/orchestrator.hpp"
#include "twinforge/simulator.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace twinforge {

// Scenario files. Unknown keys are rejected; omitted keys take defaults.
ScenarioSpec scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

nlohmann::json ground_truth_to_json(const GroundTruth& truth);

nlohmann::json segment_record_to_json(const SegmentRecord& record);
SegmentRecord segment_record_from_json(const nlohmann::json& j);

nlohmann::json anomaly_to_json(const AnomalyEvent& anomaly);

inline constexpr int kReportFormatVersion = 1;
inline constexpr int kTimelineFormatVersion = 1;
inline constexpr int kAnomaliesFormatVersion = 1;

/// Deterministic: wall times are deliberately left out.
nlohmann::json report_to_json(const BenchmarkReport& report);

/// "--grid" override, e.g. {"penalty":[10,40],"k":[2,3]}. Throws InvalidArgument.
ParamGrid grid_from_json(std::string_view text);
nlohmann::json grid_to_json(const ParamGrid& grid);

/// Serializes with a trailing newline.
std::string dump_pretty(const nlohmann::json& j);

} // namespace twinforge
