#pragma once

#include "omot/scenario.hpp"
#include "omot/trajectory.hpp"

#include <string>

namespace omot::json_io {

inline constexpr const char* kBundleSchema = "omot-bundle/1";
inline constexpr const char* kTrajectorySchema = "omot-trajs/1";

// Lossless, byte-stable serialization of the internal types; identical inputs
// always produce identical bytes. Readers reject unknown schema tags.
void write_bundle(const ScenarioBundle& bundle, const std::string& path);
ScenarioBundle read_bundle(const std::string& path);

void write_trajectories(const TrajectorySet& set, const std::string& sequence_id,
                        const std::string& path);
struct TrajectoryFile {
    std::string sequence_id;
    TrajectorySet set;
};
TrajectoryFile read_trajectories(const std::string& path);

}  // namespace omot::json_io
