#pragma once

#include "omot/geometry.hpp"

#include <cstdint>
#include <vector>

namespace omot {

// Identity of a detection: per-frame index into the sequence's detection set.
// Interpolated boxes carry index -1 and are not shared between runs.
struct DetKey {
    int frame = 0;
    int index = -1;

    friend bool operator==(const DetKey&, const DetKey&) = default;
    friend auto operator<=>(const DetKey&, const DetKey&) = default;
};

struct DetKeyHash {
    size_t operator()(const DetKey& k) const {
        return std::hash<int64_t>()((static_cast<int64_t>(k.frame) << 32) ^
                                    static_cast<uint32_t>(k.index));
    }
};

struct Observation {
    int frame = 0;
    int det_index = -1;  // original detection index within the frame; -1 if interpolated
    Box3D box;           // box.confidence carries the detection confidence
    bool interpolated = false;

    DetKey key() const { return {frame, det_index}; }
};

struct Trajectory {
    int id = 0;
    std::vector<Observation> observations;  // strictly increasing frames
};

struct TrajectorySet {
    std::vector<Trajectory> trajectories;
};

// A connection between two consecutive observations of one trajectory,
// canonicalized so that from.frame < to.frame.
struct ObjectLink {
    int trajectory_id = 0;
    DetKey from;
    DetKey to;
};

std::vector<ObjectLink> links_of(const Trajectory& t);

struct ExclusivityViolation {
    int trajectory_id = 0;
    int frame = 0;
};

// Checks that no trajectory holds two boxes at the same frame.
std::vector<ExclusivityViolation> frame_exclusivity_violations(const TrajectorySet& set);

}  // namespace omot
