#pragma once

#include "omot/geometry.hpp"
#include "omot/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace omot {

// A 3D detection with its per-frame index; the (frame, index) pair is the
// identity that threads through fusion, tracking, and trajectory fusion.
struct Detection {
    int index = 0;
    Box3D box;
};

struct FrameDetections {
    int frame = 0;
    std::vector<Detection> detections;
};

// 2D instance mask as a set of occupied pixels, packed as v * width + u.
// The pixel list is kept sorted for deterministic iteration and lookup.
struct InstanceMask {
    int id = 0;
    double confidence = 1.0;
    int width = 0;   // image width the pixels are packed against
    int height = 0;
    std::vector<uint32_t> pixels;  // sorted, unique

    bool contains(uint32_t packed) const;
    bool contains(int u, int v) const {
        return contains(static_cast<uint32_t>(v) * width + u);
    }
};

struct MaskFrame {
    int frame = 0;
    std::vector<InstanceMask> masks;
};

// One whole sequence: calibration, per-frame detections, optional masks,
// point clouds, and ground truth.
struct ScenarioBundle {
    std::string sequence_id;
    int frame_count = 0;
    CameraModel calib;
    std::vector<FrameDetections> detections;      // one entry per frame
    std::vector<MaskFrame> masks;                 // empty, or one per frame
    std::vector<PointCloud> clouds;               // empty, or one per frame
    std::optional<TrajectorySet> ground_truth;

    // Throws std::invalid_argument on duplicate detection keys or
    // frame-count mismatches.
    void validate() const;
};

}  // namespace omot
