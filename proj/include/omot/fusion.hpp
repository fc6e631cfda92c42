#pragma once

#include "omot/assign.hpp"
#include "omot/geometry.hpp"
#include "omot/scenario.hpp"

#include <vector>

namespace omot::fusion {

struct FusionConfig {
    double det_confidence_threshold = 0.85;  // boxes at or above pass outright
    int overlap_threshold = 0;               // pixel-count threshold for the fusion rule

    void validate() const;
};

// Overlap counts between each box's projected pixels and each mask. Pixels are
// counted once per box even when several LiDAR points land on them; rows are
// boxes, columns are masks. Zero-overlap pairs are marked forbidden so the
// assignment never matches on no evidence.
ScoreMatrix mask_point_overlap(const std::vector<InstanceMask>& masks,
                               const std::vector<std::vector<Pixel>>& projected_per_box);

enum class KeepRule { kConfidence, kMask, kBoth };

struct FusedDetection {
    Detection detection;
    KeepRule rule = KeepRule::kConfidence;
    int mask_id = -1;   // matched mask, when the fusion rule contributed
    int overlap = 0;    // pixel overlap with the matched mask
};

// Point-level fusion for one frame: crop the cloud per box, project the crops,
// score mask overlaps, solve the assignment, and keep a box iff its confidence
// passes the threshold or its matched overlap exceeds the pixel threshold
// (strictly positive overlap required when the threshold is zero). Throws on
// masks whose pixels fall outside the camera's image bounds.
std::vector<FusedDetection> fuse_frame(const std::vector<Detection>& dets,
                                       const std::vector<InstanceMask>& masks,
                                       const PointCloud& cloud, const CameraModel& cam,
                                       const FusionConfig& cfg);

// Runs per-frame fusion over a whole bundle (frames processed in a parallel
// map, output ordered by frame) and returns the bundle with only the selected
// detections; keys keep their original per-frame indices.
ScenarioBundle fuse_bundle(const ScenarioBundle& bundle, const FusionConfig& cfg,
                           int jobs = 1);

}  // namespace omot::fusion
