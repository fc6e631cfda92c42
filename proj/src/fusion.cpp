#include "omot/fusion.hpp"

#include "omot/parallel.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace omot::fusion {

void FusionConfig::validate() const {
    if (det_confidence_threshold < 0.0 || det_confidence_threshold > 1.0)
        throw std::invalid_argument("fusion: det_confidence_threshold must be in [0, 1]");
    if (overlap_threshold < 0)
        throw std::invalid_argument("fusion: overlap_threshold must be >= 0");
}

ScoreMatrix mask_point_overlap(const std::vector<InstanceMask>& masks,
                               const std::vector<std::vector<Pixel>>& projected_per_box) {
    const int n_boxes = static_cast<int>(projected_per_box.size());
    const int n_masks = static_cast<int>(masks.size());
    ScoreMatrix m(n_boxes, n_masks);
    for (int i = 0; i < n_boxes; ++i) {
        // Deduplicate: each occupied pixel counts once regardless of how many
        // points landed on it.
        std::unordered_set<uint64_t> distinct;
        for (const Pixel& p : projected_per_box[i]) {
            distinct.insert((static_cast<uint64_t>(p.v) << 32) | static_cast<uint32_t>(p.u));
        }
        for (int j = 0; j < n_masks; ++j) {
            int overlap = 0;
            for (uint64_t packed : distinct) {
                const int v = static_cast<int>(packed >> 32);
                const int u = static_cast<int>(packed & 0xffffffffu);
                if (masks[j].contains(u, v)) overlap += 1;
            }
            if (overlap == 0) {
                m.forbid(i, j);
            } else {
                m.set_score(i, j, overlap);
            }
        }
    }
    return m;
}

std::vector<FusedDetection> fuse_frame(const std::vector<Detection>& dets,
                                       const std::vector<InstanceMask>& masks,
                                       const PointCloud& cloud, const CameraModel& cam,
                                       const FusionConfig& cfg) {
    cfg.validate();
    const uint32_t bound = static_cast<uint32_t>(cam.image_width) * cam.image_height;
    for (const InstanceMask& mask : masks) {
        if (mask.width != cam.image_width || mask.height != cam.image_height)
            throw std::invalid_argument("fusion: mask " + std::to_string(mask.id) +
                                        " image size does not match the camera");
        if (!mask.pixels.empty() && mask.pixels.back() >= bound)
            throw std::invalid_argument("fusion: mask " + std::to_string(mask.id) +
                                        " has pixels outside the image bounds");
    }

    // Crop, project, align (Algorithm steps), one box at a time.
    std::vector<std::vector<Pixel>> projected(dets.size());
    if (!masks.empty()) {
        for (size_t i = 0; i < dets.size(); ++i) {
            const std::vector<int> inside = points_in_box(cloud, dets[i].box);
            std::vector<Vec3> pts;
            pts.reserve(inside.size());
            for (int idx : inside) pts.push_back(cloud.points[idx]);
            projected[i] = project_points(pts, cam).pixels;
        }
    }

    std::vector<int> matched_mask(dets.size(), -1);
    std::vector<int> matched_overlap(dets.size(), 0);
    if (!masks.empty()) {
        const ScoreMatrix scores = mask_point_overlap(masks, projected);
        const Assignment assignment = solve_max_assignment(scores);
        for (const auto& [box_i, mask_j] : assignment.matches) {
            matched_mask[box_i] = masks[mask_j].id;
            matched_overlap[box_i] = static_cast<int>(scores.score(box_i, mask_j));
        }
    }

    std::vector<FusedDetection> kept;
    for (size_t i = 0; i < dets.size(); ++i) {
        const bool by_confidence =
            dets[i].box.confidence >= cfg.det_confidence_threshold;
        // With the default threshold of zero, an assigned pair still needs a
        // strictly positive overlap; zero-pixel matches carry no evidence.
        const bool by_mask = matched_mask[i] >= 0 && matched_overlap[i] > 0 &&
                             matched_overlap[i] >= cfg.overlap_threshold;
        if (!by_confidence && !by_mask) continue;
        FusedDetection fd;
        fd.detection = dets[i];
        fd.rule = by_confidence && by_mask ? KeepRule::kBoth
                  : by_confidence         ? KeepRule::kConfidence
                                          : KeepRule::kMask;
        if (by_mask) {
            fd.mask_id = matched_mask[i];
            fd.overlap = matched_overlap[i];
        }
        kept.push_back(fd);
    }
    return kept;
}

ScenarioBundle fuse_bundle(const ScenarioBundle& bundle, const FusionConfig& cfg, int jobs) {
    bundle.validate();
    cfg.validate();

    static const PointCloud kEmptyCloud;
    static const std::vector<InstanceMask> kNoMasks;

    auto fuse_one = [&](int f) -> std::vector<Detection> {
        const std::vector<InstanceMask>& masks =
            bundle.masks.empty() ? kNoMasks : bundle.masks[f].masks;
        const PointCloud& cloud = bundle.clouds.empty() ? kEmptyCloud : bundle.clouds[f];
        std::vector<Detection> selected;
        for (const FusedDetection& fd :
             fuse_frame(bundle.detections[f].detections, masks, cloud, bundle.calib, cfg)) {
            selected.push_back(fd.detection);
        }
        return selected;
    };

    const auto selected = parallel_map<std::vector<Detection>>(
        bundle.frame_count, jobs, fuse_one);

    ScenarioBundle out = bundle;
    for (int f = 0; f < bundle.frame_count; ++f) {
        out.detections[f].detections = selected[f];
    }
    return out;
}

}  // namespace omot::fusion
