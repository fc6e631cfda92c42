#include "omot/scenario.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace omot {

bool InstanceMask::contains(uint32_t packed) const {
    return std::binary_search(pixels.begin(), pixels.end(), packed);
}

void ScenarioBundle::validate() const {
    if (static_cast<int>(detections.size()) != frame_count) {
        throw std::invalid_argument("bundle: detections cover " +
                                    std::to_string(detections.size()) + " frames, expected " +
                                    std::to_string(frame_count));
    }
    if (!masks.empty() && static_cast<int>(masks.size()) != frame_count) {
        throw std::invalid_argument("bundle: mask frames do not match frame count");
    }
    if (!clouds.empty() && static_cast<int>(clouds.size()) != frame_count) {
        throw std::invalid_argument("bundle: cloud frames do not match frame count");
    }
    std::unordered_set<int> seen;
    for (const FrameDetections& fd : detections) {
        seen.clear();
        for (const Detection& det : fd.detections) {
            if (!seen.insert(det.index).second) {
                throw std::invalid_argument("bundle: duplicate detection index " +
                                            std::to_string(det.index) + " in frame " +
                                            std::to_string(fd.frame));
            }
        }
    }
}

}  // namespace omot
