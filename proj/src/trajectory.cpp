#include "omot/trajectory.hpp"

#include <unordered_set>

namespace omot {

std::vector<ObjectLink> links_of(const Trajectory& t) {
    std::vector<ObjectLink> links;
    if (t.observations.size() < 2) return links;
    links.reserve(t.observations.size() - 1);
    for (size_t i = 0; i + 1 < t.observations.size(); ++i) {
        links.push_back({t.id, t.observations[i].key(), t.observations[i + 1].key()});
    }
    return links;
}

std::vector<ExclusivityViolation> frame_exclusivity_violations(const TrajectorySet& set) {
    std::vector<ExclusivityViolation> violations;
    std::unordered_set<int> frames;
    for (const Trajectory& t : set.trajectories) {
        frames.clear();
        for (const Observation& obs : t.observations) {
            if (!frames.insert(obs.frame).second) {
                violations.push_back({t.id, obs.frame});
            }
        }
    }
    return violations;
}

}  // namespace omot
