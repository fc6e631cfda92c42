#pragma once

#include "omot/tracker.hpp"
#include "omot/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace omot::bifuse {

// Reference to a trajectory in one of the two directional sets.
struct TrajRef {
    TimeDirection dir = TimeDirection::kForward;
    int id = 0;

    friend bool operator==(const TrajRef&, const TrajRef&) = default;
    friend auto operator<=>(const TrajRef&, const TrajRef&) = default;
};

// Detection keys shared by one forward and one backward trajectory.
struct SharedBoxes {
    int forward_id = 0;
    int backward_id = 0;
    std::vector<DetKey> keys;  // frame-ascending
};

// Shared keys per overlapping (forward, backward) pair, found by a two-pointer
// merge over the frame-sorted observations of each pair.
std::vector<SharedBoxes> find_common_boxes(const TrajectorySet& forward,
                                           const TrajectorySet& backward);

struct Cluster {
    std::vector<TrajRef> members;  // sorted by (direction, id)
};

// Connected components of the bipartite trajectory-overlap graph (edge iff a
// pair shares at least one detection), found by BFS. Trajectories sharing
// nothing form singleton clusters. Clusters are ordered by smallest member id.
std::vector<Cluster> cluster_trajectories(const TrajectorySet& forward,
                                          const TrajectorySet& backward,
                                          const std::vector<SharedBoxes>& shared);

// A link identity independent of the owning trajectory.
struct LinkKey {
    DetKey from;
    DetKey to;

    friend bool operator==(const LinkKey&, const LinkKey&) = default;
    friend auto operator<=>(const LinkKey&, const LinkKey&) = default;
};

// Links present in both directions, canonicalized to forward frame order.
std::vector<LinkKey> common_links(const TrajectorySet& forward,
                                  const TrajectorySet& backward);

enum class FragmentTag { kCommon, kForwardOnly, kBackwardOnly };

struct FragmentOwner {
    TrajRef ref;
    int first_index = 1;  // 1-based sequential index within the owning trajectory
    int last_index = 1;
};

struct Fragment {
    FragmentTag tag = FragmentTag::kCommon;
    std::vector<Observation> observations;  // frame-ascending
    std::vector<FragmentOwner> owners;      // two for common fragments, one otherwise
};

// Splits every member trajectory at links outside the common-link set.
// Maximal runs of common links become common (guaranteed) fragments, present
// identically in both directions and deduplicated here; the leftover stretches
// of each trajectory become direction-tagged candidate fragments.
std::vector<Fragment> split_into_fragments(const Cluster& cluster,
                                           const TrajectorySet& forward,
                                           const TrajectorySet& backward,
                                           const std::vector<LinkKey>& common);

// Common fragments rank above everything (Z); candidates rank by the larger
// of their first/last sequential index in the owning trajectory, so tails of
// long trajectories outrank heads and short trajectories.
int64_t fragment_priority(const Fragment& f, int64_t z);

struct FusionDiagnostics {
    int clusters = 0;
    int singleton_clusters = 0;
    int chain_clusters = 0;      // resolved by linking shared boxes directly
    int fragment_clusters = 0;   // resolved by fragment selection
    int guaranteed_fragments = 0;
    int candidate_fragments = 0;
    int accepted_candidates = 0;
    int rejected_candidates = 0;
    int dropped_conflicting = 0;  // chain-cluster remainder observations dropped
};

// Fuses one cluster. Singleton clusters pass through verbatim; clusters whose
// shared boxes all sit in distinct frames are linked directly with the
// non-conflicting remainder attached; contradictory clusters go through
// fragment splitting and greedy priority selection under frame exclusivity.
std::vector<Trajectory> fuse_cluster(const Cluster& cluster, const TrajectorySet& forward,
                                     const TrajectorySet& backward,
                                     const std::vector<LinkKey>& common, int64_t z,
                                     FusionDiagnostics* diag = nullptr);

// Full bidirectional fusion: shared-box search, BFS clustering, per-cluster
// fusion, and fresh sequential ids. The output satisfies frame exclusivity.
TrajectorySet fuse(const TrajectorySet& forward, const TrajectorySet& backward,
                   FusionDiagnostics* diag = nullptr);

}  // namespace omot::bifuse
