#include "omot/bifuse.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace omot::bifuse {

namespace {

using KeyMap = std::unordered_map<DetKey, const Trajectory*, DetKeyHash>;

std::unordered_map<int, const Trajectory*> index_by_id(const TrajectorySet& set) {
    std::unordered_map<int, const Trajectory*> out;
    for (const Trajectory& t : set.trajectories) out.emplace(t.id, &t);
    return out;
}

void require_real_keys(const TrajectorySet& set, const char* side) {
    for (const Trajectory& t : set.trajectories) {
        for (const Observation& obs : t.observations) {
            if (obs.det_index < 0)
                throw std::invalid_argument(std::string("bifuse: ") + side +
                                            " trajectory references a synthesized box");
        }
    }
}

std::vector<LinkKey> trajectory_links(const Trajectory& t) {
    std::vector<LinkKey> out;
    for (const ObjectLink& l : links_of(t)) out.push_back({l.from, l.to});
    return out;
}

// Union-find over fragment slots with per-component frame->key occupancy.
class IdentityForest {
public:
    explicit IdentityForest(int n) : parent_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
        occupancy_.resize(n);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    std::unordered_map<int, DetKey>& occupancy(int root) { return occupancy_[root]; }

    // Merges roots[1..] into roots[0]; occupancies must already be combined
    // into `combined` by the caller.
    void unite(const std::vector<int>& roots, std::unordered_map<int, DetKey> combined) {
        const int target = roots.front();
        for (size_t i = 1; i < roots.size(); ++i) parent_[roots[i]] = target;
        occupancy_[target] = std::move(combined);
    }

private:
    std::vector<int> parent_;
    std::vector<std::unordered_map<int, DetKey>> occupancy_;
};

bool fragments_adjacent(const Fragment& a, const Fragment& b) {
    // Same owner trajectory with back-to-back index ranges.
    for (const FragmentOwner& oa : a.owners) {
        for (const FragmentOwner& ob : b.owners) {
            if (oa.ref != ob.ref) continue;
            if (oa.last_index + 1 == ob.first_index || ob.last_index + 1 == oa.first_index)
                return true;
        }
    }
    // Shared detection key (cross-direction candidates can overlap).
    std::unordered_set<DetKey, DetKeyHash> keys;
    for (const Observation& obs : a.observations) keys.insert(obs.key());
    for (const Observation& obs : b.observations) {
        if (keys.count(obs.key())) return true;
    }
    return false;
}

Trajectory assemble(const std::vector<const Fragment*>& members) {
    std::map<int, Observation> by_frame;  // deduplicates shared keys
    for (const Fragment* f : members) {
        for (const Observation& obs : f->observations) {
            by_frame.emplace(obs.frame, obs);
        }
    }
    Trajectory t;
    t.observations.reserve(by_frame.size());
    for (auto& [frame, obs] : by_frame) t.observations.push_back(obs);
    return t;
}

}  // namespace

std::vector<SharedBoxes> find_common_boxes(const TrajectorySet& forward,
                                           const TrajectorySet& backward) {
    // Inverted index from detection key to the backward trajectory holding it;
    // keys are unique within a direction, so one slot suffices.
    KeyMap backward_keys;
    for (const Trajectory& t : backward.trajectories) {
        for (const Observation& obs : t.observations) backward_keys.emplace(obs.key(), &t);
    }

    const auto backward_by_id = index_by_id(backward);
    std::vector<SharedBoxes> out;
    for (const Trajectory& ft : forward.trajectories) {
        std::unordered_set<int> partners;
        for (const Observation& obs : ft.observations) {
            auto it = backward_keys.find(obs.key());
            if (it != backward_keys.end()) partners.insert(it->second->id);
        }
        std::vector<int> partner_ids(partners.begin(), partners.end());
        std::sort(partner_ids.begin(), partner_ids.end());
        for (int bid : partner_ids) {
            const Trajectory& bt = *backward_by_id.at(bid);
            SharedBoxes shared{ft.id, bt.id, {}};
            // Two-pointer merge over the frame-sorted observations.
            size_t i = 0, j = 0;
            while (i < ft.observations.size() && j < bt.observations.size()) {
                const DetKey ka = ft.observations[i].key();
                const DetKey kb = bt.observations[j].key();
                if (ka == kb) {
                    shared.keys.push_back(ka);
                    ++i;
                    ++j;
                } else if (ka < kb) {
                    ++i;
                } else {
                    ++j;
                }
            }
            if (!shared.keys.empty()) out.push_back(std::move(shared));
        }
    }
    std::sort(out.begin(), out.end(), [](const SharedBoxes& a, const SharedBoxes& b) {
        return std::tie(a.forward_id, a.backward_id) < std::tie(b.forward_id, b.backward_id);
    });
    return out;
}

std::vector<Cluster> cluster_trajectories(const TrajectorySet& forward,
                                          const TrajectorySet& backward,
                                          const std::vector<SharedBoxes>& shared) {
    std::vector<TrajRef> nodes;
    for (const Trajectory& t : forward.trajectories)
        nodes.push_back({TimeDirection::kForward, t.id});
    for (const Trajectory& t : backward.trajectories)
        nodes.push_back({TimeDirection::kBackward, t.id});

    std::map<TrajRef, int> node_index;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) node_index[nodes[i]] = i;

    std::vector<std::vector<int>> adj(nodes.size());
    for (const SharedBoxes& s : shared) {
        const int a = node_index.at({TimeDirection::kForward, s.forward_id});
        const int b = node_index.at({TimeDirection::kBackward, s.backward_id});
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    std::vector<int> component(nodes.size(), -1);
    int n_components = 0;
    for (int start = 0; start < static_cast<int>(nodes.size()); ++start) {
        if (component[start] >= 0) continue;
        const int c = n_components++;
        std::queue<int> q;
        q.push(start);
        component[start] = c;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                if (component[v] < 0) {
                    component[v] = c;
                    q.push(v);
                }
            }
        }
    }

    std::vector<Cluster> clusters(n_components);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
        clusters[component[i]].members.push_back(nodes[i]);
    }
    for (Cluster& c : clusters) std::sort(c.members.begin(), c.members.end());
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        auto key = [](const Cluster& c) {
            int min_id = INT32_MAX;
            int dir = 1;
            for (const TrajRef& r : c.members) {
                const int d = r.dir == TimeDirection::kForward ? 0 : 1;
                if (r.id < min_id || (r.id == min_id && d < dir)) {
                    min_id = r.id;
                    dir = d;
                }
            }
            return std::make_pair(min_id, dir);
        };
        return key(a) < key(b);
    });
    return clusters;
}

std::vector<LinkKey> common_links(const TrajectorySet& forward,
                                  const TrajectorySet& backward) {
    std::vector<LinkKey> fwd;
    for (const Trajectory& t : forward.trajectories) {
        auto links = trajectory_links(t);
        fwd.insert(fwd.end(), links.begin(), links.end());
    }
    std::sort(fwd.begin(), fwd.end());

    std::vector<LinkKey> out;
    for (const Trajectory& t : backward.trajectories) {
        for (const LinkKey& l : trajectory_links(t)) {
            if (std::binary_search(fwd.begin(), fwd.end(), l)) out.push_back(l);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Fragment> split_into_fragments(const Cluster& cluster,
                                           const TrajectorySet& forward,
                                           const TrajectorySet& backward,
                                           const std::vector<LinkKey>& common) {
    const auto fwd_by_id = index_by_id(forward);
    const auto bwd_by_id = index_by_id(backward);

    std::vector<Fragment> out;
    // Deduplicates common fragments across the two directions by their
    // observation-key sequence.
    std::map<std::vector<DetKey>, size_t> common_slots;

    for (const TrajRef& ref : cluster.members) {
        const bool is_fwd = ref.dir == TimeDirection::kForward;
        const Trajectory& t = is_fwd ? *fwd_by_id.at(ref.id) : *bwd_by_id.at(ref.id);
        const int n = static_cast<int>(t.observations.size());

        std::vector<char> link_common(std::max(n - 1, 0), 0);
        for (int i = 0; i + 1 < n; ++i) {
            const LinkKey l{t.observations[i].key(), t.observations[i + 1].key()};
            link_common[i] = std::binary_search(common.begin(), common.end(), l) ? 1 : 0;
        }

        std::vector<char> covered(n, 0);
        for (int i = 0; i + 1 < n;) {
            if (!link_common[i]) {
                ++i;
                continue;
            }
            int j = i;
            while (j + 1 < n && link_common[j]) ++j;
            // Observations i..j form a maximal run of common links.
            std::vector<DetKey> keys;
            for (int k = i; k <= j; ++k) {
                covered[k] = 1;
                keys.push_back(t.observations[k].key());
            }
            auto it = common_slots.find(keys);
            if (it == common_slots.end()) {
                Fragment f;
                f.tag = FragmentTag::kCommon;
                f.observations.assign(t.observations.begin() + i, t.observations.begin() + j + 1);
                f.owners.push_back({ref, i + 1, j + 1});
                common_slots.emplace(std::move(keys), out.size());
                out.push_back(std::move(f));
            } else {
                Fragment& f = out[it->second];
                f.owners.push_back({ref, i + 1, j + 1});
                if (is_fwd) {
                    // Keep forward boxes as the canonical payload.
                    f.observations.assign(t.observations.begin() + i,
                                          t.observations.begin() + j + 1);
                    std::swap(f.owners.front(), f.owners.back());
                }
            }
            i = j;
        }

        for (int i = 0; i < n;) {
            if (covered[i]) {
                ++i;
                continue;
            }
            int j = i;
            while (j + 1 < n && !covered[j + 1]) ++j;
            Fragment f;
            f.tag = is_fwd ? FragmentTag::kForwardOnly : FragmentTag::kBackwardOnly;
            f.observations.assign(t.observations.begin() + i, t.observations.begin() + j + 1);
            f.owners.push_back({ref, i + 1, j + 1});
            out.push_back(std::move(f));
            i = j + 1;
        }
    }
    return out;
}

int64_t fragment_priority(const Fragment& f, int64_t z) {
    if (f.tag == FragmentTag::kCommon) return z;
    const FragmentOwner& owner = f.owners.front();
    return std::max<int64_t>(owner.first_index, owner.last_index);
}

namespace {

std::vector<Trajectory> fuse_fragment_cluster(const Cluster& cluster,
                                              const TrajectorySet& forward,
                                              const TrajectorySet& backward,
                                              const std::vector<LinkKey>& common, int64_t z,
                                              FusionDiagnostics* diag) {
    std::vector<Fragment> fragments =
        split_into_fragments(cluster, forward, backward, common);

    std::vector<int> guaranteed;
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(fragments.size()); ++i) {
        (fragments[i].tag == FragmentTag::kCommon ? guaranteed : candidates).push_back(i);
    }
    if (diag) {
        diag->guaranteed_fragments += static_cast<int>(guaranteed.size());
        diag->candidate_fragments += static_cast<int>(candidates.size());
    }

    auto sort_key = [&](int idx) {
        const Fragment& f = fragments[idx];
        const FragmentOwner& owner = f.owners.front();
        return std::make_tuple(-fragment_priority(f, z), owner.ref.id,
                               owner.ref.dir == TimeDirection::kForward ? 0 : 1,
                               f.observations.front().frame);
    };
    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int b) { return sort_key(a) < sort_key(b); });

    IdentityForest forest(static_cast<int>(fragments.size()));
    std::vector<int> accepted;

    auto try_accept = [&](int idx) -> bool {
        const Fragment& f = fragments[idx];
        std::vector<int> roots{forest.find(idx)};
        for (int other : accepted) {
            if (!fragments_adjacent(f, fragments[other])) continue;
            const int root = forest.find(other);
            if (std::find(roots.begin(), roots.end(), root) == roots.end())
                roots.push_back(root);
        }
        // Combined occupancy must keep distinct detections in distinct frames;
        // the same detection arriving from two fragments collapses to one box.
        std::unordered_map<int, DetKey> combined = forest.occupancy(roots.front());
        for (size_t i = 1; i < roots.size(); ++i) {
            for (const auto& [frame, key] : forest.occupancy(roots[i])) {
                auto [it, inserted] = combined.emplace(frame, key);
                if (!inserted && !(it->second == key)) return false;
            }
        }
        for (const Observation& obs : f.observations) {
            auto [it, inserted] = combined.emplace(obs.frame, obs.key());
            if (!inserted && !(it->second == obs.key())) return false;
        }
        forest.unite(roots, std::move(combined));
        accepted.push_back(idx);
        return true;
    };

    for (int idx : guaranteed) {
        try_accept(idx);  // cannot fail: disjoint spans of per-direction partitions
    }
    for (int idx : candidates) {
        const bool ok = try_accept(idx);
        if (diag) (ok ? diag->accepted_candidates : diag->rejected_candidates) += 1;
    }

    // Assemble one trajectory per identity component.
    std::map<int, std::vector<const Fragment*>> groups;
    for (int idx : accepted) groups[forest.find(idx)].push_back(&fragments[idx]);

    std::vector<Trajectory> out;
    for (auto& [root, members] : groups) out.push_back(assemble(members));
    std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) {
        const Observation& oa = a.observations.front();
        const Observation& ob = b.observations.front();
        return std::tie(oa.frame, oa.det_index) < std::tie(ob.frame, ob.det_index);
    });
    return out;
}

}  // namespace

std::vector<Trajectory> fuse_cluster(const Cluster& cluster, const TrajectorySet& forward,
                                     const TrajectorySet& backward,
                                     const std::vector<LinkKey>& common, int64_t z,
                                     FusionDiagnostics* diag) {
    const auto fwd_by_id = index_by_id(forward);
    const auto bwd_by_id = index_by_id(backward);
    auto trajectory_of = [&](const TrajRef& ref) -> const Trajectory& {
        return ref.dir == TimeDirection::kForward ? *fwd_by_id.at(ref.id)
                                                  : *bwd_by_id.at(ref.id);
    };

    if (diag) diag->clusters += 1;

    if (cluster.members.size() == 1) {
        if (diag) diag->singleton_clusters += 1;
        Trajectory t = trajectory_of(cluster.members.front());
        t.id = 0;
        return {std::move(t)};
    }

    // Shared keys within this cluster. Keys are unique per direction, so a key
    // held by one forward and one backward member is shared.
    std::unordered_map<DetKey, int, DetKeyHash> key_sides;  // bit 0: fwd, bit 1: bwd
    std::unordered_map<DetKey, Observation, DetKeyHash> fwd_obs;
    for (const TrajRef& ref : cluster.members) {
        const Trajectory& t = trajectory_of(ref);
        const int bit = ref.dir == TimeDirection::kForward ? 1 : 2;
        for (const Observation& obs : t.observations) {
            key_sides[obs.key()] |= bit;
            if (bit == 1) fwd_obs.emplace(obs.key(), obs);
        }
    }
    std::vector<DetKey> shared_keys;
    for (const auto& [key, sides] : key_sides) {
        if (sides == 3) shared_keys.push_back(key);
    }
    std::sort(shared_keys.begin(), shared_keys.end());

    std::unordered_set<int> shared_frames;
    bool distinct_frames = true;
    for (const DetKey& key : shared_keys) {
        if (!shared_frames.insert(key.frame).second) {
            distinct_frames = false;
            break;
        }
    }

    if (distinct_frames) {
        // No time contradiction: link the shared boxes directly and attach the
        // non-conflicting remainder of every member.
        if (diag) diag->chain_clusters += 1;
        std::map<int, Observation> by_frame;
        for (const DetKey& key : shared_keys) by_frame.emplace(key.frame, fwd_obs.at(key));
        std::unordered_set<DetKey, DetKeyHash> taken(shared_keys.begin(), shared_keys.end());
        for (const TrajRef& ref : cluster.members) {
            const Trajectory& t = trajectory_of(ref);
            for (const Observation& obs : t.observations) {
                if (taken.count(obs.key())) continue;
                auto [it, inserted] = by_frame.emplace(obs.frame, obs);
                if (inserted) {
                    taken.insert(obs.key());
                } else if (diag && !(it->second.key() == obs.key())) {
                    diag->dropped_conflicting += 1;
                }
            }
        }
        Trajectory t;
        for (auto& [frame, obs] : by_frame) t.observations.push_back(obs);
        return {std::move(t)};
    }

    if (diag) diag->fragment_clusters += 1;
    return fuse_fragment_cluster(cluster, forward, backward, common, z, diag);
}

TrajectorySet fuse(const TrajectorySet& forward, const TrajectorySet& backward,
                   FusionDiagnostics* diag) {
    require_real_keys(forward, "forward");
    require_real_keys(backward, "backward");
    if (!frame_exclusivity_violations(forward).empty() ||
        !frame_exclusivity_violations(backward).empty())
        throw std::invalid_argument("bifuse: inputs violate frame exclusivity");

    const std::vector<SharedBoxes> shared = find_common_boxes(forward, backward);
    const std::vector<Cluster> clusters = cluster_trajectories(forward, backward, shared);
    const std::vector<LinkKey> common = common_links(forward, backward);

    int64_t total_obs = 0;
    for (const Trajectory& t : forward.trajectories) total_obs += t.observations.size();
    for (const Trajectory& t : backward.trajectories) total_obs += t.observations.size();
    const int64_t z = total_obs + 1;

    TrajectorySet out;
    for (const Cluster& cluster : clusters) {
        std::vector<Trajectory> fused =
            fuse_cluster(cluster, forward, backward, common, z, diag);
        for (Trajectory& t : fused) {
            if (t.observations.empty()) continue;
            t.id = static_cast<int>(out.trajectories.size()) + 1;
            out.trajectories.push_back(std::move(t));
        }
    }

    if (!frame_exclusivity_violations(out).empty())
        throw std::logic_error("bifuse: output violates frame exclusivity");
    return out;
}

}  // namespace omot::bifuse
