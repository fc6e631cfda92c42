#include "omot/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace omot {

namespace {

constexpr double kMinSize = 1e-3;

Eigen::Matrix<double, kStateDim, kStateDim> transition_matrix() {
    Eigen::Matrix<double, kStateDim, kStateDim> f =
        Eigen::Matrix<double, kStateDim, kStateDim>::Identity();
    f(0, 7) = 1.0;
    f(1, 8) = 1.0;
    f(2, 9) = 1.0;
    return f;
}

Eigen::Matrix<double, kMeasDim, kStateDim> measurement_matrix() {
    Eigen::Matrix<double, kMeasDim, kStateDim> h =
        Eigen::Matrix<double, kMeasDim, kStateDim>::Zero();
    h.topLeftCorner<kMeasDim, kMeasDim>().setIdentity();
    return h;
}

MeasVec box_to_measurement(const Box3D& box) {
    MeasVec z;
    z << box.center.x(), box.center.y(), box.center.z(), box.yaw,
        box.size.x(), box.size.y(), box.size.z();
    return z;
}

void enforce_state_invariants(KalmanState& state) {
    state.mean(3) = wrap_angle(state.mean(3));
    for (int i = 4; i < 7; ++i) state.mean(i) = std::max(state.mean(i), kMinSize);
    state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
}

}  // namespace

double ncd(const Box3D& a, const Box3D& b) {
    const auto va = vertices(a);
    const auto vb = vertices(b);
    double max_sq = 0.0;
    for (const Vec3& p : va) {
        for (const Vec3& q : vb) {
            max_sq = std::max(max_sq, (p - q).squaredNorm());
        }
    }
    return 1.0 - (a.center - b.center).norm() / std::sqrt(max_sq);
}

Box3D KalmanState::box(double confidence) const {
    Box3D b;
    b.center = mean.head<3>();
    b.yaw = wrap_angle(mean(3));
    b.size = mean.segment<3>(4);
    b.confidence = confidence;
    return b;
}

void TrackerConfig::validate() const {
    if (!(sim_threshold > 0.0 && sim_threshold <= 1.0))
        throw std::invalid_argument("tracker: sim_threshold must be in (0, 1]");
    if (theta_hit < 1 || theta_miss_candidate < 1 || theta_miss_confirmed < 1)
        throw std::invalid_argument("tracker: thresholds must be >= 1");
    if (p0_scale <= 0.0 || q_scale < 0.0 || r_scale < 0.0)
        throw std::invalid_argument("tracker: covariance scales out of range");
}

KalmanState kalman_predict(const KalmanState& state, const TrackerConfig& cfg) {
    static const auto f = transition_matrix();
    KalmanState out;
    out.mean = f * state.mean;
    out.cov = f * state.cov * f.transpose() + cfg.q_scale * StateCov::Identity();
    enforce_state_invariants(out);
    return out;
}

KalmanState kalman_update(const KalmanState& state, const MeasVec& meas,
                          const TrackerConfig& cfg) {
    static const auto h = measurement_matrix();
    const Eigen::Matrix<double, kMeasDim, kMeasDim> r =
        cfg.r_scale * Eigen::Matrix<double, kMeasDim, kMeasDim>::Identity();

    MeasVec innovation = meas - h * state.mean;
    // A measurement heading flipped by ~pi describes the same box; correct it
    // before updating so the filter does not spin the track around.
    innovation(3) = wrap_angle(innovation(3));
    if (innovation(3) > M_PI / 2.0) innovation(3) -= M_PI;
    if (innovation(3) < -M_PI / 2.0) innovation(3) += M_PI;

    const Eigen::Matrix<double, kMeasDim, kMeasDim> s =
        h * state.cov * h.transpose() + r;
    const Eigen::Matrix<double, kStateDim, kMeasDim> k =
        state.cov * h.transpose() * s.inverse();

    KalmanState out;
    out.mean = state.mean + k * innovation;
    // Joseph form keeps the covariance symmetric positive-definite.
    const StateCov ikh = StateCov::Identity() - k * h;
    out.cov = ikh * state.cov * ikh.transpose() + k * r * k.transpose();
    enforce_state_invariants(out);
    return out;
}

KalmanState reinit_velocity(const Track& track, const Box3D& new_obs, int elapsed_frames,
                            const TrackerConfig& cfg) {
    if (elapsed_frames < 1)
        throw std::invalid_argument("reinit_velocity: elapsed_frames must be >= 1");
    KalmanState out = kalman_update(track.state, box_to_measurement(new_obs), cfg);
    out.mean.head<3>() = new_obs.center;
    out.mean(3) = new_obs.yaw;
    out.mean.segment<3>(4) = new_obs.size;
    out.mean.tail<3>() =
        (new_obs.center - track.birth_position) / static_cast<double>(elapsed_frames);
    enforce_state_invariants(out);
    return out;
}

AssociationResult associate(const std::vector<Detection>& dets,
                            const std::vector<Track>& tracks, const TrackerConfig& cfg) {
    const int n_det = static_cast<int>(dets.size());
    const int n_trk = static_cast<int>(tracks.size());
    AssociationResult result;
    result.scores.assign(n_det, std::vector<double>(n_trk, 0.0));
    ScoreMatrix m(n_det, n_trk);
    for (int i = 0; i < n_det; ++i) {
        for (int j = 0; j < n_trk; ++j) {
            const double s = ncd(dets[i].box, tracks[j].state.box());
            result.scores[i][j] = s;
            if (s < cfg.sim_threshold) {
                m.forbid(i, j);
            } else {
                m.set_score(i, j, s);
            }
        }
    }
    result.assignment = solve_max_assignment(m);
    return result;
}

std::vector<Observation> recover_tracklet(const Track& track) {
    if (track.history.empty()) return {};
    std::vector<Observation> recovered(track.history.begin(), track.history.end() - 1);
    return recovered;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

StepOutput Tracker::step(int frame, const std::vector<Detection>& dets) {
    std::unordered_set<int> keys;
    for (const Detection& det : dets) {
        if (!keys.insert(det.index).second)
            throw std::invalid_argument("tracker: duplicate detection index " +
                                        std::to_string(det.index) + " in frame " +
                                        std::to_string(frame));
    }
    ++step_count_;

    for (Track& track : tracks_) {
        track.state = kalman_predict(track.state, cfg_);
    }

    const AssociationResult assoc = associate(dets, tracks_, cfg_);

    StepOutput out;
    std::vector<char> det_matched(dets.size(), 0);
    std::vector<char> track_matched(tracks_.size(), 0);

    for (const auto& [det_i, trk_j] : assoc.assignment.matches) {
        Track& track = tracks_[trk_j];
        const Detection& det = dets[det_i];
        det_matched[det_i] = 1;
        track_matched[trk_j] = 1;

        if (!track.ever_matched) {
            const int elapsed = step_count_ - track.birth_step;
            track.state = reinit_velocity(track, det.box, elapsed, cfg_);
            track.ever_matched = true;
        } else {
            track.state = kalman_update(track.state, box_to_measurement(det.box), cfg_);
        }
        track.n_hit += 1;
        track.n_miss = 0;
        track.history.push_back(
            {frame, det.index, track.state.box(det.box.confidence), false});
    }

    for (size_t j = 0; j < tracks_.size(); ++j) {
        if (!track_matched[j]) tracks_[j].n_miss += 1;
    }

    for (size_t i = 0; i < dets.size(); ++i) {
        if (det_matched[i]) continue;
        Track track;
        track.state.mean.head<3>() = dets[i].box.center;
        track.state.mean(3) = dets[i].box.yaw;
        track.state.mean.segment<3>(4) = dets[i].box.size;
        track.state.mean.tail<3>().setZero();
        track.state.cov = cfg_.p0_scale * StateCov::Identity();
        track.n_hit = 1;
        track.birth_position = dets[i].box.center;
        track.birth_step = step_count_;
        track.history.push_back({frame, dets[i].index, dets[i].box, false});
        tracks_.push_back(std::move(track));
    }

    // Lifecycle transitions. Confirmation requires the cumulative hit count
    // with a zero miss counter, so it can only fire on a hit step; the miss
    // threshold depends on the track's status.
    for (size_t j = 0; j < tracks_.size(); ++j) {
        Track& track = tracks_[j];
        const bool matched_now = j < track_matched.size() ? track_matched[j] != 0
                                                          : track.birth_step == step_count_;
        if (track.status == TrackStatus::kCandidate && track.n_hit >= cfg_.theta_hit &&
            track.n_miss == 0) {
            track.status = TrackStatus::kConfirmed;
            track.id = next_id_++;
            track.confirm_history_size = static_cast<int>(track.history.size());
            for (const Observation& obs : track.history) {
                out.emitted.emplace_back(track.id, obs);
            }
        } else if (track.status == TrackStatus::kConfirmed && matched_now) {
            out.emitted.emplace_back(track.id, track.history.back());
        }

        const int theta_miss = track.status == TrackStatus::kConfirmed
                                   ? cfg_.theta_miss_confirmed
                                   : cfg_.theta_miss_candidate;
        if (track.n_miss >= theta_miss) track.status = TrackStatus::kDead;
    }

    std::vector<Track> alive;
    alive.reserve(tracks_.size());
    for (Track& track : tracks_) {
        if (track.status == TrackStatus::kDead) {
            if (track.id > 0) retired_.push_back(std::move(track));
        } else {
            alive.push_back(std::move(track));
        }
    }
    tracks_ = std::move(alive);
    return out;
}

TrajectorySet Tracker::finish() const {
    TrajectorySet set;
    for (const std::vector<Track>* pool : {&retired_, &tracks_}) {
        for (const Track& track : *pool) {
            if (track.id == 0) continue;
            Trajectory t;
            t.id = track.id;
            t.observations = track.history;
            set.trajectories.push_back(std::move(t));
        }
    }
    std::sort(set.trajectories.begin(), set.trajectories.end(),
              [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
    for (Trajectory& t : set.trajectories) {
        std::sort(t.observations.begin(), t.observations.end(),
                  [](const Observation& a, const Observation& b) { return a.frame < b.frame; });
    }
    return set;
}

TrajectorySet run_sequence(const std::vector<FrameDetections>& dets_by_frame,
                           const TrackerConfig& cfg) {
    std::vector<const FrameDetections*> order;
    order.reserve(dets_by_frame.size());
    for (const FrameDetections& fd : dets_by_frame) order.push_back(&fd);
    std::sort(order.begin(), order.end(),
              [&](const FrameDetections* a, const FrameDetections* b) {
                  return cfg.direction == TimeDirection::kForward ? a->frame < b->frame
                                                                  : a->frame > b->frame;
              });
    Tracker tracker(cfg);
    for (const FrameDetections* fd : order) {
        tracker.step(fd->frame, fd->detections);
    }
    return tracker.finish();
}

}  // namespace omot
