#pragma once

#include "omot/assign.hpp"
#include "omot/scenario.hpp"
#include "omot/trajectory.hpp"

#include <Eigen/Dense>

#include <vector>

namespace omot {

// Normalized center distance similarity: 1 minus the center distance divided
// by the largest distance between any vertex of `a` and any vertex of `b`.
// Bounded above by 1 (equality iff centers coincide), symmetric, and
// sensitive to box size and yaw through the denominator.
double ncd(const Box3D& a, const Box3D& b);

// Constant-velocity state: (x, y, z, yaw, l, w, h, vx, vy, vz). Velocities
// are per frame step in the run's time direction.
inline constexpr int kStateDim = 10;
inline constexpr int kMeasDim = 7;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateCov = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVec = Eigen::Matrix<double, kMeasDim, 1>;

struct KalmanState {
    StateVec mean = StateVec::Zero();
    StateCov cov = StateCov::Identity();

    Box3D box(double confidence = 1.0) const;
};

enum class TrackStatus { kCandidate, kConfirmed, kDead };

enum class TimeDirection { kForward, kBackward };

struct TrackerConfig {
    double sim_threshold = 0.5;     // association gate on NCD
    int theta_hit = 6;              // cumulative hits required to confirm
    int theta_miss_candidate = 5;   // consecutive misses that kill a candidate
    int theta_miss_confirmed = 28;  // consecutive misses that kill a confirmed track
    double p0_scale = 10.0;         // initial covariance
    double q_scale = 2.0;           // process noise
    double r_scale = 1.0;           // measurement noise
    TimeDirection direction = TimeDirection::kForward;

    void validate() const;
};

struct Track {
    int id = 0;  // assigned in confirmation order, starting at 1; 0 until confirmed
    KalmanState state;
    int n_hit = 0;
    int n_miss = 0;
    TrackStatus status = TrackStatus::kCandidate;
    std::vector<Observation> history;  // every matched observation since birth

    Vec3 birth_position = Vec3::Zero();
    int birth_step = 0;
    bool ever_matched = false;   // a match after birth has occurred
    int confirm_history_size = 0;  // history length when the track confirmed
};

// One constant-velocity prediction step; covariance is inflated by Q.
KalmanState kalman_predict(const KalmanState& state, const TrackerConfig& cfg);

// Measurement update over the 7 static components, with the yaw innovation
// wrapped to (-pi, pi] and near-pi-flipped measurements corrected first.
KalmanState kalman_update(const KalmanState& state, const MeasVec& meas,
                          const TrackerConfig& cfg);

// First-match state override: position, yaw, and size are set exactly to the
// measurement, velocity becomes displacement over the elapsed frames, and the
// covariance receives the standard Kalman update. Throws std::invalid_argument
// if elapsed_frames < 1.
KalmanState reinit_velocity(const Track& track, const Box3D& new_obs, int elapsed_frames,
                            const TrackerConfig& cfg);

struct AssociationResult {
    Assignment assignment;              // rows = detections, cols = tracks
    std::vector<std::vector<double>> scores;  // NCD per (detection, track)
};

// Gated NCD association between detections and track predictions. Pairs below
// the similarity threshold are forbidden.
AssociationResult associate(const std::vector<Detection>& dets,
                            const std::vector<Track>& tracks, const TrackerConfig& cfg);

// Observations recovered when a track confirms: its pre-confirmation history,
// stamped with the (just assigned) track id.
std::vector<Observation> recover_tracklet(const Track& track);

struct StepOutput {
    // Observations emitted this step: the full recovered tracklet for tracks
    // confirming now, plus the current observation of matched confirmed tracks.
    std::vector<std::pair<int, Observation>> emitted;  // (track id, observation)
};

// SORT-style tracker running in one time direction; frames must be fed in the
// run's time order.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    // Processes one frame of detections. Throws std::invalid_argument on
    // duplicate detection indices within the frame.
    StepOutput step(int frame, const std::vector<Detection>& dets);

    const std::vector<Track>& tracks() const { return tracks_; }

    // Trajectories of every track that ever confirmed, in forward frame order.
    TrajectorySet finish() const;

private:
    TrackerConfig cfg_;
    std::vector<Track> tracks_;          // alive tracks
    std::vector<Track> retired_;         // dead tracks that had confirmed
    int next_id_ = 1;
    int step_count_ = 0;
};

// Runs the tracker over a sequence. Frames are visited in ascending order for
// forward runs and descending for backward runs; outputs are re-expressed in
// forward frame order either way.
TrajectorySet run_sequence(const std::vector<FrameDetections>& dets_by_frame,
                           const TrackerConfig& cfg);

}  // namespace omot
