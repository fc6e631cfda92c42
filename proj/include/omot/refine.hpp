#pragma once

#include "omot/trajectory.hpp"

#include <map>
#include <string>
#include <vector>

namespace omot::refine {

struct RefineConfig {
    int interp_window = 4;     // longest gap that gets filled
    double ncd_gate = 0.35;    // inserted boxes too similar to foreign boxes are dropped
    double gp_tau = 5.5;       // adaptive kernel-width hyperparameter
    double gp_noise = 0.01;    // GP observation noise variance, m^2

    bool enable_interpolation = true;
    bool enable_size_averaging = true;
    bool enable_gp_smoothing = true;

    void validate() const;
};

// Per-frame index of every trajectory's boxes, used to gate interpolation
// against foreign objects. Built once from the un-refined input so that
// per-trajectory refinement stays independent.
class FrameBoxIndex {
public:
    explicit FrameBoxIndex(const TrajectorySet& set);

    // Boxes of trajectories other than `self_id` at `frame`.
    std::vector<const Box3D*> foreign_boxes(int frame, int self_id) const;

private:
    std::map<int, std::vector<std::pair<int, Box3D>>> by_frame_;
};

// Fills internal gaps of length 1..interp_window by linear interpolation of
// position and confidence; yaw follows the shorter angular arc and size copies
// the earlier bracket. Inserted boxes are flagged interpolated and discarded
// when their NCD to any foreign box in the same frame exceeds the gate.
Trajectory interpolate_gaps(const Trajectory& traj, const FrameBoxIndex& index,
                            const RefineConfig& cfg);

// Replaces every box size with the confidence-weighted mean over the
// non-interpolated observations; falls back to the unweighted mean when all
// confidences are zero.
Trajectory average_size(const Trajectory& traj);

// Adaptive RBF kernel width tau * ln(tau^3 / len), floored at a small
// positive constant so very long trajectories get minimal smoothing.
inline constexpr double kMinSigma = 1e-2;
double adaptive_sigma(int traj_len, double tau);

struct GpReport {
    bool ok = true;
    int jitter_escalations = 0;
    std::string message;
};

// Gaussian-process regression of the x/y/z positions over frame indices with
// the adaptive RBF kernel, each coordinate independently. A per-coordinate
// linear trend is removed before regression and restored afterwards. On
// Cholesky failure the noise is escalated tenfold up to three times; if the
// system still fails the original positions are kept and the report says so.
Trajectory gp_smooth(const Trajectory& traj, const RefineConfig& cfg,
                     GpReport* report = nullptr);

// Full per-trajectory refinement: interpolation, size averaging, smoothing.
// Numerical failures become warnings; no trajectory is dropped.
TrajectorySet refine(const TrajectorySet& set, const RefineConfig& cfg,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace omot::refine
