#include "omot/refine.hpp"

#include "omot/tracker.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace omot::refine {

void RefineConfig::validate() const {
    if (interp_window < 0) throw std::invalid_argument("refine: interp_window must be >= 0");
    if (gp_tau <= 0.0) throw std::invalid_argument("refine: gp_tau must be > 0");
    if (gp_noise <= 0.0) throw std::invalid_argument("refine: gp_noise must be > 0");
}

FrameBoxIndex::FrameBoxIndex(const TrajectorySet& set) {
    for (const Trajectory& t : set.trajectories) {
        for (const Observation& obs : t.observations) {
            by_frame_[obs.frame].emplace_back(t.id, obs.box);
        }
    }
}

std::vector<const Box3D*> FrameBoxIndex::foreign_boxes(int frame, int self_id) const {
    std::vector<const Box3D*> out;
    auto it = by_frame_.find(frame);
    if (it == by_frame_.end()) return out;
    for (const auto& [id, box] : it->second) {
        if (id != self_id) out.push_back(&box);
    }
    return out;
}

Trajectory interpolate_gaps(const Trajectory& traj, const FrameBoxIndex& index,
                            const RefineConfig& cfg) {
    Trajectory out;
    out.id = traj.id;
    if (traj.observations.empty()) return out;

    for (size_t i = 0; i + 1 < traj.observations.size(); ++i) {
        const Observation& a = traj.observations[i];
        const Observation& b = traj.observations[i + 1];
        out.observations.push_back(a);

        const int gap = b.frame - a.frame - 1;
        if (gap < 1 || gap > cfg.interp_window) continue;

        const double dyaw = wrap_angle(b.box.yaw - a.box.yaw);
        for (int k = 1; k <= gap; ++k) {
            const double w = static_cast<double>(k) / (gap + 1);
            Observation ins;
            ins.frame = a.frame + k;
            ins.det_index = -1;
            ins.interpolated = true;
            ins.box.center = (1.0 - w) * a.box.center + w * b.box.center;
            ins.box.confidence = (1.0 - w) * a.box.confidence + w * b.box.confidence;
            ins.box.yaw = wrap_angle(a.box.yaw + w * dyaw);
            ins.box.size = a.box.size;

            bool too_close = false;
            for (const Box3D* foreign : index.foreign_boxes(ins.frame, traj.id)) {
                if (ncd(ins.box, *foreign) > cfg.ncd_gate) {
                    too_close = true;
                    break;
                }
            }
            if (!too_close) out.observations.push_back(ins);
        }
    }
    out.observations.push_back(traj.observations.back());
    return out;
}

Trajectory average_size(const Trajectory& traj) {
    Trajectory out = traj;
    Vec3 weighted = Vec3::Zero();
    Vec3 unweighted = Vec3::Zero();
    double weight_sum = 0.0;
    int count = 0;
    for (const Observation& obs : traj.observations) {
        if (obs.interpolated) continue;
        weighted += obs.box.confidence * obs.box.size;
        unweighted += obs.box.size;
        weight_sum += obs.box.confidence;
        ++count;
    }
    if (count == 0) return out;
    const Vec3 mean = weight_sum > 0.0 ? Vec3(weighted / weight_sum) : Vec3(unweighted / count);
    for (Observation& obs : out.observations) obs.box.size = mean;
    return out;
}

double adaptive_sigma(int traj_len, double tau) {
    if (traj_len < 1) throw std::invalid_argument("adaptive_sigma: traj_len must be >= 1");
    const double sigma = tau * std::log(tau * tau * tau / traj_len);
    return std::max(sigma, kMinSigma);
}

Trajectory gp_smooth(const Trajectory& traj, const RefineConfig& cfg, GpReport* report) {
    GpReport local;
    Trajectory out = traj;
    const int n = static_cast<int>(traj.observations.size());
    if (n < 2) {
        if (report) *report = local;
        return out;
    }

    const double sigma = adaptive_sigma(n, cfg.gp_tau);
    Eigen::VectorXd frames(n);
    for (int i = 0; i < n; ++i) frames(i) = traj.observations[i].frame;

    Eigen::MatrixXd kernel(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = frames(i) - frames(j);
            kernel(i, j) = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    }

    // Remove a per-coordinate linear trend so the zero-mean prior does not
    // drag distant trajectories toward the origin; restore it afterwards.
    Eigen::MatrixXd basis(n, 2);
    basis.col(0).setOnes();
    basis.col(1) = frames;
    const Eigen::Matrix2d gram = basis.transpose() * basis;

    Eigen::MatrixXd positions(n, 3);
    for (int i = 0; i < n; ++i) positions.row(i) = traj.observations[i].box.center;

    double noise = cfg.gp_noise;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
        llt.compute(kernel + noise * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) break;
        if (attempt >= 3) {
            local.ok = false;
            local.message = "kernel matrix not positive-definite after jitter escalation";
            if (report) *report = local;
            return out;
        }
        noise *= 10.0;
        local.jitter_escalations += 1;
    }

    for (int c = 0; c < 3; ++c) {
        const Eigen::Vector2d trend = gram.ldlt().solve(basis.transpose() * positions.col(c));
        const Eigen::VectorXd residual = positions.col(c) - basis * trend;
        const Eigen::VectorXd smoothed = kernel * llt.solve(residual);
        for (int i = 0; i < n; ++i) {
            out.observations[i].box.center(c) = smoothed(i) + basis.row(i).dot(trend);
        }
    }
    if (report) *report = local;
    return out;
}

TrajectorySet refine(const TrajectorySet& set, const RefineConfig& cfg,
                     std::vector<std::string>* warnings) {
    cfg.validate();
    if (!frame_exclusivity_violations(set).empty())
        throw std::invalid_argument("refine: input violates frame exclusivity");

    const FrameBoxIndex index(set);
    TrajectorySet out;
    out.trajectories.reserve(set.trajectories.size());
    for (const Trajectory& traj : set.trajectories) {
        Trajectory t = traj;
        if (cfg.enable_interpolation) t = interpolate_gaps(t, index, cfg);
        if (cfg.enable_size_averaging) t = average_size(t);
        if (cfg.enable_gp_smoothing) {
            GpReport report;
            t = gp_smooth(t, cfg, &report);
            if (!report.ok && warnings) {
                warnings->push_back("trajectory " + std::to_string(t.id) + ": " +
                                    report.message);
            }
        }
        out.trajectories.push_back(std::move(t));
    }
    return out;
}

}  // namespace omot::refine
