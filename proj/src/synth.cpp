#include "omot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace omot::synth {

namespace {

constexpr double kSpawnXMin = 8.0;
constexpr double kSpawnXMax = 70.0;
constexpr double kSpawnYMin = -18.0;
constexpr double kSpawnYMax = 18.0;

struct GroundTruthObject {
    int id = 0;
    int birth_frame = 0;
    std::vector<Box3D> boxes;  // one per alive frame
};

// Scanline fill of the convex hull of the projected box corners. The spans
// are dilated to whole pixels so that any interior point's floored projection
// stays covered.
std::vector<uint32_t> rasterize_hull(const std::vector<Eigen::Vector2d>& pts, int width,
                                     int height) {
    std::vector<uint32_t> out;
    if (pts.size() < 3) {
        for (const auto& p : pts) {
            const int u = static_cast<int>(std::floor(p.x()));
            const int v = static_cast<int>(std::floor(p.y()));
            if (u >= 0 && u < width && v >= 0 && v < height)
                out.push_back(static_cast<uint32_t>(v) * width + u);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Andrew monotone chain.
    std::vector<Eigen::Vector2d> p = pts;
    std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                    const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> hull(2 * p.size());
    size_t k = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    const size_t lower = k + 1;
    for (size_t i = p.size() - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k > 1 ? k - 1 : k);

    double vmin = hull[0].y(), vmax = hull[0].y();
    for (const auto& h : hull) {
        vmin = std::min(vmin, h.y());
        vmax = std::max(vmax, h.y());
    }
    const int row_lo = std::max(0, static_cast<int>(std::floor(vmin)));
    const int row_hi = std::min(height - 1, static_cast<int>(std::floor(vmax)));
    for (int row = row_lo; row <= row_hi; ++row) {
        const double y = row + 0.5;
        double umin = 1e18, umax = -1e18;
        for (size_t i = 0; i < hull.size(); ++i) {
            const Eigen::Vector2d& a = hull[i];
            const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
            const double ylo = std::min(a.y(), b.y());
            const double yhi = std::max(a.y(), b.y());
            if (y < ylo || y > yhi) continue;
            double u;
            if (std::abs(b.y() - a.y()) < 1e-12) {
                umin = std::min({umin, a.x(), b.x()});
                umax = std::max({umax, a.x(), b.x()});
                continue;
            }
            u = a.x() + (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y());
            umin = std::min(umin, u);
            umax = std::max(umax, u);
        }
        if (umin > umax) continue;
        const int col_lo = std::max(0, static_cast<int>(std::floor(umin)));
        const int col_hi = std::min(width - 1, static_cast<int>(std::floor(umax)));
        for (int col = col_lo; col <= col_hi; ++col) {
            out.push_back(static_cast<uint32_t>(row) * width + col);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    if (object_count < 0 || frame_count < 1)
        throw std::invalid_argument("synth: object/frame counts out of range");
    if (fn_prob < 0.0 || fn_prob > 1.0)
        throw std::invalid_argument("synth: fn_prob must be in [0, 1]");
    if (fp_rate < 0.0) throw std::invalid_argument("synth: fp_rate must be >= 0");
    if (lifespan_min_frac <= 0.0 || lifespan_max_frac > 1.0 ||
        lifespan_min_frac > lifespan_max_frac)
        throw std::invalid_argument("synth: lifespan fractions out of range");
}

CameraModel synthetic_camera() {
    CameraModel cam;
    cam.image_width = 1280;
    cam.image_height = 720;
    cam.intrinsics << 700, 0, 640, 0, 0, 700, 360, 0, 0, 0, 1, 0;
    // LiDAR x forward / y left / z up to camera z forward / x right / y down.
    cam.extrinsics.setZero();
    cam.extrinsics(0, 1) = -1.0;
    cam.extrinsics(1, 2) = -1.0;
    cam.extrinsics(2, 0) = 1.0;
    cam.extrinsics(3, 3) = 1.0;
    return cam;
}

ScenarioBundle generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    ScenarioBundle bundle;
    bundle.sequence_id = cfg.sequence_id;
    bundle.frame_count = cfg.frame_count;
    bundle.calib = synthetic_camera();
    bundle.detections.resize(cfg.frame_count);
    for (int f = 0; f < cfg.frame_count; ++f) bundle.detections[f].frame = f;

    // Ground truth motion.
    std::vector<GroundTruthObject> objects(cfg.object_count);
    for (int i = 0; i < cfg.object_count; ++i) {
        GroundTruthObject& obj = objects[i];
        obj.id = i + 1;
        const int min_len = std::max(2, static_cast<int>(cfg.lifespan_min_frac * cfg.frame_count));
        const int max_len = std::max(min_len, static_cast<int>(cfg.lifespan_max_frac * cfg.frame_count));
        const int lifespan = min_len + static_cast<int>(unit(rng) * (max_len - min_len + 1));
        obj.birth_frame = static_cast<int>(unit(rng) * (cfg.frame_count - lifespan + 1));

        Box3D box;
        box.size = Vec3(uniform(3.6, 4.8), uniform(1.6, 1.9), uniform(1.4, 1.7));
        box.center = Vec3(uniform(kSpawnXMin, kSpawnXMax), uniform(kSpawnYMin, kSpawnYMax),
                          box.size.z() / 2.0);
        double heading = uniform(-M_PI, M_PI);
        double speed = uniform(cfg.speed_min, cfg.speed_max);
        const double turn = uniform(-cfg.turn_rate_max, cfg.turn_rate_max);
        box.yaw = wrap_angle(heading);
        box.confidence = 1.0;
        obj.boxes.push_back(box);
        for (int k = 1; k < lifespan; ++k) {
            heading = wrap_angle(heading + turn + cfg.process_turn_noise * gauss(rng));
            speed = std::max(0.0, speed + cfg.process_speed_noise * gauss(rng));
            box.center.x() += speed * std::cos(heading);
            box.center.y() += speed * std::sin(heading);
            box.yaw = heading;
            obj.boxes.push_back(box);
        }
    }

    TrajectorySet gt;
    for (const GroundTruthObject& obj : objects) {
        Trajectory t;
        t.id = obj.id;
        for (int k = 0; k < static_cast<int>(obj.boxes.size()); ++k) {
            t.observations.push_back({obj.birth_frame + k, -1, obj.boxes[k], false});
        }
        gt.trajectories.push_back(std::move(t));
    }
    bundle.ground_truth = std::move(gt);

    // Detector model: misses, noise, Poisson clutter.
    std::poisson_distribution<int> clutter_count(cfg.fp_rate);
    for (int f = 0; f < cfg.frame_count; ++f) {
        FrameDetections& fd = bundle.detections[f];
        for (const GroundTruthObject& obj : objects) {
            const int k = f - obj.birth_frame;
            if (k < 0 || k >= static_cast<int>(obj.boxes.size())) continue;
            if (unit(rng) < cfg.fn_prob) continue;
            Box3D det = obj.boxes[k];
            det.center.x() += cfg.pos_noise * gauss(rng);
            det.center.y() += cfg.pos_noise * gauss(rng);
            det.center.z() += 0.25 * cfg.pos_noise * gauss(rng);
            det.yaw = wrap_angle(det.yaw + cfg.yaw_noise * gauss(rng));
            for (int d = 0; d < 3; ++d)
                det.size(d) = std::max(0.2, det.size(d) + cfg.size_noise * gauss(rng));
            det.confidence = uniform(cfg.tp_conf_min, cfg.tp_conf_max);
            fd.detections.push_back({static_cast<int>(fd.detections.size()), det});
        }
        if (cfg.fp_rate > 0.0) {
            const int n_fp = clutter_count(rng);
            for (int c = 0; c < n_fp; ++c) {
                Box3D fp;
                fp.size = Vec3(uniform(3.0, 5.0), uniform(1.5, 2.0), uniform(1.3, 1.8));
                fp.center = Vec3(uniform(kSpawnXMin - 3, kSpawnXMax + 10),
                                 uniform(kSpawnYMin - 7, kSpawnYMax + 7), fp.size.z() / 2.0);
                fp.yaw = uniform(-M_PI, M_PI);
                fp.confidence = uniform(cfg.fp_conf_min, cfg.fp_conf_max);
                fd.detections.push_back({static_cast<int>(fd.detections.size()), fp});
            }
        }
    }

    if (cfg.with_sensors) {
        bundle.clouds.resize(cfg.frame_count);
        bundle.masks.resize(cfg.frame_count);
        for (int f = 0; f < cfg.frame_count; ++f) {
            PointCloud& cloud = bundle.clouds[f];
            MaskFrame& mf = bundle.masks[f];
            mf.frame = f;
            for (const GroundTruthObject& obj : objects) {
                const int k = f - obj.birth_frame;
                if (k < 0 || k >= static_cast<int>(obj.boxes.size())) continue;
                const Box3D& box = obj.boxes[k];
                const Eigen::Matrix3d rot = box.rotation();
                for (int p = 0; p < cfg.points_per_box; ++p) {
                    const Vec3 local(uniform(-0.5, 0.5) * box.size.x(),
                                     uniform(-0.5, 0.5) * box.size.y(),
                                     uniform(-0.5, 0.5) * box.size.z());
                    cloud.points.push_back(box.center + rot * local);
                }
                // Mask = filled convex hull of the projected box corners.
                const auto corners = vertices(box);
                std::vector<Vec3> corner_list(corners.begin(), corners.end());
                std::vector<Eigen::Vector2d> image_pts;
                for (const Vec3& corner : corner_list) {
                    const Eigen::Vector4d p_cam = bundle.calib.extrinsics * corner.homogeneous();
                    if (p_cam.z() <= kMinProjectionDepth) continue;
                    const Eigen::Vector3d uvw = bundle.calib.intrinsics * p_cam;
                    image_pts.emplace_back(uvw.x() / uvw.z(), uvw.y() / uvw.z());
                }
                if (image_pts.empty()) continue;
                InstanceMask mask;
                mask.id = obj.id;
                mask.confidence = 1.0;
                mask.width = bundle.calib.image_width;
                mask.height = bundle.calib.image_height;
                mask.pixels = rasterize_hull(image_pts, mask.width, mask.height);
                if (!mask.pixels.empty()) mf.masks.push_back(std::move(mask));
            }
            for (int c = 0; c < cfg.clutter_points; ++c) {
                cloud.points.push_back(
                    Vec3(uniform(0.0, 90.0), uniform(-30.0, 30.0), uniform(0.0, 3.0)));
            }
        }
    }

    bundle.validate();
    return bundle;
}

ScenarioBundle delete_periodic_frames(const ScenarioBundle& bundle, int period, int phase) {
    if (period < 1) throw std::invalid_argument("delete_periodic_frames: period must be >= 1");
    ScenarioBundle out = bundle;
    for (FrameDetections& fd : out.detections) {
        if (((fd.frame % period) + period) % period == phase) fd.detections.clear();
    }
    return out;
}

}  // namespace omot::synth
