#include "omot/geometry.hpp"

#include <cmath>

namespace omot {

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    if (a > M_PI) a -= 2.0 * M_PI;
    return a;
}

bool Box3D::valid() const {
    return size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0 &&
           center.allFinite() && std::isfinite(yaw) &&
           confidence >= 0.0 && confidence <= 1.0;
}

Eigen::Matrix3d Box3D::rotation() const {
    return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

std::array<Vec3, 8> vertices(const Box3D& box) {
    const double hl = 0.5 * box.size.x();
    const double hw = 0.5 * box.size.y();
    const double hh = 0.5 * box.size.z();
    // Bottom face CCW from +z, then top face in the same x/y order.
    static constexpr double kSigns[4][2] = {{+1, +1}, {-1, +1}, {-1, -1}, {+1, -1}};
    const Eigen::Matrix3d rot = box.rotation();
    std::array<Vec3, 8> out;
    for (int k = 0; k < 8; ++k) {
        const Vec3 local(kSigns[k % 4][0] * hl, kSigns[k % 4][1] * hw,
                         (k < 4 ? -hh : +hh));
        out[k] = box.center + rot * local;
    }
    return out;
}

std::vector<int> points_in_box(const PointCloud& cloud, const Box3D& box) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const double hl = 0.5 * box.size.x();
    const double hw = 0.5 * box.size.y();
    const double hh = 0.5 * box.size.z();
    std::vector<int> inside;
    for (int i = 0; i < static_cast<int>(cloud.points.size()); ++i) {
        const Vec3 d = cloud.points[i] - box.center;
        // Rotate by -yaw into the box frame.
        const double x = c * d.x() + s * d.y();
        const double y = -s * d.x() + c * d.y();
        if (std::abs(x) <= hl && std::abs(y) <= hw && std::abs(d.z()) <= hh) {
            inside.push_back(i);
        }
    }
    return inside;
}

bool CameraModel::valid() const {
    if (image_width <= 0 || image_height <= 0) return false;
    const Eigen::Matrix3d r = extrinsics.topLeftCorner<3, 3>();
    const bool orthonormal =
        (r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-6;
    return orthonormal && std::abs(r.determinant() - 1.0) < 1e-6;
}

ProjectionResult project_points(const std::vector<Vec3>& points, const CameraModel& cam) {
    ProjectionResult result;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        const Eigen::Vector4d p_cam = cam.extrinsics * points[i].homogeneous();
        if (p_cam.z() <= kMinProjectionDepth) continue;
        const Eigen::Vector3d uvw = cam.intrinsics * p_cam;
        if (uvw.z() <= 0.0) continue;
        const int u = static_cast<int>(std::floor(uvw.x() / uvw.z()));
        const int v = static_cast<int>(std::floor(uvw.y() / uvw.z()));
        if (u < 0 || u >= cam.image_width || v < 0 || v >= cam.image_height) continue;
        result.pixels.push_back({u, v});
        result.source_indices.push_back(i);
    }
    return result;
}

}  // namespace omot
