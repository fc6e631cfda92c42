#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace omot {

using Vec3 = Eigen::Vector3d;

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Oriented 3D bounding box in a right-handed LiDAR frame (x forward, y left,
// z up). `center` is the volumetric center; `size` is (length, width, height)
// along the box x/y/z axes; `yaw` rotates about +z.
struct Box3D {
    Vec3 center{0.0, 0.0, 0.0};
    Vec3 size{1.0, 1.0, 1.0};
    double yaw = 0.0;
    double confidence = 1.0;

    bool valid() const;
    // Rotation from box frame to world frame.
    Eigen::Matrix3d rotation() const;
};

// The 8 corners of the box. Order: bottom face counter-clockwise viewed from
// +z, starting at (+l/2, +w/2, -h/2) in the box frame, then the top face with
// the same x/y pattern. Consecutive bottom corners alternate length and width
// edges; corners k and k+4 span a height edge.
std::array<Vec3, 8> vertices(const Box3D& box);

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<float> intensity;  // empty, or one entry per point
};

// Indices of cloud points inside the box, boundary inclusive.
std::vector<int> points_in_box(const PointCloud& cloud, const Box3D& box);

// Pinhole camera with a 3x4 projection matrix applied to homogeneous points
// in the (rectified) camera frame, and a rigid LiDAR-to-camera transform.
struct CameraModel {
    Eigen::Matrix<double, 3, 4> intrinsics = Eigen::Matrix<double, 3, 4>::Zero();
    Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();
    int image_width = 0;
    int image_height = 0;

    bool valid() const;
};

struct Pixel {
    int u = 0;
    int v = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Points behind the near plane are dropped before projection.
inline constexpr double kMinProjectionDepth = 0.1;

struct ProjectionResult {
    std::vector<Pixel> pixels;        // floored to integers, inside the image
    std::vector<int> source_indices;  // input index of each surviving pixel
};

// Projects LiDAR-frame points into the image. Points with camera-frame depth
// <= kMinProjectionDepth or pixels outside [0,w) x [0,h) are dropped; input
// order is preserved for the survivors.
ProjectionResult project_points(const std::vector<Vec3>& points, const CameraModel& cam);

}  // namespace omot
