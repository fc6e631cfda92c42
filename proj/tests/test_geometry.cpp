#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace omot;

namespace {

// Independent corner oracle: R_z(yaw) * diag(size/2) * signs + center, with
// the rotation written out explicitly.
std::vector<Vec3> corner_oracle(const Box3D& box) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    std::vector<Vec3> out;
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            for (double sz : {-1.0, 1.0}) {
                const double x = sx * box.size.x() / 2.0;
                const double y = sy * box.size.y() / 2.0;
                const double z = sz * box.size.z() / 2.0;
                out.emplace_back(box.center.x() + c * x - s * y,
                                 box.center.y() + s * x + c * y, box.center.z() + z);
            }
        }
    }
    return out;
}

bool same_corner_set(const std::array<Vec3, 8>& a, const std::vector<Vec3>& b, double tol) {
    std::vector<char> used(b.size(), 0);
    for (const Vec3& p : a) {
        bool found = false;
        for (size_t i = 0; i < b.size(); ++i) {
            if (!used[i] && (p - b[i]).norm() < tol) {
                used[i] = 1;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

Box3D make_box(Vec3 center, Vec3 size, double yaw) {
    Box3D b;
    b.center = center;
    b.size = size;
    b.yaw = yaw;
    return b;
}

// Half-space oracle: point is in the box iff its projections onto the box
// axes stay within the half sizes.
bool in_box_oracle(const Vec3& p, const Box3D& box) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const Vec3 d = p - box.center;
    const double bx = c * d.x() + s * d.y();
    const double by = -s * d.x() + c * d.y();
    return std::abs(bx) <= box.size.x() / 2.0 + 0.0 && std::abs(by) <= box.size.y() / 2.0 &&
           std::abs(d.z()) <= box.size.z() / 2.0;
}

}  // namespace

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
    CHECK(wrap_angle(5 * M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("unit cube corners at all sign combinations") {
    const Box3D box = make_box({0, 0, 0}, {1, 1, 1}, 0.0);
    const auto corners = vertices(box);
    std::set<std::array<int, 3>> seen;
    for (const Vec3& v : corners) {
        CHECK(std::abs(std::abs(v.x()) - 0.5) < 1e-12);
        CHECK(std::abs(std::abs(v.y()) - 0.5) < 1e-12);
        CHECK(std::abs(std::abs(v.z()) - 0.5) < 1e-12);
        seen.insert({v.x() > 0 ? 1 : -1, v.y() > 0 ? 1 : -1, v.z() > 0 ? 1 : -1});
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("unit cube is 4-fold symmetric under quarter turns") {
    const auto base = vertices(make_box({0, 0, 0}, {1, 1, 1}, 0.0));
    const auto turned = vertices(make_box({0, 0, 0}, {1, 1, 1}, M_PI / 2));
    CHECK(same_corner_set(turned, {base.begin(), base.end()}, 1e-9));
}

TEST_CASE("corner set matches the rotation-matrix oracle") {
    const Box3D box = make_box({1, 2, 0}, {4, 2, 1.5}, M_PI / 6);
    CHECK(same_corner_set(vertices(box), corner_oracle(box), 1e-12));
}

TEST_CASE("vertex centroid equals the box center") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const Box3D box = make_box({u(rng), u(rng), u(rng)},
                                   {std::abs(u(rng)) + 0.1, std::abs(u(rng)) + 0.1,
                                    std::abs(u(rng)) + 0.1},
                                   u(rng) / 7.0);
        const auto corners = vertices(box);
        Vec3 centroid = Vec3::Zero();
        for (const Vec3& v : corners) centroid += v;
        centroid /= 8.0;
        CHECK((centroid - box.center).norm() < 1e-9);
    }
}

TEST_CASE("documented corner order yields length/width/height edges") {
    const Box3D box = make_box({3, -2, 1}, {4.2, 1.7, 1.45}, 0.83);
    const auto v = vertices(box);
    // Bottom ring alternates length and width edges.
    CHECK((v[0] - v[1]).norm() == doctest::Approx(box.size.x()));
    CHECK((v[1] - v[2]).norm() == doctest::Approx(box.size.y()));
    CHECK((v[2] - v[3]).norm() == doctest::Approx(box.size.x()));
    CHECK((v[3] - v[0]).norm() == doctest::Approx(box.size.y()));
    for (int k = 0; k < 4; ++k) {
        CHECK((v[k] - v[k + 4]).norm() == doctest::Approx(box.size.z()));
    }
}

TEST_CASE("points_in_box basics") {
    const Box3D cube = make_box({0, 0, 0}, {1, 1, 1}, 0.0);
    PointCloud cloud;

    SUBCASE("center point is inside") {
        cloud.points = {{0, 0, 0}};
        CHECK(points_in_box(cloud, cube) == std::vector<int>{0});
    }
    SUBCASE("corner point is inside (boundary inclusive)") {
        cloud.points = {{0.5, 0.5, 0.5}};
        CHECK(points_in_box(cloud, cube) == std::vector<int>{0});
    }
    SUBCASE("outside point is excluded") {
        cloud.points = {{0.51, 0, 0}};
        CHECK(points_in_box(cloud, cube).empty());
    }
}

TEST_CASE("points_in_box matches the per-point oracle on a rotated box") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    PointCloud cloud;
    for (int i = 0; i < 1000; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    const Box3D box = make_box({0, 0, 0}, {2, 1, 1}, M_PI / 4);

    std::vector<int> expected;
    for (int i = 0; i < 1000; ++i) {
        if (in_box_oracle(cloud.points[i], box)) expected.push_back(i);
    }
    CHECK(points_in_box(cloud, box) == expected);
    CHECK(!expected.empty());
}

TEST_CASE("points_in_box agrees with the half-space oracle on random pairs") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> usize(0.2, 5.0);
    std::uniform_real_distribution<double> uyaw(-M_PI, M_PI);
    for (int trial = 0; trial < 10000; ++trial) {
        const Box3D box =
            make_box({u(rng), u(rng), u(rng)}, {usize(rng), usize(rng), usize(rng)}, uyaw(rng));
        PointCloud cloud;
        for (int i = 0; i < 8; ++i) {
            cloud.points.emplace_back(box.center.x() + u(rng) / 2, box.center.y() + u(rng) / 2,
                                      box.center.z() + u(rng) / 2);
        }
        std::vector<int> expected;
        for (int i = 0; i < 8; ++i) {
            if (in_box_oracle(cloud.points[i], box)) expected.push_back(i);
        }
        REQUIRE(points_in_box(cloud, box) == expected);
    }
}

TEST_CASE("points_in_box is invariant under joint rotation about the box center") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> uyaw(-M_PI, M_PI);
    for (int trial = 0; trial < 200; ++trial) {
        const Box3D box = make_box({u(rng), u(rng), u(rng)}, {2.5, 1.2, 1.1}, uyaw(rng));
        PointCloud cloud;
        for (int i = 0; i < 50; ++i) {
            cloud.points.emplace_back(box.center.x() + u(rng), box.center.y() + u(rng),
                                      box.center.z() + u(rng));
        }
        const double delta = uyaw(rng);
        const double c = std::cos(delta);
        const double s = std::sin(delta);
        Box3D rotated_box = box;
        rotated_box.yaw = wrap_angle(box.yaw + delta);
        PointCloud rotated_cloud;
        for (const Vec3& p : cloud.points) {
            const Vec3 d = p - box.center;
            rotated_cloud.points.emplace_back(box.center.x() + c * d.x() - s * d.y(),
                                              box.center.y() + s * d.x() + c * d.y(), p.z());
        }
        REQUIRE(points_in_box(cloud, box) == points_in_box(rotated_cloud, rotated_box));
    }
}

namespace {

CameraModel simple_camera() {
    CameraModel cam;
    cam.intrinsics << 100, 0, 50, 0, 0, 100, 50, 0, 0, 0, 1, 0;
    cam.extrinsics = Eigen::Matrix4d::Identity();
    cam.image_width = 100;
    cam.image_height = 100;
    return cam;
}

}  // namespace

TEST_CASE("project_points pinhole cases") {
    const CameraModel cam = simple_camera();

    SUBCASE("principal ray hits the principal point") {
        const auto r = project_points({{0, 0, 10}}, cam);
        REQUIRE(r.pixels.size() == 1);
        CHECK(r.pixels[0] == Pixel{50, 50});
        CHECK(r.source_indices == std::vector<int>{0});
    }
    SUBCASE("point behind the camera is dropped") {
        const auto r = project_points({{0, 0, -1}}, cam);
        CHECK(r.pixels.empty());
    }
    SUBCASE("hand-evaluated pinhole equation") {
        const auto r = project_points({{1, 2, 10}}, cam);
        REQUIRE(r.pixels.size() == 1);
        CHECK(r.pixels[0] == Pixel{60, 70});
    }
    SUBCASE("near-plane points are dropped") {
        const auto r = project_points({{0, 0, 0.05}}, cam);
        CHECK(r.pixels.empty());
    }
    SUBCASE("surviving order and source indices are preserved") {
        const auto r = project_points({{0, 0, 10}, {0, 0, -5}, {1, 2, 10}}, cam);
        REQUIRE(r.pixels.size() == 2);
        CHECK(r.source_indices == std::vector<int>{0, 2});
    }
}

TEST_CASE("projected pixels always lie inside the image") {
    const CameraModel cam = simple_camera();
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 5000; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const auto r = project_points(pts, cam);
    CHECK(!r.pixels.empty());
    for (const Pixel& p : r.pixels) {
        REQUIRE(p.u >= 0);
        REQUIRE(p.u < cam.image_width);
        REQUIRE(p.v >= 0);
        REQUIRE(p.v < cam.image_height);
    }
}

TEST_CASE("camera validity checks the rotation block") {
    CameraModel cam = simple_camera();
    CHECK(cam.valid());
    cam.extrinsics(0, 0) = 2.0;
    CHECK(!cam.valid());
}
