#include "omot/kitti_io.hpp"

#include "omot/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace omot::kitti {

namespace {

namespace fs = std::filesystem;

std::string frame_stem(int frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", frame);
    return buf;
}

// Exact inverse of a rigid 4x4 transform.
Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& t) {
    Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
    const Eigen::Matrix3d r = t.topLeftCorner<3, 3>();
    inv.topLeftCorner<3, 3>() = r.transpose();
    inv.topRightCorner<3, 1>() = -r.transpose() * t.topRightCorner<3, 1>();
    return inv;
}

}  // namespace

KittiLabelRow parse_label_line(const std::string& line) {
    std::istringstream is(line);
    KittiLabelRow row;
    if (!(is >> row.frame >> row.track_id >> row.type >> row.truncated >> row.occluded >>
          row.alpha >> row.bbox[0] >> row.bbox[1] >> row.bbox[2] >> row.bbox[3] >>
          row.dimensions[0] >> row.dimensions[1] >> row.dimensions[2] >> row.location[0] >>
          row.location[1] >> row.location[2] >> row.rotation_y)) {
        throw std::runtime_error("kitti: malformed label row: '" + line + "'");
    }
    double s;
    if (is >> s) row.score = s;
    return row;
}

std::string format_label_row(const KittiLabelRow& row) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << row.frame << ' ' << row.track_id << ' ' << row.type << ' ' << row.truncated << ' '
       << row.occluded << ' ' << row.alpha << ' ' << row.bbox[0] << ' ' << row.bbox[1] << ' '
       << row.bbox[2] << ' ' << row.bbox[3] << ' ' << row.dimensions[0] << ' '
       << row.dimensions[1] << ' ' << row.dimensions[2] << ' ' << row.location[0] << ' '
       << row.location[1] << ' ' << row.location[2] << ' ' << row.rotation_y;
    if (row.score) os << ' ' << *row.score;
    return os.str();
}

CameraModel parse_calib_file(const std::string& path, int image_width, int image_height) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("kitti: cannot open calib file " + path);

    std::map<std::string, std::vector<double>> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (!key.empty() && key.back() == ':') key.pop_back();
        std::vector<double> values;
        double v;
        while (is >> v) values.push_back(v);
        entries[key] = std::move(values);
    }

    auto lookup = [&](std::initializer_list<const char*> names,
                      size_t expected) -> const std::vector<double>& {
        for (const char* name : names) {
            auto it = entries.find(name);
            if (it != entries.end()) {
                if (it->second.size() != expected)
                    throw std::runtime_error(std::string("kitti: calib key ") + name +
                                             " has wrong arity in " + path);
                return it->second;
            }
        }
        throw std::runtime_error(std::string("kitti: calib key ") + *names.begin() +
                                 " missing in " + path);
    };

    const auto& p2 = lookup({"P2"}, 12);
    const auto& rect = lookup({"R0_rect", "R_rect"}, 9);
    const auto& velo = lookup({"Tr_velo_to_cam", "Tr_velo_cam"}, 12);

    CameraModel cam;
    cam.image_width = image_width;
    cam.image_height = image_height;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) cam.intrinsics(r, c) = p2[r * 4 + c];

    Eigen::Matrix4d rect4 = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rect4(r, c) = rect[r * 3 + c];
    Eigen::Matrix4d tr = Eigen::Matrix4d::Identity();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) tr(r, c) = velo[r * 4 + c];

    cam.extrinsics = rect4 * tr;
    return cam;
}

Box3D kitti_row_to_box(const KittiLabelRow& row, const CameraModel& cam) {
    const Eigen::Matrix4d cam_to_lidar = rigid_inverse(cam.extrinsics);
    const Eigen::Matrix3d rot = cam_to_lidar.topLeftCorner<3, 3>();

    // KITTI stores the bottom-face center with camera y pointing down.
    const double h = row.dimensions[0];
    const double w = row.dimensions[1];
    const double l = row.dimensions[2];
    Eigen::Vector4d center_cam(row.location[0], row.location[1] - h / 2.0, row.location[2], 1.0);

    Box3D box;
    box.center = (cam_to_lidar * center_cam).head<3>();
    box.size = Vec3(l, w, h);
    const Vec3 heading_cam(std::cos(row.rotation_y), 0.0, -std::sin(row.rotation_y));
    const Vec3 heading = rot * heading_cam;
    box.yaw = wrap_angle(std::atan2(heading.y(), heading.x()));
    box.confidence = row.score.value_or(1.0);
    return box;
}

KittiLabelRow box_to_kitti_row(const Box3D& box, const CameraModel& cam, int frame,
                               int track_id, const std::string& type) {
    const Eigen::Matrix3d rot = cam.extrinsics.topLeftCorner<3, 3>();

    KittiLabelRow row;
    row.frame = frame;
    row.track_id = track_id;
    row.type = type;
    row.dimensions[0] = box.size.z();
    row.dimensions[1] = box.size.y();
    row.dimensions[2] = box.size.x();

    const Eigen::Vector4d center_cam = cam.extrinsics * box.center.homogeneous();
    row.location[0] = center_cam.x();
    row.location[1] = center_cam.y() + box.size.z() / 2.0;
    row.location[2] = center_cam.z();

    const Vec3 heading_cam = rot * Vec3(std::cos(box.yaw), std::sin(box.yaw), 0.0);
    row.rotation_y = wrap_angle(std::atan2(-heading_cam.z(), heading_cam.x()));
    row.alpha = wrap_angle(row.rotation_y - std::atan2(row.location[0], row.location[2]));

    // 2D bbox: pixel bounds of the projected corners, clipped to the image;
    // all zeros when no corner lands inside.
    const auto corners = vertices(box);
    const ProjectionResult proj =
        project_points(std::vector<Vec3>(corners.begin(), corners.end()), cam);
    if (!proj.pixels.empty()) {
        int left = cam.image_width, top = cam.image_height, right = 0, bottom = 0;
        for (const Pixel& p : proj.pixels) {
            left = std::min(left, p.u);
            right = std::max(right, p.u);
            top = std::min(top, p.v);
            bottom = std::max(bottom, p.v);
        }
        row.bbox[0] = left;
        row.bbox[1] = top;
        row.bbox[2] = std::min(right + 1, cam.image_width);
        row.bbox[3] = std::min(bottom + 1, cam.image_height);
    }
    row.score = box.confidence;
    return row;
}

PointCloud read_velodyne_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("kitti: cannot open point cloud " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0, std::ios::beg);
    if (bytes % 16 != 0)
        throw std::runtime_error("kitti: point cloud " + path + " is not 4-float records");

    const size_t n = static_cast<size_t>(bytes) / 16;
    std::vector<float> raw(n * 4);
    in.read(reinterpret_cast<char*>(raw.data()), bytes);
    if (!in) throw std::runtime_error("kitti: short read on " + path);

    PointCloud cloud;
    cloud.points.reserve(n);
    cloud.intensity.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const float x = raw[4 * i], y = raw[4 * i + 1], z = raw[4 * i + 2];
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) continue;
        cloud.points.emplace_back(x, y, z);
        cloud.intensity.push_back(raw[4 * i + 3]);
    }
    return cloud;
}

void write_velodyne_bin(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("kitti: cannot create " + path);
    for (size_t i = 0; i < cloud.points.size(); ++i) {
        const float rec[4] = {static_cast<float>(cloud.points[i].x()),
                              static_cast<float>(cloud.points[i].y()),
                              static_cast<float>(cloud.points[i].z()),
                              i < cloud.intensity.size() ? cloud.intensity[i] : 0.0f};
        out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
    }
}

ScenarioBundle read_kitti_sequence(const KittiPaths& paths) {
    std::ifstream in(paths.label_file);
    if (!in) throw std::runtime_error("kitti: cannot open label file " + paths.label_file);

    int image_width = paths.image_width;
    int image_height = paths.image_height;

    // Mask PNGs, when present, define the true image size.
    std::map<int, LabelImage> instance_images;
    if (!paths.instance_dir.empty()) {
        for (const auto& entry : fs::directory_iterator(paths.instance_dir)) {
            if (entry.path().extension() != ".png") continue;
            const int frame = std::stoi(entry.path().stem().string());
            instance_images.emplace(frame, read_label_png(entry.path().string()));
        }
        if (!instance_images.empty()) {
            image_width = instance_images.begin()->second.width;
            image_height = instance_images.begin()->second.height;
        }
    }

    ScenarioBundle bundle;
    bundle.calib = parse_calib_file(paths.calib_file, image_width, image_height);

    std::vector<KittiLabelRow> rows;
    std::string line;
    int line_no = 0;
    int max_frame = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        KittiLabelRow row;
        try {
            row = parse_label_line(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(paths.label_file + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
        max_frame = std::max(max_frame, row.frame);
        if (row.type == "DontCare") continue;
        rows.push_back(std::move(row));
    }

    bundle.frame_count = paths.frame_count.value_or(max_frame + 1);
    bundle.sequence_id = fs::path(paths.label_file).stem().string();
    bundle.detections.resize(bundle.frame_count);
    for (int f = 0; f < bundle.frame_count; ++f) bundle.detections[f].frame = f;

    std::map<int, Trajectory> gt;
    for (const KittiLabelRow& row : rows) {
        if (row.frame < 0 || row.frame >= bundle.frame_count)
            throw std::runtime_error("kitti: label frame " + std::to_string(row.frame) +
                                     " outside sequence");
        const Box3D box = kitti_row_to_box(row, bundle.calib);
        FrameDetections& fd = bundle.detections[row.frame];
        const int index = static_cast<int>(fd.detections.size());
        fd.detections.push_back({index, box});
        if (row.track_id >= 0) {
            Trajectory& t = gt[row.track_id];
            t.id = row.track_id + 1;  // internal ids start at 1
            t.observations.push_back({row.frame, index, box, false});
        }
    }
    if (!gt.empty()) {
        TrajectorySet set;
        for (auto& [id, t] : gt) {
            std::sort(t.observations.begin(), t.observations.end(),
                      [](const Observation& a, const Observation& b) { return a.frame < b.frame; });
            set.trajectories.push_back(std::move(t));
        }
        bundle.ground_truth = std::move(set);
    }

    if (!paths.velodyne_dir.empty()) {
        bundle.clouds.resize(bundle.frame_count);
        for (int f = 0; f < bundle.frame_count; ++f) {
            const fs::path p = fs::path(paths.velodyne_dir) / (frame_stem(f) + ".bin");
            if (fs::exists(p)) bundle.clouds[f] = read_velodyne_bin(p.string());
        }
    }

    if (!instance_images.empty()) {
        bundle.masks.resize(bundle.frame_count);
        for (int f = 0; f < bundle.frame_count; ++f) {
            bundle.masks[f].frame = f;
            auto it = instance_images.find(f);
            if (it == instance_images.end()) continue;
            const LabelImage& img = it->second;
            std::map<uint16_t, std::vector<uint32_t>> by_id;
            for (int v = 0; v < img.height; ++v) {
                for (int u = 0; u < img.width; ++u) {
                    const uint16_t id = img.at(u, v);
                    if (id != 0)
                        by_id[id].push_back(static_cast<uint32_t>(v) * img.width + u);
                }
            }
            for (auto& [id, pixels] : by_id) {
                InstanceMask mask;
                mask.id = id;
                mask.width = img.width;
                mask.height = img.height;
                mask.pixels = std::move(pixels);
                bundle.masks[f].masks.push_back(std::move(mask));
            }
        }
    }

    bundle.validate();
    return bundle;
}

void write_kitti_tracking(const TrajectorySet& trajs, const CameraModel& cam,
                          const std::string& path, const std::string& type) {
    if (!frame_exclusivity_violations(trajs).empty())
        throw std::invalid_argument("kitti: trajectories violate frame exclusivity");

    std::vector<KittiLabelRow> rows;
    for (const Trajectory& t : trajs.trajectories) {
        for (const Observation& obs : t.observations) {
            rows.push_back(box_to_kitti_row(obs.box, cam, obs.frame, t.id, type));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const KittiLabelRow& a, const KittiLabelRow& b) {
        return std::tie(a.frame, a.track_id) < std::tie(b.frame, b.track_id);
    });

    std::ofstream out(path);
    if (!out) throw std::runtime_error("kitti: cannot create " + path);
    for (const KittiLabelRow& row : rows) out << format_label_row(row) << "\n";
}

}  // namespace omot::kitti
