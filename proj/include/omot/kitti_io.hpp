#pragma once

#include "omot/scenario.hpp"
#include "omot/trajectory.hpp"

#include <optional>
#include <string>
#include <vector>

namespace omot::kitti {

// One row of a KITTI tracking label / detection file.
struct KittiLabelRow {
    int frame = 0;
    int track_id = -1;  // -1 for detections
    std::string type = "Car";
    double truncated = 0.0;
    int occluded = 0;
    double alpha = 0.0;
    double bbox[4] = {0, 0, 0, 0};        // left, top, right, bottom
    double dimensions[3] = {0, 0, 0};     // height, width, length (KITTI order)
    double location[3] = {0, 0, 0};       // camera frame, bottom-face center
    double rotation_y = 0.0;
    std::optional<double> score;
};

// Parses one label line. Throws std::runtime_error naming the offending
// content on malformed input.
KittiLabelRow parse_label_line(const std::string& line);

std::string format_label_row(const KittiLabelRow& row);

// Parses a KITTI calibration file; requires P2, R0_rect (or R_rect), and
// Tr_velo_to_cam (or Tr_velo_cam). Throws std::runtime_error naming the
// missing key. Image size is not stored in KITTI calib files, so it is
// supplied by the caller.
CameraModel parse_calib_file(const std::string& path, int image_width, int image_height);

// Camera-frame label row (bottom-center location, rotation about camera y)
// to the internal LiDAR-frame box, and back.
Box3D kitti_row_to_box(const KittiLabelRow& row, const CameraModel& cam);
KittiLabelRow box_to_kitti_row(const Box3D& box, const CameraModel& cam, int frame,
                               int track_id, const std::string& type);

// Little-endian float32 (x, y, z, intensity) records; NaN/Inf points are
// filtered out on ingest.
PointCloud read_velodyne_bin(const std::string& path);
void write_velodyne_bin(const std::string& path, const PointCloud& cloud);

struct KittiPaths {
    std::string label_file;               // required
    std::string calib_file;               // required
    std::string velodyne_dir;             // optional: FFFFFF.bin per frame
    std::string instance_dir;             // optional: FFFFFF.png per frame
    int image_width = 1242;               // KITTI default; overridden by masks
    int image_height = 375;
    std::optional<int> frame_count;       // derived from labels when absent
};

// Reads a KITTI-layout sequence into a bundle. Rows with a track id also
// populate the ground-truth trajectories; DontCare rows are ignored.
ScenarioBundle read_kitti_sequence(const KittiPaths& paths);

// Writes trajectories in the KITTI tracking submission format. The 2D bbox
// column is the image-clipped pixel-bounds rectangle of the projected box
// corners (all zeros when nothing projects into the image).
void write_kitti_tracking(const TrajectorySet& trajs, const CameraModel& cam,
                          const std::string& path, const std::string& type = "Car");

}  // namespace omot::kitti
