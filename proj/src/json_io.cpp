#include "omot/json_io.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace omot::json_io {

namespace {

using Json = nlohmann::ordered_json;

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

Json box_to_json(const Box3D& box) {
    Json j;
    j["center"] = vec3_to_json(box.center);
    j["size"] = vec3_to_json(box.size);
    j["yaw"] = box.yaw;
    j["confidence"] = box.confidence;
    return j;
}

Box3D box_from_json(const Json& j) {
    Box3D box;
    box.center = vec3_from_json(j.at("center"));
    box.size = vec3_from_json(j.at("size"));
    box.yaw = j.at("yaw");
    box.confidence = j.at("confidence");
    return box;
}

Json trajectories_to_json(const TrajectorySet& set) {
    Json out = Json::array();
    for (const Trajectory& t : set.trajectories) {
        Json jt;
        jt["id"] = t.id;
        Json obs_list = Json::array();
        for (const Observation& obs : t.observations) {
            Json jo;
            jo["frame"] = obs.frame;
            jo["index"] = obs.det_index;
            jo["box"] = box_to_json(obs.box);
            jo["interpolated"] = obs.interpolated;
            obs_list.push_back(std::move(jo));
        }
        jt["observations"] = std::move(obs_list);
        out.push_back(std::move(jt));
    }
    return out;
}

TrajectorySet trajectories_from_json(const Json& j) {
    TrajectorySet set;
    for (const Json& jt : j) {
        Trajectory t;
        t.id = jt.at("id");
        for (const Json& jo : jt.at("observations")) {
            Observation obs;
            obs.frame = jo.at("frame");
            obs.det_index = jo.at("index");
            obs.box = box_from_json(jo.at("box"));
            obs.interpolated = jo.at("interpolated");
            t.observations.push_back(std::move(obs));
        }
        set.trajectories.push_back(std::move(t));
    }
    return set;
}

// Pixel sets as run-length [start, length, ...] pairs over packed indices.
Json rle_encode(const std::vector<uint32_t>& pixels) {
    Json runs = Json::array();
    size_t i = 0;
    while (i < pixels.size()) {
        size_t j = i;
        while (j + 1 < pixels.size() && pixels[j + 1] == pixels[j] + 1) ++j;
        runs.push_back(pixels[i]);
        runs.push_back(static_cast<uint32_t>(j - i + 1));
        i = j + 1;
    }
    return runs;
}

std::vector<uint32_t> rle_decode(const Json& runs) {
    std::vector<uint32_t> pixels;
    if (runs.size() % 2 != 0) throw std::runtime_error("json: malformed RLE run list");
    for (size_t i = 0; i < runs.size(); i += 2) {
        const uint32_t start = runs.at(i);
        const uint32_t len = runs.at(i + 1);
        for (uint32_t k = 0; k < len; ++k) pixels.push_back(start + k);
    }
    return pixels;
}

void check_schema(const Json& j, const std::string& expected, const std::string& path) {
    const std::string got = j.value("schema", "");
    if (got != expected)
        throw std::runtime_error("json: " + path + ": expected schema '" + expected +
                                 "', got '" + got + "'");
}

Json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("json: cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void store(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("json: cannot create " + path);
    out << j.dump() << "\n";
}

}  // namespace

void write_bundle(const ScenarioBundle& bundle, const std::string& path) {
    Json j;
    j["schema"] = kBundleSchema;
    j["sequence"] = bundle.sequence_id;
    j["frames"] = bundle.frame_count;

    Json calib;
    Json intr = Json::array();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) intr.push_back(bundle.calib.intrinsics(r, c));
    Json extr = Json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) extr.push_back(bundle.calib.extrinsics(r, c));
    calib["intrinsics"] = std::move(intr);
    calib["extrinsics"] = std::move(extr);
    calib["image_size"] = Json::array({bundle.calib.image_width, bundle.calib.image_height});
    j["calib"] = std::move(calib);

    Json frames = Json::array();
    for (const FrameDetections& fd : bundle.detections) {
        Json dets = Json::array();
        for (const Detection& det : fd.detections) {
            Json jd;
            jd["index"] = det.index;
            jd["box"] = box_to_json(det.box);
            dets.push_back(std::move(jd));
        }
        frames.push_back(std::move(dets));
    }
    j["detections"] = std::move(frames);

    if (bundle.masks.empty()) {
        j["masks"] = nullptr;
    } else {
        Json mask_frames = Json::array();
        for (const MaskFrame& mf : bundle.masks) {
            Json masks = Json::array();
            for (const InstanceMask& mask : mf.masks) {
                Json jm;
                jm["id"] = mask.id;
                jm["confidence"] = mask.confidence;
                jm["width"] = mask.width;
                jm["height"] = mask.height;
                jm["rle"] = rle_encode(mask.pixels);
                masks.push_back(std::move(jm));
            }
            mask_frames.push_back(std::move(masks));
        }
        j["masks"] = std::move(mask_frames);
    }

    if (bundle.clouds.empty()) {
        j["clouds"] = nullptr;
    } else {
        Json clouds = Json::array();
        for (const PointCloud& cloud : bundle.clouds) {
            Json jc;
            Json pts = Json::array();
            for (const Vec3& p : cloud.points) {
                pts.push_back(p.x());
                pts.push_back(p.y());
                pts.push_back(p.z());
            }
            jc["points"] = std::move(pts);
            if (cloud.intensity.empty()) {
                jc["intensity"] = nullptr;
            } else {
                jc["intensity"] = cloud.intensity;
            }
            clouds.push_back(std::move(jc));
        }
        j["clouds"] = std::move(clouds);
    }

    j["ground_truth"] =
        bundle.ground_truth ? trajectories_to_json(*bundle.ground_truth) : Json(nullptr);

    store(j, path);
}

ScenarioBundle read_bundle(const std::string& path) {
    const Json j = load(path);
    check_schema(j, kBundleSchema, path);

    ScenarioBundle bundle;
    bundle.sequence_id = j.at("sequence");
    bundle.frame_count = j.at("frames");

    const Json& calib = j.at("calib");
    const Json& intr = calib.at("intrinsics");
    const Json& extr = calib.at("extrinsics");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) bundle.calib.intrinsics(r, c) = intr.at(r * 4 + c);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) bundle.calib.extrinsics(r, c) = extr.at(r * 4 + c);
    bundle.calib.image_width = calib.at("image_size").at(0);
    bundle.calib.image_height = calib.at("image_size").at(1);

    int frame = 0;
    for (const Json& dets : j.at("detections")) {
        FrameDetections fd;
        fd.frame = frame++;
        for (const Json& jd : dets) {
            Detection det;
            det.index = jd.at("index");
            det.box = box_from_json(jd.at("box"));
            fd.detections.push_back(std::move(det));
        }
        bundle.detections.push_back(std::move(fd));
    }

    if (!j.at("masks").is_null()) {
        int f = 0;
        for (const Json& masks : j.at("masks")) {
            MaskFrame mf;
            mf.frame = f++;
            for (const Json& jm : masks) {
                InstanceMask mask;
                mask.id = jm.at("id");
                mask.confidence = jm.at("confidence");
                mask.width = jm.at("width");
                mask.height = jm.at("height");
                mask.pixels = rle_decode(jm.at("rle"));
                mf.masks.push_back(std::move(mask));
            }
            bundle.masks.push_back(std::move(mf));
        }
    }

    if (!j.at("clouds").is_null()) {
        for (const Json& jc : j.at("clouds")) {
            PointCloud cloud;
            const Json& pts = jc.at("points");
            if (pts.size() % 3 != 0) throw std::runtime_error("json: malformed point list");
            for (size_t i = 0; i + 2 < pts.size(); i += 3) {
                cloud.points.emplace_back(pts.at(i), pts.at(i + 1), pts.at(i + 2));
            }
            if (!jc.at("intensity").is_null()) {
                for (const Json& v : jc.at("intensity"))
                    cloud.intensity.push_back(static_cast<float>(v.get<double>()));
            }
            bundle.clouds.push_back(std::move(cloud));
        }
    }

    if (!j.at("ground_truth").is_null()) {
        bundle.ground_truth = trajectories_from_json(j.at("ground_truth"));
    }

    bundle.validate();
    return bundle;
}

void write_trajectories(const TrajectorySet& set, const std::string& sequence_id,
                        const std::string& path) {
    Json j;
    j["schema"] = kTrajectorySchema;
    j["sequence"] = sequence_id;
    j["trajectories"] = trajectories_to_json(set);
    store(j, path);
}

TrajectoryFile read_trajectories(const std::string& path) {
    const Json j = load(path);
    check_schema(j, kTrajectorySchema, path);
    TrajectoryFile file;
    file.sequence_id = j.at("sequence");
    file.set = trajectories_from_json(j.at("trajectories"));
    return file;
}

}  // namespace omot::json_io
