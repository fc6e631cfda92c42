#pragma once

#include "omot/scenario.hpp"

#include <cstdint>
#include <string>

namespace omot::synth {

// Scenario generator standing in for the detector outputs: noisy
// constant-velocity/turn ground truth, a detector model with misses, position
// noise, and Poisson clutter, and optionally point clouds plus rasterized
// instance masks consistent with the box geometry.
struct SynthConfig {
    std::string sequence_id = "synth";
    uint64_t seed = 0;

    int object_count = 8;
    int frame_count = 200;

    // Motion model (units are meters and frames).
    double speed_min = 0.3;
    double speed_max = 1.5;
    double turn_rate_max = 0.02;
    double process_speed_noise = 0.02;
    double process_turn_noise = 0.002;
    double lifespan_min_frac = 0.25;
    double lifespan_max_frac = 0.75;

    // Detector model.
    double pos_noise = 0.0;       // sigma for x/y; z uses a quarter of it
    double yaw_noise = 0.0;
    double size_noise = 0.0;
    double fn_prob = 0.0;
    double fp_rate = 0.0;         // Poisson mean per frame
    double tp_conf_min = 1.0;
    double tp_conf_max = 1.0;
    double fp_conf_min = 0.05;
    double fp_conf_max = 0.4;

    // Sensor emulation for the fusion stage.
    bool with_sensors = false;
    int points_per_box = 60;
    int clutter_points = 200;

    void validate() const;
};

ScenarioBundle generate(const SynthConfig& cfg);

// The fixed camera used by generated bundles.
CameraModel synthetic_camera();

// Deletes the detections of every frame whose index is congruent to
// `phase` modulo `period`; used for dropout/interpolation experiments.
ScenarioBundle delete_periodic_frames(const ScenarioBundle& bundle, int period, int phase);

}  // namespace omot::synth
