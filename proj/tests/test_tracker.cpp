#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omot/tracker.hpp"

#include <cmath>
#include <random>

using namespace omot;

namespace {

Box3D make_box(Vec3 center, Vec3 size = {4.0, 1.8, 1.5}, double yaw = 0.0,
               double conf = 1.0) {
    Box3D b;
    b.center = center;
    b.size = size;
    b.yaw = yaw;
    b.confidence = conf;
    return b;
}

// Independent NCD oracle: explicit corner construction and a 64-pair scan.
double ncd_oracle(const Box3D& a, const Box3D& b) {
    auto corners = [](const Box3D& box) {
        const double c = std::cos(box.yaw);
        const double s = std::sin(box.yaw);
        std::vector<Vec3> out;
        for (double sx : {-0.5, 0.5}) {
            for (double sy : {-0.5, 0.5}) {
                for (double sz : {-0.5, 0.5}) {
                    const double x = sx * box.size.x();
                    const double y = sy * box.size.y();
                    out.emplace_back(box.center.x() + c * x - s * y,
                                     box.center.y() + s * x + c * y,
                                     box.center.z() + sz * box.size.z());
                }
            }
        }
        return out;
    };
    double max_d = 0.0;
    for (const Vec3& p : corners(a)) {
        for (const Vec3& q : corners(b)) {
            max_d = std::max(max_d, (p - q).norm());
        }
    }
    return 1.0 - (a.center - b.center).norm() / max_d;
}

Box3D random_box(std::mt19937& rng, double span = 50.0) {
    std::uniform_real_distribution<double> u(-span, span);
    std::uniform_real_distribution<double> usize(0.3, 6.0);
    std::uniform_real_distribution<double> uyaw(-M_PI, M_PI);
    return make_box({u(rng), u(rng), u(rng)}, {usize(rng), usize(rng), usize(rng)}, uyaw(rng));
}

TrackerConfig default_config() { return TrackerConfig{}; }

}  // namespace

TEST_CASE("ncd of identical boxes is 1") {
    const Box3D box = make_box({3, 4, 5}, {4, 2, 1.5}, 0.7);
    CHECK(ncd(box, box) == doctest::Approx(1.0));
}

TEST_CASE("ncd of offset unit cubes matches the 64-pair derivation") {
    const Box3D a = make_box({0, 0, 0}, {1, 1, 1});
    const Box3D b = make_box({1, 0, 0}, {1, 1, 1});
    // Farthest corners are sqrt(4+1+1) apart.
    CHECK(ncd(a, b) == doctest::Approx(1.0 - 1.0 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("ncd stays finite and comparable for distant boxes") {
    const Box3D a = make_box({0, 0, 0}, {4, 2, 1.5});
    const Box3D b = make_box({100, 0, 0}, {4, 2, 1.5});
    const double v = ncd(a, b);
    CHECK(v == doctest::Approx(ncd_oracle(a, b)).epsilon(1e-12));
    CHECK(v < 0.1);
    CHECK(v > -0.1);
}

TEST_CASE("ncd equals the brute-force oracle on random pairs") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 10000; ++trial) {
        const Box3D a = random_box(rng);
        const Box3D b = random_box(rng);
        const double v = ncd(a, b);
        REQUIRE(v == doctest::Approx(ncd_oracle(a, b)).epsilon(1e-12));
        REQUIRE(v <= 1.0);
        REQUIRE(ncd(b, a) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("ncd is translation invariant and size sensitive") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const Box3D a = random_box(rng);
        Box3D b = random_box(rng);
        const Vec3 shift(1.5, -2.0, 0.5);
        Box3D a2 = a, b2 = b;
        a2.center += shift;
        b2.center += shift;
        REQUIRE(ncd(a2, b2) == doctest::Approx(ncd(a, b)).epsilon(1e-12));

        if ((a.center - b.center).norm() > 1e-6) {
            Box3D bigger = b;
            bigger.size *= 1.5;
            REQUIRE(ncd(a, bigger) > ncd(a, b));
        }
    }
}

TEST_CASE("predict applies one constant-velocity step") {
    TrackerConfig cfg = default_config();
    KalmanState state;
    state.mean.setZero();
    state.mean(4) = 4.0;
    state.mean(5) = 2.0;
    state.mean(6) = 1.5;

    SUBCASE("moves by the velocity") {
        state.mean(7) = 1.0;
        const KalmanState next = kalman_predict(state, cfg);
        CHECK(next.mean(0) == doctest::Approx(1.0));
        CHECK(next.mean(1) == doctest::Approx(0.0));
    }
    SUBCASE("stationary state inflates covariance by trace(Q)") {
        const KalmanState next = kalman_predict(state, cfg);
        CHECK(next.mean(0) == doctest::Approx(0.0));
        CHECK(next.cov.trace() ==
              doctest::Approx(state.cov.trace() + cfg.q_scale * kStateDim));
    }
    SUBCASE("k steps displace by k times the velocity") {
        state.mean(7) = 0.4;
        state.mean(8) = -0.3;
        KalmanState s = state;
        for (int k = 0; k < 7; ++k) s = kalman_predict(s, cfg);
        CHECK(s.mean(0) == doctest::Approx(7 * 0.4));
        CHECK(s.mean(1) == doctest::Approx(7 * -0.3));
    }
}

TEST_CASE("update covariance stays symmetric positive-definite") {
    TrackerConfig cfg = default_config();
    KalmanState state;
    state.mean.setZero();
    state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
    state.cov = cfg.p0_scale * StateCov::Identity();
    MeasVec z;
    z << 1, 2, 0.5, 0.3, 4.1, 1.9, 1.4;
    for (int i = 0; i < 20; ++i) {
        state = kalman_predict(state, cfg);
        state = kalman_update(state, z, cfg);
        REQUIRE((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE(state.cov.llt().info() == Eigen::Success);
        REQUIRE(state.mean(4) > 0.0);
        REQUIRE(state.mean(5) > 0.0);
        REQUIRE(state.mean(6) > 0.0);
    }
}

TEST_CASE("posterior position approaches the measurement as R vanishes") {
    TrackerConfig cfg = default_config();
    cfg.r_scale = 1e-9;
    KalmanState state;
    state.mean.setZero();
    state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
    state.cov = cfg.p0_scale * StateCov::Identity();
    MeasVec z;
    z << 2.5, -1.0, 0.8, 0.1, 4.0, 1.8, 1.5;
    const KalmanState post = kalman_update(state, z, cfg);
    CHECK((post.mean.head<3>() - Vec3(2.5, -1.0, 0.8)).norm() < 1e-6);
}

TEST_CASE("flipped measurement yaw is corrected before the update") {
    TrackerConfig cfg = default_config();
    KalmanState state;
    state.mean.setZero();
    state.mean(3) = 0.1;
    state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
    MeasVec z;
    z << 0, 0, 0, wrap_angle(0.1 + M_PI + 0.05), 4, 2, 1.5;
    const KalmanState post = kalman_update(state, z, cfg);
    // The posterior heading stays near the track's heading, not the flip.
    CHECK(std::abs(wrap_angle(post.mean(3) - 0.1)) < 0.2);
}

TEST_CASE("velocity re-initialization contract") {
    TrackerConfig cfg = default_config();
    Track track;
    track.state.mean.setZero();
    track.state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
    track.state.cov = cfg.p0_scale * StateCov::Identity();
    track.birth_position = Vec3(0, 0, 0);

    SUBCASE("one-frame displacement") {
        const Box3D obs = make_box({2, 0, 0});
        const KalmanState s = reinit_velocity(track, obs, 1, cfg);
        CHECK(s.mean(7) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(s.mean(8) == doctest::Approx(0.0));
    }
    SUBCASE("translation divided by the passed frames") {
        const Box3D obs = make_box({2, 0, 0});
        const KalmanState s = reinit_velocity(track, obs, 2, cfg);
        CHECK(s.mean(7) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("static state equals the measurement bit-exactly") {
        const Box3D obs = make_box({1.7, -0.3, 0.45}, {4.3, 1.9, 1.6}, 0.21);
        const KalmanState s = reinit_velocity(track, obs, 1, cfg);
        CHECK(s.mean(0) == obs.center.x());
        CHECK(s.mean(1) == obs.center.y());
        CHECK(s.mean(2) == obs.center.z());
        CHECK(s.mean(3) == obs.yaw);
        CHECK(s.mean(4) == obs.size.x());
        CHECK(s.mean(5) == obs.size.y());
        CHECK(s.mean(6) == obs.size.z());
    }
    SUBCASE("zero elapsed frames is an input error") {
        CHECK_THROWS_AS(reinit_velocity(track, make_box({1, 0, 0}), 0, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("association gates and optimizes") {
    TrackerConfig cfg = default_config();

    SUBCASE("exact hit matches with score 1") {
        Track track;
        track.state.mean.setZero();
        track.state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
        const std::vector<Detection> dets = {{0, make_box({0, 0, 0})}};
        const AssociationResult r = associate(dets, {track}, cfg);
        REQUIRE(r.assignment.matches.size() == 1);
        CHECK(r.scores[0][0] == doctest::Approx(1.0));
    }
    SUBCASE("distant detection is gated out") {
        Track track;
        track.state.mean.setZero();
        track.state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
        const std::vector<Detection> dets = {{0, make_box({100, 0, 0})}};
        const AssociationResult r = associate(dets, {track}, cfg);
        CHECK(r.assignment.matches.empty());
        CHECK(r.scores[0][0] < cfg.sim_threshold);
    }
    SUBCASE("three detections vs two tracks matches the exhaustive optimum") {
        auto track_at = [](double x, double y) {
            Track t;
            t.state.mean.setZero();
            t.state.mean(0) = x;
            t.state.mean(1) = y;
            t.state.mean.segment<3>(4) = Vec3(4, 2, 1.5);
            return t;
        };
        const std::vector<Track> tracks = {track_at(0, 0), track_at(3, 0)};
        const std::vector<Detection> dets = {
            {0, make_box({0.5, 0, 0})}, {1, make_box({2.8, 0.2, 0})}, {2, make_box({50, 0, 0})}};
        const AssociationResult r = associate(dets, tracks, cfg);

        double best = -1.0;
        for (int d0 = -1; d0 < 2; ++d0) {
            for (int d1 = -1; d1 < 2; ++d1) {
                if (d0 == d1 && d0 != -1) continue;
                double total = 0.0;
                if (d0 >= 0 && r.scores[0][d0] >= cfg.sim_threshold) total += r.scores[0][d0];
                if (d1 >= 0 && r.scores[1][d1] >= cfg.sim_threshold) total += r.scores[1][d1];
                best = std::max(best, total);
            }
        }
        CHECK(r.assignment.total_score == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("track-management golden ledger") {
    TrackerConfig cfg = default_config();

    SUBCASE("confirmation fires exactly at the 6th consecutive hit") {
        Tracker tracker(cfg);
        for (int frame = 1; frame <= 5; ++frame) {
            const StepOutput out =
                tracker.step(frame, {{0, make_box({frame * 1.0, 0, 0})}});
            CHECK(out.emitted.empty());
        }
        const StepOutput out = tracker.step(6, {{0, make_box({6.0, 0, 0})}});
        REQUIRE(out.emitted.size() == 6);  // 5 recovered + the confirming one
        for (const auto& [id, obs] : out.emitted) CHECK(id == 1);
        CHECK(out.emitted.front().second.frame == 1);
        CHECK(out.emitted.back().second.frame == 6);
    }

    SUBCASE("candidate dies at the 5th consecutive miss") {
        Tracker tracker(cfg);
        tracker.step(1, {{0, make_box({0, 0, 0})}});
        REQUIRE(tracker.tracks().size() == 1);
        for (int frame = 2; frame <= 5; ++frame) {
            tracker.step(frame, {});
            CHECK(tracker.tracks().size() == 1);
        }
        tracker.step(6, {});  // 5th miss
        CHECK(tracker.tracks().empty());
        CHECK(tracker.finish().trajectories.empty());
    }

    SUBCASE("confirmed track survives 27 misses and dies at the 28th") {
        Tracker tracker(cfg);
        for (int frame = 1; frame <= 6; ++frame) {
            tracker.step(frame, {{0, make_box({frame * 1.0, 0, 0})}});
        }
        REQUIRE(tracker.tracks().size() == 1);
        for (int k = 1; k <= 27; ++k) {
            tracker.step(6 + k, {});
            REQUIRE(tracker.tracks().size() == 1);
        }
        tracker.step(34, {});  // 28th miss
        CHECK(tracker.tracks().empty());
        // The confirmed history is retained in the output.
        CHECK(tracker.finish().trajectories.size() == 1);
    }

    SUBCASE("single spurious detection never confirms and never emits") {
        Tracker tracker(cfg);
        StepOutput out = tracker.step(1, {{0, make_box({0, 0, 0})}});
        CHECK(out.emitted.empty());
        for (int frame = 2; frame <= 30; ++frame) {
            out = tracker.step(frame, {});
            CHECK(out.emitted.empty());
        }
        CHECK(tracker.finish().trajectories.empty());
    }

    SUBCASE("recovered tracklet keeps only observed frames across a gap") {
        Tracker tracker(cfg);
        // Hits at frames 1..3, a miss at 4, hits at 5..7 confirm cumulatively.
        std::vector<int> observed;
        for (int frame = 1; frame <= 7; ++frame) {
            if (frame == 4) {
                tracker.step(frame, {});
                continue;
            }
            observed.push_back(frame);
            const StepOutput out =
                tracker.step(frame, {{0, make_box({frame * 1.0, 0, 0})}});
            if (frame == 7) {
                // 6th cumulative hit confirms; all observed frames come back.
                REQUIRE(out.emitted.size() == observed.size());
                for (size_t i = 0; i < observed.size(); ++i) {
                    CHECK(out.emitted[i].second.frame == observed[i]);
                }
            } else {
                CHECK(out.emitted.empty());
            }
        }
    }

    SUBCASE("duplicate detection keys are an input error") {
        Tracker tracker(cfg);
        CHECK_THROWS_AS(
            tracker.step(1, {{3, make_box({0, 0, 0})}, {3, make_box({5, 0, 0})}}),
            std::invalid_argument);
    }
}

TEST_CASE("recover_tracklet returns the pre-confirmation history") {
    Track track;
    for (int frame = 1; frame <= 6; ++frame) {
        track.history.push_back({frame, 0, make_box({frame * 1.0, 0, 0}), false});
    }
    const auto recovered = recover_tracklet(track);
    REQUIRE(recovered.size() == 5);
    CHECK(recovered.front().frame == 1);
    CHECK(recovered.back().frame == 5);
}

TEST_CASE("exact constant-velocity input with zero process noise is reproduced") {
    TrackerConfig cfg = default_config();
    cfg.q_scale = 0.0;
    Tracker tracker(cfg);
    for (int frame = 1; frame <= 15; ++frame) {
        tracker.step(frame, {{0, make_box({frame * 1.3, frame * -0.4, 0})}});
    }
    const TrajectorySet set = tracker.finish();
    REQUIRE(set.trajectories.size() == 1);
    for (const Observation& obs : set.trajectories[0].observations) {
        if (obs.frame < 3) continue;  // velocity settles after re-initialization
        CHECK((obs.box.center - Vec3(obs.frame * 1.3, obs.frame * -0.4, 0)).norm() < 1e-9);
    }
}

TEST_CASE("run_sequence emits one full trajectory per direction") {
    std::vector<FrameDetections> frames;
    for (int f = 0; f < 20; ++f) {
        frames.push_back({f, {{0, make_box({f * 1.0, 0.5 * f, 0})}}});
    }
    TrackerConfig cfg = default_config();

    const TrajectorySet fwd = run_sequence(frames, cfg);
    REQUIRE(fwd.trajectories.size() == 1);
    CHECK(fwd.trajectories[0].observations.size() == 20);
    CHECK(fwd.trajectories[0].observations.front().frame == 0);

    cfg.direction = TimeDirection::kBackward;
    const TrajectorySet bwd = run_sequence(frames, cfg);
    REQUIRE(bwd.trajectories.size() == 1);
    CHECK(bwd.trajectories[0].observations.size() == 20);
    // Backward output is re-expressed in forward frame order.
    for (size_t i = 1; i < bwd.trajectories[0].observations.size(); ++i) {
        CHECK(bwd.trajectories[0].observations[i].frame >
              bwd.trajectories[0].observations[i - 1].frame);
    }
}

TEST_CASE("every emitted trajectory holds one box per frame") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    std::vector<FrameDetections> frames;
    for (int f = 0; f < 60; ++f) {
        FrameDetections fd{f, {}};
        for (int k = 0; k < 4; ++k) {
            fd.detections.push_back(
                {k, make_box({u(rng), u(rng), 0.75})});
        }
        frames.push_back(std::move(fd));
    }
    for (TimeDirection dir : {TimeDirection::kForward, TimeDirection::kBackward}) {
        TrackerConfig cfg = default_config();
        cfg.direction = dir;
        const TrajectorySet set = run_sequence(frames, cfg);
        CHECK(frame_exclusivity_violations(set).empty());
        for (const Trajectory& t : set.trajectories) {
            for (size_t i = 1; i < t.observations.size(); ++i) {
                REQUIRE(t.observations[i].frame > t.observations[i - 1].frame);
            }
        }
    }
}

TEST_CASE("tracker runs are deterministic") {
    std::vector<FrameDetections> frames;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int f = 0; f < 40; ++f) {
        FrameDetections fd{f, {}};
        for (int k = 0; k < 3; ++k) fd.detections.push_back({k, make_box({u(rng), u(rng), 0})});
        frames.push_back(std::move(fd));
    }
    const TrackerConfig cfg = default_config();
    const TrajectorySet a = run_sequence(frames, cfg);
    const TrajectorySet b = run_sequence(frames, cfg);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (size_t i = 0; i < a.trajectories.size(); ++i) {
        REQUIRE(a.trajectories[i].observations.size() == b.trajectories[i].observations.size());
        for (size_t k = 0; k < a.trajectories[i].observations.size(); ++k) {
            const Observation& oa = a.trajectories[i].observations[k];
            const Observation& ob = b.trajectories[i].observations[k];
            REQUIRE(oa.frame == ob.frame);
            REQUIRE(oa.det_index == ob.det_index);
            REQUIRE(oa.box.center == ob.box.center);
        }
    }
}

TEST_CASE("config validation rejects bad thresholds") {
    TrackerConfig cfg;
    cfg.sim_threshold = 0.0;
    CHECK_THROWS_AS(Tracker{cfg}, std::invalid_argument);
    cfg = TrackerConfig{};
    cfg.theta_hit = 0;
    CHECK_THROWS_AS(Tracker{cfg}, std::invalid_argument);
}
