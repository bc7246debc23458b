#include "padguard/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace padguard;

namespace {

Scenario empty_pad_scenario() {
  Scenario sc;
  sc.id = "empty_pad";
  sc.seed = 1;
  sc.duration_s = 60.0;
  sc.use_truth_distance = true;
  sc.mission.danger_threshold = 150;
  return sc;
}

}  // namespace

TEST(CameraModel, ValidationBounds) {
  FisheyeCameraModel cam;
  EXPECT_NO_THROW(cam.validate());
  cam.fov = std::numbers::pi / 2;  // not panoramic
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam.fov = 220.0 * std::numbers::pi / 180.0;
  cam.focal_px_per_rad = 500.0;  // image circle larger than the frame
  EXPECT_THROW(cam.validate(), std::invalid_argument);
}

TEST(ProjectPerson, CenteredBodyProjectsToImageCenter) {
  FisheyeCameraModel cam;
  const auto box = project_person(cam, {0, 0}, 1.7, 0.25);
  ASSERT_TRUE(box);
  EXPECT_NEAR(box->cx, 0.5, 1e-9);
  EXPECT_NEAR(box->cy, 0.5, 1e-9);
}

TEST(ProjectPerson, AzimuthConsistentWithPixelTransform) {
  FisheyeCameraModel cam;
  // person due +x_cam: its box center recovers a +x_cam direction
  const auto box = project_person(cam, {2.0, 0.0}, 1.7, 0.25);
  ASSERT_TRUE(box);
  const ImagePoint ip{box->cx * cam.image_size, box->cy * cam.image_size};
  const CamPixPoint cp = image_to_campix(ip, {cam.image_size, cam.image_size});
  EXPECT_GT(cp.x, 0.0);
  EXPECT_NEAR(cp.y, 0.0, 1e-6);
}

TEST(ProjectPerson, AreaDecreasesWithDistance) {
  FisheyeCameraModel cam;
  double prev_area = std::numeric_limits<double>::infinity();
  for (double d = 1.0; d <= 5.0; d += 0.5) {
    const auto box = project_person(cam, {d, 0.3}, 1.7, 0.25);
    ASSERT_TRUE(box);
    const double area = box->w * box->h;
    EXPECT_LT(area, prev_area);
    prev_area = area;
  }
}

TEST(ProjectPerson, RoundTripLocalization) {
  FisheyeCameraModel cam;
  cam.pose = {0.4, -0.2, 0.3};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(0.5, 5.0), az(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const double d = dist(rng), a = az(rng);
    const WorldPoint2D truth{cam.pose.d_x_cam + d * std::cos(a),
                             cam.pose.d_y_cam + d * std::sin(a)};
    const auto box = project_person(cam, truth, 1.7, 0.25);
    ASSERT_TRUE(box);
    const ImagePoint ip{box->cx * cam.image_size, box->cy * cam.image_size};
    const WorldPoint2D rec = localize_person(
        image_to_campix(ip, {cam.image_size, cam.image_size}), d, cam.pose);
    EXPECT_NEAR(rec.x, truth.x, 0.05);
    EXPECT_NEAR(rec.y, truth.y, 0.05);
  }
}

TEST(SynthDetections, NoiselessProjectionCounts) {
  Scenario sc = empty_pad_scenario();
  sc.pedestrians = {{1, {{0, 2, 0}}, 1.7, 0.25}, {2, {{0, -1, 1}}, 1.6, 0.25}};
  std::mt19937 rng(1);
  const BoundingBoxesDist msg = synth_detections(sc, 0.0, rng, nullptr);
  EXPECT_EQ(msg.boxes.size(), 2u);
}

TEST(SynthDetections, FullMissRateDropsEverything) {
  Scenario sc = empty_pad_scenario();
  sc.pedestrians = {{1, {{0, 2, 0}}, 1.7, 0.25}};
  sc.noise.miss_rate = 1.0;
  std::mt19937 rng(1);
  EXPECT_TRUE(synth_detections(sc, 0.0, rng, nullptr).boxes.empty());
}

TEST(SynthDetections, PixelNoiseIsBounded) {
  Scenario sc = empty_pad_scenario();
  sc.pedestrians = {{1, {{0, 2, 0.5}}, 1.7, 0.25}};
  const double sigma = 2.0;
  sc.noise.pixel_sigma = sigma;
  std::mt19937 rng(9);
  const auto clean = project_person(sc.camera, {2, 0.5}, 1.7, 0.25);
  ASSERT_TRUE(clean);
  for (int i = 0; i < 200; ++i) {
    const BoundingBoxesDist msg = synth_detections(sc, 0.0, rng, nullptr);
    ASSERT_EQ(msg.boxes.size(), 1u);
    const double bound = 6.0 * sigma / sc.camera.image_size;
    EXPECT_NEAR(msg.boxes[0].cx, clean->cx, bound);
    EXPECT_NEAR(msg.boxes[0].cy, clean->cy, bound);
    EXPECT_NEAR(msg.boxes[0].w, clean->w, bound);
    EXPECT_NEAR(msg.boxes[0].h, clean->h, bound);
  }
}

TEST(StepUav, AtSetpointHasZeroVelocity) {
  const UavState s{{1, 2, 3}, {}};
  const UavState n = step_uav(s, {{1, 2, 3}, false}, 0.05, {});
  EXPECT_DOUBLE_EQ(n.velocity.norm(), 0.0);
}

TEST(StepUav, FarSetpointSaturatesSpeed) {
  UavParams p;
  const UavState n = step_uav({{0, 0, 1}, {}}, {{100, 0, 1}, false}, 0.05, p);
  EXPECT_DOUBLE_EQ(n.velocity.norm(), p.v_max);
}

TEST(StepUav, ConvergesToFixedSetpoint) {
  UavParams p;
  UavState s{{0, 0, 0}, {}};
  const Setpoint sp{{1.5, -2.0, 2.0}, false};
  double t = 0.0;
  while ((s.position - sp.position).norm() > 0.05 && t < 30.0) {
    s = step_uav(s, sp, 0.05, p);
    t += 0.05;
  }
  EXPECT_LE((s.position - sp.position).norm(), 0.05);
  EXPECT_LT(t, 30.0);
}

TEST(StepUav, SpeedNeverExceedsVmax) {
  UavParams p;
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> c(-5, 5);
  UavState s{{0, 0, 0}, {}};
  for (int i = 0; i < 500; ++i) {
    s = step_uav(s, {{c(rng), c(rng), std::abs(c(rng))}, false}, 0.05, p);
    EXPECT_LE(s.velocity.norm(), p.v_max + 1e-12);
  }
}

TEST(StepUav, LandCommandDescendsToGround) {
  UavParams p;
  UavState s{{0.5, 0.5, 1.0}, {}};
  for (int i = 0; i < 100 && s.position.z > 0.0; ++i) s = step_uav(s, {{}, true}, 0.05, p);
  EXPECT_DOUBLE_EQ(s.position.z, 0.0);
  EXPECT_DOUBLE_EQ(s.position.x, 0.5);  // lateral position held
}

TEST(RunScenario, EmptyPadLandsAtCenter) {
  const SimulationTrace trace = run_scenario(empty_pad_scenario());
  ASSERT_TRUE(trace.touched_down);
  EXPECT_NEAR(trace.touchdown.x, 0.0, 0.1);
  EXPECT_NEAR(trace.touchdown.y, 0.0, 0.1);
  EXPECT_EQ(trace.retreat_events, 0);
  EXPECT_FALSE(trace.emergency_landing);
}

TEST(RunScenario, DeterministicTraceBytes) {
  Scenario sc = empty_pad_scenario();
  sc.pedestrians = {{1, {{0, 4, 0}, {30, 2, 0}}, 1.7, 0.25}};
  sc.noise.pixel_sigma = 1.0;
  sc.mission.danger_threshold = 40;
  const SimulationTrace a = run_scenario(sc);
  const SimulationTrace b = run_scenario(sc);
  EXPECT_EQ(a.to_string(), b.to_string());
}

TEST(RunScenario, MessageCadenceMatchesRate) {
  Scenario sc = empty_pad_scenario();
  sc.duration_s = 5.0;
  const SimulationTrace trace = run_scenario(sc);
  std::vector<double> stamps;
  for (const std::string& line : trace.lines) {
    if (line.find("\"type\":\"msg\"") == std::string::npos) continue;
    stamps.push_back(nlohmann::json::parse(line).at("t").get<double>());
  }
  ASSERT_GT(stamps.size(), 10u);
  const double dt_msg = 1.0 / sc.message_hz;
  const double tick = 1.0 / sc.control_hz;
  for (std::size_t i = 1; i < stamps.size(); ++i)
    EXPECT_NEAR(stamps[i] - stamps[i - 1], dt_msg, tick + 1e-9);
}

TEST(RunScenario, IntruderCausesRetreatThenEmergencyLanding) {
  Scenario sc = empty_pad_scenario();
  sc.id = "one_person_intrusion";
  sc.mission.danger_threshold = 60;  // ~2 s of in-range messages
  // crosses r_s during the prelanding descent (~2.6 s - 3.7 s into the run)
  sc.pedestrians = {
      {1, {{0.0, 6.0, 0.0}, {2.0, 6.0, 0.0}, {2.5, 3.4, 0.0}, {4.0, 2.0, 0.0}, {60.0, 2.0, 0.0}},
       1.7, 0.25}};
  const SimulationTrace trace = run_scenario(sc);
  ASSERT_TRUE(trace.touched_down);
  EXPECT_GE(trace.retreat_events, 1);
  EXPECT_TRUE(trace.emergency_landing);
  for (const WorldPoint2D& p : trace.emergency_people) {
    EXPECT_GE(std::hypot(trace.touchdown.x - p.x, trace.touchdown.y - p.y),
              sc.landing.r_d - 1e-6);
  }
}

TEST(ScenarioIo, JsonRoundTrip) {
  Scenario sc = empty_pad_scenario();
  sc.pedestrians = {{3, {{0, 1, 2}, {5, 2, 3}}, 1.8, 0.3}};
  sc.mission.mission_waypoints = {{1, 1, 2.5}};
  const Scenario back = scenario_from_json(scenario_to_json(sc));
  EXPECT_EQ(back.id, sc.id);
  EXPECT_EQ(back.seed, sc.seed);
  EXPECT_DOUBLE_EQ(back.camera.focal_px_per_rad, sc.camera.focal_px_per_rad);
  ASSERT_EQ(back.pedestrians.size(), 1u);
  EXPECT_DOUBLE_EQ(back.pedestrians[0].height, 1.8);
  ASSERT_EQ(back.mission.mission_waypoints.size(), 1u);
  EXPECT_DOUBLE_EQ(back.mission.mission_waypoints[0].x, 1.0);
}

TEST(Scenario, ValidationRejectsOverRateMessages) {
  Scenario sc = empty_pad_scenario();
  sc.message_hz = 60.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
}
