#include "padguard/mission.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace padguard;

namespace {

MissionConfig small_config() {
  MissionConfig cfg;
  cfg.takeoff_position = {0, 0, 2.5};
  cfg.prelanding_pos = {0, 0, 1.5};
  cfg.danger_threshold = 5;
  cfg.emergency_clear_after = 0;  // literal mode unless a test opts in
  return cfg;
}

BoundingBoxesDist msg_with_dist(double dist) {
  BoundingBoxesDist m;
  m.boxes.push_back({0.5, 0.2, 0.05, 0.1, 0.9, dist});
  return m;
}

const LandingParams kParams{1.0, 3.0, 0.5, 0.0};

}  // namespace

TEST(OnBboxMessage, InRangeBoxSetsEmergencyAndIncrementsOnce) {
  MissionController c(small_config());
  BoundingBoxesDist m = msg_with_dist(2.9);
  m.boxes.push_back({0.4, 0.4, 0.05, 0.1, 0.9, 1.0});  // second in-range box, same message
  c.on_bbox_message(m, kParams);
  EXPECT_TRUE(c.state().emergency);
  EXPECT_EQ(c.state().danger_counter, 1);
}

TEST(OnBboxMessage, OutOfRangeBoxesLeaveStateUnchanged) {
  MissionController c(small_config());
  c.on_bbox_message(msg_with_dist(3.5), kParams);
  EXPECT_FALSE(c.state().emergency);
  EXPECT_EQ(c.state().danger_counter, 0);
}

TEST(OnBboxMessage, ThresholdTriggersSingleShift) {
  MissionController c(small_config());
  const Vec3 nominal = c.state().prelanding_pos;
  BoundingBoxesDist m = msg_with_dist(2.0);
  m.boxes.push_back({0.3, 0.6, 0.05, 0.1, 0.9, 2.5});
  for (int i = 0; i < 5; ++i) c.on_bbox_message(m, kParams);

  ASSERT_TRUE(c.state().emergency_landing);
  EXPECT_EQ(c.state().emergency_people.size(), 2u);
  const Vec3 shifted = c.state().prelanding_pos;
  const double shift = std::hypot(shifted.x - nominal.x, shifted.y - nominal.y);
  EXPECT_GT(shift, 0.0);
  EXPECT_LE(shift, kParams.r_l + 1e-6);

  // latched: further messages do not re-shift
  c.on_bbox_message(m, kParams);
  EXPECT_DOUBLE_EQ(c.state().prelanding_pos.x, shifted.x);
  EXPECT_DOUBLE_EQ(c.state().prelanding_pos.y, shifted.y);
}

TEST(OnBboxMessage, ShiftedPointRespectsConstraintsOfSnapshot) {
  MissionController c(small_config());
  BoundingBoxesDist m = msg_with_dist(1.2);
  for (int i = 0; i < 5; ++i) c.on_bbox_message(m, kParams);
  ASSERT_TRUE(c.state().emergency_landing);
  for (const WorldPoint2D& p : c.state().emergency_people) {
    const double d = std::hypot(c.state().prelanding_pos.x - p.x,
                                c.state().prelanding_pos.y - p.y);
    EXPECT_GE(d, kParams.r_d - 1e-6);
  }
}

TEST(OnBboxMessage, LiteralModeNeverClearsEmergency) {
  MissionController c(small_config());
  c.on_bbox_message(msg_with_dist(2.0), kParams);
  ASSERT_TRUE(c.state().emergency);
  for (int i = 0; i < 200; ++i) c.on_bbox_message({}, kParams);
  EXPECT_TRUE(c.state().emergency);
}

TEST(OnBboxMessage, DefaultModeClearsAfterQuietStreak) {
  MissionConfig cfg = small_config();
  cfg.emergency_clear_after = 30;
  MissionController c(cfg);
  c.on_bbox_message(msg_with_dist(2.0), kParams);
  ASSERT_TRUE(c.state().emergency);
  for (int i = 0; i < 29; ++i) c.on_bbox_message({}, kParams);
  EXPECT_TRUE(c.state().emergency);
  c.on_bbox_message({}, kParams);
  EXPECT_FALSE(c.state().emergency);

  // an in-range box resets the quiet streak
  c.on_bbox_message(msg_with_dist(2.0), kParams);
  for (int i = 0; i < 29; ++i) c.on_bbox_message({}, kParams);
  c.on_bbox_message(msg_with_dist(2.0), kParams);
  for (int i = 0; i < 29; ++i) c.on_bbox_message({}, kParams);
  EXPECT_TRUE(c.state().emergency);
}

TEST(OnBboxMessage, DangerCounterNonDecreasingInLiteralMode) {
  MissionController c(small_config());
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.5, 6.0);
  int prev = 0;
  for (int i = 0; i < 100; ++i) {
    c.on_bbox_message(msg_with_dist(d(rng)), kParams);
    EXPECT_GE(c.state().danger_counter, prev);
    prev = c.state().danger_counter;
  }
}

TEST(Tick, PrelandingRetreatsDuringEmergencyHover) {
  MissionConfig cfg = small_config();
  MissionController c(cfg);
  // drive to prelanding
  c.mode_advance(cfg.takeoff_position);
  c.mode_advance(cfg.takeoff_position);  // no waypoints -> straight to prelanding
  ASSERT_EQ(c.state().mode, FlightMode::kPrelanding);

  c.on_bbox_message(msg_with_dist(2.0), kParams);
  const Setpoint hover = c.tick();
  EXPECT_FALSE(hover.land);
  EXPECT_DOUBLE_EQ(hover.position.z, cfg.prelanding_pos.z + cfg.retreat_climb);
}

TEST(Tick, PrelandingWithoutEmergencyGoesToPad) {
  MissionConfig cfg = small_config();
  MissionController c(cfg);
  c.mode_advance(cfg.takeoff_position);
  c.mode_advance(cfg.takeoff_position);
  const Setpoint sp = c.tick();
  EXPECT_FALSE(sp.land);
  EXPECT_DOUBLE_EQ(sp.position.z, cfg.prelanding_pos.z);
}

TEST(Tick, EverySetpointBeforeLandingIsPositional) {
  MissionConfig cfg = small_config();
  cfg.mission_waypoints = {{1, 0, 2.5}, {1, 1, 2.5}};
  MissionController c(cfg);
  Vec3 pos = cfg.takeoff_position;
  for (int i = 0; i < 50 && c.state().mode != FlightMode::kLanding; ++i) {
    const Setpoint sp = c.tick();
    EXPECT_FALSE(sp.land);
    pos = sp.position;  // teleport to the setpoint
    c.mode_advance(pos);
  }
  EXPECT_EQ(c.state().mode, FlightMode::kLanding);
  EXPECT_TRUE(c.tick().land);
}

TEST(ModeAdvance, TakeoffToMissionWithinAcceptRadius) {
  MissionController c(small_config());
  c.mode_advance({0, 0, 2.45});
  EXPECT_EQ(c.state().mode, FlightMode::kMission);
}

TEST(ModeAdvance, MissionSweepsWaypoints) {
  MissionConfig cfg = small_config();
  cfg.mission_waypoints = {{1, 0, 2.5}, {2, 0, 2.5}};
  MissionController c(cfg);
  c.mode_advance(cfg.takeoff_position);
  ASSERT_EQ(c.state().mode, FlightMode::kMission);
  c.mode_advance({1, 0, 2.5});
  EXPECT_EQ(c.state().mode, FlightMode::kMission);
  c.mode_advance({2, 0, 2.5});
  EXPECT_EQ(c.state().mode, FlightMode::kPrelanding);
}

TEST(ModeAdvance, HoverLockBlocksLanding) {
  MissionConfig cfg = small_config();
  MissionController c(cfg);
  c.mode_advance(cfg.takeoff_position);
  c.mode_advance(cfg.takeoff_position);
  ASSERT_EQ(c.state().mode, FlightMode::kPrelanding);
  c.on_bbox_message(msg_with_dist(2.0), kParams);
  for (int i = 0; i < 100; ++i) c.mode_advance(cfg.prelanding_pos);
  EXPECT_EQ(c.state().mode, FlightMode::kPrelanding);
}

TEST(ModeAdvance, EmergencyLandingUnlocksAtShiftedPad) {
  MissionConfig cfg = small_config();
  MissionController c(cfg);
  c.mode_advance(cfg.takeoff_position);
  c.mode_advance(cfg.takeoff_position);
  BoundingBoxesDist m = msg_with_dist(2.0);
  for (int i = 0; i < 5; ++i) c.on_bbox_message(m, kParams);
  ASSERT_TRUE(c.state().emergency_landing);
  c.mode_advance(c.state().prelanding_pos);
  EXPECT_EQ(c.state().mode, FlightMode::kLanding);
}

// property: LANDING is never entered while emergency holds without the
// emergency-landing latch
TEST(SafetyLatch, RandomizedMessageStream) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(0.5, 6.0);
  std::bernoulli_distribution has_box(0.7);
  for (int trial = 0; trial < 20; ++trial) {
    MissionConfig cfg = small_config();
    cfg.danger_threshold = 10;
    MissionController c(cfg);
    Vec3 pos = cfg.takeoff_position;
    FlightMode prev = c.state().mode;
    for (int step = 0; step < 300; ++step) {
      if (has_box(rng)) c.on_bbox_message(msg_with_dist(d(rng)), kParams);
      c.mode_advance(pos);
      pos = c.tick().land ? pos : c.tick().position;
      const ControllerState& s = c.state();
      if (s.mode == FlightMode::kLanding && prev != FlightMode::kLanding)
        EXPECT_TRUE(!s.emergency || s.emergency_landing);
      prev = s.mode;
    }
  }
}

TEST(Diagnostics, MalformedCounter) {
  MissionController c(small_config());
  c.note_malformed();
  c.note_malformed();
  EXPECT_EQ(c.state().malformed_dropped, 2u);
}
