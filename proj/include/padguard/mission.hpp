#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "padguard/geometry.hpp"
#include "padguard/landing.hpp"
#include "padguard/messaging.hpp"

namespace padguard {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

enum class FlightMode { kTakeoff, kMission, kPrelanding, kLanding };

inline const char* to_string(FlightMode m) {
  switch (m) {
    case FlightMode::kTakeoff: return "TAKEOFF";
    case FlightMode::kMission: return "MISSION";
    case FlightMode::kPrelanding: return "PRELANDING";
    case FlightMode::kLanding: return "LANDING";
  }
  return "?";
}

struct Setpoint {
  Vec3 position;
  bool land = false;  // land command marker; position ignored when set
};

struct MissionConfig {
  Vec3 takeoff_position{0.0, 0.0, 2.5};
  std::vector<Vec3> mission_waypoints;
  Vec3 prelanding_pos{0.0, 0.0, 1.5};

  int danger_threshold = 150;       // in-range messages before emergency landing
  double retreat_climb = 2.0;       // meters added to prelanding altitude while hovering
  double takeoff_accept_radius = 0.1;
  double waypoint_accept_radius = 0.15;
  double landing_accept_radius = 0.15;
  // consecutive in-range-free messages before the emergency flag clears;
  // 0 keeps the flag latched forever (literal mode)
  int emergency_clear_after = 30;

  CameraPose camera;        // for localizing boxes
  double image_size = 640;  // square frame, pixels
};

struct ControllerState {
  FlightMode mode = FlightMode::kTakeoff;
  bool emergency = false;
  bool emergency_landing = false;
  int danger_counter = 0;
  int clear_streak = 0;
  std::size_t mission_index = 0;
  Vec3 prelanding_pos;
  Vec3 retreat_pos;
  std::uint64_t malformed_dropped = 0;

  // snapshot backing the one-shot prelanding shift
  std::vector<WorldPoint2D> emergency_people;
  WorldPoint2D emergency_offset{0.0, 0.0};
};

class MissionController {
 public:
  explicit MissionController(MissionConfig cfg) : cfg_(std::move(cfg)) {
    state_.prelanding_pos = cfg_.prelanding_pos;
    state_.retreat_pos = cfg_.prelanding_pos + Vec3{0.0, 0.0, cfg_.retreat_climb};
  }

  const MissionConfig& config() const { return cfg_; }
  const ControllerState& state() const { return state_; }

  void force_emergency() { state_.emergency = true; }
  void note_malformed() { ++state_.malformed_dropped; }

  WorldPoint2D localize_box(const BoxDist& box) const {
    const ImagePoint ip{box.cx * cfg_.image_size, box.cy * cfg_.image_size};
    const ImageDims dims{cfg_.image_size, cfg_.image_size};
    return localize_person(image_to_campix(ip, dims), box.dist, cfg_.camera);
  }

  void on_bbox_message(const BoundingBoxesDist& msg, const LandingParams& params) {
    bool in_range = false;
    for (const BoxDist& box : msg.boxes) {
      if (box.dist <= params.r_s) {
        state_.emergency = true;
        ++state_.danger_counter;
        in_range = true;
        break;  // one increment per message
      }
    }

    if (in_range) {
      state_.clear_streak = 0;
    } else if (cfg_.emergency_clear_after > 0 && state_.emergency && !state_.emergency_landing) {
      if (++state_.clear_streak >= cfg_.emergency_clear_after) {
        state_.emergency = false;
        state_.clear_streak = 0;
      }
    }

    if (state_.danger_counter >= cfg_.danger_threshold && !state_.emergency_landing) {
      LandingProblem pb;
      pb.camera = {cfg_.camera.d_x_cam, cfg_.camera.d_y_cam};
      pb.params = params;
      for (const BoxDist& box : msg.boxes)
        if (box.dist <= params.r_s) pb.people.push_back(localize_box(box));
      const LandingSolution sol = solve_landing(pb);
      state_.prelanding_pos.x += sol.offset.x;
      state_.prelanding_pos.y += sol.offset.y;
      state_.emergency_people = std::move(pb.people);
      state_.emergency_offset = sol.offset;
      state_.emergency_landing = true;
    }
  }

  Setpoint tick() const {
    switch (state_.mode) {
      case FlightMode::kTakeoff:
        return {cfg_.takeoff_position, false};
      case FlightMode::kMission:
        if (state_.mission_index < cfg_.mission_waypoints.size())
          return {cfg_.mission_waypoints[state_.mission_index], false};
        return {state_.prelanding_pos, false};
      case FlightMode::kPrelanding:
        if (state_.emergency && !state_.emergency_landing)
          return {state_.retreat_pos, false};  // hover and wait
        return {state_.prelanding_pos, false};
      case FlightMode::kLanding:
        return {{}, true};
    }
    return {{}, true};
  }

  void mode_advance(const Vec3& vehicle_position) {
    switch (state_.mode) {
      case FlightMode::kTakeoff:
        if ((vehicle_position - cfg_.takeoff_position).norm() <= cfg_.takeoff_accept_radius)
          state_.mode = FlightMode::kMission;
        break;
      case FlightMode::kMission:
        while (state_.mission_index < cfg_.mission_waypoints.size() &&
               (vehicle_position - cfg_.mission_waypoints[state_.mission_index]).norm() <=
                   cfg_.waypoint_accept_radius)
          ++state_.mission_index;
        if (state_.mission_index >= cfg_.mission_waypoints.size())
          state_.mode = FlightMode::kPrelanding;
        break;
      case FlightMode::kPrelanding:
        if (state_.emergency && !state_.emergency_landing) break;  // hover lock
        if ((vehicle_position - state_.prelanding_pos).norm() <= cfg_.landing_accept_radius)
          state_.mode = FlightMode::kLanding;
        break;
      case FlightMode::kLanding:
        break;
    }
  }

 private:
  MissionConfig cfg_;
  ControllerState state_;
};

}  // namespace padguard
