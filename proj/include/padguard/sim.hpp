#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "padguard/gbdt.hpp"
#include "padguard/geometry.hpp"
#include "padguard/messaging.hpp"
#include "padguard/mission.hpp"

namespace padguard {

// Equidistant fisheye looking straight up from the pad: image radius is
// focal_px_per_rad times the zenith angle.
struct FisheyeCameraModel {
  double image_size = 640.0;        // square, pixels
  double focal_px_per_rad = 160.0;
  double fov = 220.0 * std::numbers::pi / 180.0;  // radians, > pi to see near ground
  double mount_height = 0.0;        // meters above ground
  CameraPose pose;

  void validate() const {
    if (image_size <= 0.0) throw std::invalid_argument("image_size must be > 0");
    if (!(fov > std::numbers::pi) || fov > 1.35 * std::numbers::pi)
      throw std::invalid_argument("fov must be in (pi, 1.35*pi]");
    if (focal_px_per_rad * fov / 2.0 > image_size / 2.0)
      throw std::invalid_argument("image circle exceeds the frame");
  }
};

struct TimedWaypoint {
  double t = 0.0;
  double x = 0.0, y = 0.0;
};

struct Pedestrian {
  int id = 0;
  std::vector<TimedWaypoint> trajectory;  // piecewise-linear, clamped at the ends
  double height = 1.7;
  double radius = 0.25;

  WorldPoint2D position_at(double t) const {
    if (trajectory.empty()) return {0.0, 0.0};
    if (t <= trajectory.front().t) return {trajectory.front().x, trajectory.front().y};
    if (t >= trajectory.back().t) return {trajectory.back().x, trajectory.back().y};
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
      const TimedWaypoint& a = trajectory[i];
      const TimedWaypoint& b = trajectory[i + 1];
      if (t <= b.t) {
        const double u = b.t > a.t ? (t - a.t) / (b.t - a.t) : 1.0;
        return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
      }
    }
    return {trajectory.back().x, trajectory.back().y};
  }
};

struct UavState {
  Vec3 position;
  Vec3 velocity;
};

struct UavParams {
  Vec3 start{0.0, 0.0, 0.0};
  double gain = 1.5;    // proportional position response
  double v_max = 1.5;   // m/s
  double v_land = 0.5;  // m/s descent during the land command
};

struct NoiseModel {
  double pixel_sigma = 0.0;
  double miss_rate = 0.0;
  double false_positive_rate = 0.0;
};

struct Scenario {
  std::string id = "scenario";
  std::uint32_t seed = 0;
  double duration_s = 60.0;
  FisheyeCameraModel camera;
  std::vector<Pedestrian> pedestrians;
  MissionConfig mission;
  LandingParams landing;
  NoiseModel noise;
  double message_hz = 30.0;
  double control_hz = 20.0;
  bool use_truth_distance = false;  // ground-truth distances instead of the GBDT

  void validate() const {
    camera.validate();
    landing.validate();
    if (message_hz <= 0.0 || message_hz > static_cast<double>(kRateCapHz))
      throw std::invalid_argument("message_hz must be in (0, 30]");
    if (control_hz <= 0.0) throw std::invalid_argument("control_hz must be > 0");
    if (duration_s <= 0.0) throw std::invalid_argument("duration_s must be > 0");
  }
  UavParams uav;
};

inline double horizontal_distance(const WorldPoint2D& p, const CameraPose& cam) {
  return std::hypot(p.x - cam.d_x_cam, p.y - cam.d_y_cam);
}

/// Project a pedestrian cylinder through the fisheye model; returns the
/// axis-aligned box of the projected surface samples in normalized image
/// coordinates, or nullopt when no sample falls inside the field of view.
inline std::optional<BBoxFeatures> project_person(const FisheyeCameraModel& cam,
                                                  const WorldPoint2D& center, double height,
                                                  double radius) {
  constexpr int kRingSamples = 32;  // per cylinder rim, top and bottom
  const double cx_rel = center.x - cam.pose.d_x_cam;
  const double cy_rel = center.y - cam.pose.d_y_cam;
  // anchor the rim samples on the viewing azimuth so the sampled silhouette is
  // symmetric about the camera-to-person ray
  const double az0 = std::atan2(cy_rel, cx_rel);

  double min_xi = std::numeric_limits<double>::infinity(), max_xi = -min_xi;
  double min_yi = min_xi, max_yi = -min_xi;
  bool any = false;

  for (int ring = 0; ring < 2; ++ring) {
    const double z_world = ring == 0 ? 0.0 : height;
    const double z = z_world - cam.mount_height;
    for (int k = 0; k < kRingSamples; ++k) {
      const double a = az0 + 2.0 * std::numbers::pi * k / kRingSamples;
      const double wx = cx_rel + radius * std::cos(a);
      const double wy = cy_rel + radius * std::sin(a);
      const double horiz = std::hypot(wx, wy);
      const double theta_z = std::atan2(horiz, z);  // angle from the zenith axis
      if (theta_z > cam.fov / 2.0) continue;
      // world azimuth -> camera-frame azimuth (inverse of rotate_to_world)
      const CamPixPoint dir = rotate_to_world({wx, wy}, -cam.pose.yaw_offset);
      const double r_pix = cam.focal_px_per_rad * theta_z;
      const double phi = (horiz > 1e-12) ? std::atan2(dir.y, dir.x) : 0.0;
      const CamPixPoint cp{r_pix * std::cos(phi), r_pix * std::sin(phi)};
      const ImagePoint ip = campix_to_image(cp, {cam.image_size, cam.image_size});
      min_xi = std::min(min_xi, ip.x_image);
      max_xi = std::max(max_xi, ip.x_image);
      min_yi = std::min(min_yi, ip.y_image);
      max_yi = std::max(max_yi, ip.y_image);
      any = true;
    }
  }
  if (!any) return std::nullopt;

  // Box center from the projected cylinder axis: feet-center and head-center
  // both land exactly on the viewing ray, so the recovered direction matches
  // the person's azimuth. The midpoint of the sample extents drifts off that
  // ray tangentially at close range (the axis-aligned box of a curved
  // silhouette is not centered on its azimuth).
  const double horiz_c = std::hypot(cx_rel, cy_rel);
  double r_mid = 0.0;
  double phi_c = 0.0;
  if (horiz_c > 1e-12) {
    const double r_feet = cam.focal_px_per_rad * std::atan2(horiz_c, 0.0 - cam.mount_height);
    const double r_head = cam.focal_px_per_rad * std::atan2(horiz_c, height - cam.mount_height);
    r_mid = 0.5 * (r_feet + r_head);
    const CamPixPoint dir_c = rotate_to_world({cx_rel, cy_rel}, -cam.pose.yaw_offset);
    phi_c = std::atan2(dir_c.y, dir_c.x);
  }
  const ImagePoint box_center = campix_to_image(
      {r_mid * std::cos(phi_c), r_mid * std::sin(phi_c)}, {cam.image_size, cam.image_size});

  BBoxFeatures f;
  f.cx = box_center.x_image / cam.image_size;
  f.cy = box_center.y_image / cam.image_size;
  f.w = (max_xi - min_xi) / cam.image_size;
  f.h = (max_yi - min_yi) / cam.image_size;
  return f;
}

/// Synthesize one detection message at time t: project all pedestrians, apply
/// pixel noise, misses and false positives, then attach distances either from
/// ground truth or the trained model.
inline BoundingBoxesDist synth_detections(const Scenario& sc, double t, std::mt19937& rng,
                                          const GbdtModel* model) {
  BoundingBoxesDist msg;
  msg.stamp = t;
  std::normal_distribution<double> pix_noise(0.0, sc.noise.pixel_sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (const Pedestrian& p : sc.pedestrians) {
    const WorldPoint2D pos = p.position_at(t);
    auto box = project_person(sc.camera, pos, p.height, p.radius);
    const bool missed = sc.noise.miss_rate > 0.0 && unit(rng) < sc.noise.miss_rate;
    if (!box || missed) continue;
    if (sc.noise.pixel_sigma > 0.0) {
      box->cx += pix_noise(rng) / sc.camera.image_size;
      box->cy += pix_noise(rng) / sc.camera.image_size;
      box->w = std::max(1e-4, box->w + pix_noise(rng) / sc.camera.image_size);
      box->h = std::max(1e-4, box->h + pix_noise(rng) / sc.camera.image_size);
    }
    BoxDist b;
    b.cx = std::clamp(box->cx, 0.0, 1.0);
    b.cy = std::clamp(box->cy, 0.0, 1.0);
    b.w = std::clamp(box->w, 0.0, 1.0);
    b.h = std::clamp(box->h, 0.0, 1.0);
    b.confidence = 0.9;
    b.dist = sc.use_truth_distance || model == nullptr
                 ? horizontal_distance(pos, sc.camera.pose)
                 : predict(*model, {b.cx, b.cy, b.w, b.h});
    msg.boxes.push_back(b);
  }

  if (sc.noise.false_positive_rate > 0.0 && unit(rng) < sc.noise.false_positive_rate) {
    BoxDist fp;
    fp.cx = unit(rng);
    fp.cy = unit(rng);
    fp.w = 0.02 + 0.1 * unit(rng);
    fp.h = 0.02 + 0.1 * unit(rng);
    fp.confidence = 0.5;
    fp.dist = model ? predict(*model, {fp.cx, fp.cy, fp.w, fp.h}) : 5.0;
    msg.boxes.push_back(fp);
  }
  return msg;
}

/// First-order position response with speed clamp; the land command descends
/// at v_land until touchdown.
inline UavState step_uav(const UavState& state, const Setpoint& sp, double dt,
                         const UavParams& params) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
  UavState next = state;
  if (sp.land) {
    next.velocity = {0.0, 0.0, -params.v_land};
    next.position.z = std::max(0.0, state.position.z - params.v_land * dt);
    if (next.position.z == 0.0) next.velocity = {0.0, 0.0, 0.0};
    return next;
  }
  Vec3 v = (sp.position - state.position) * params.gain;
  const double n = v.norm();
  if (n > params.v_max) v = v * (params.v_max / n);
  next.velocity = v;
  next.position = state.position + v * dt;
  next.position.z = std::max(0.0, next.position.z);
  return next;
}

struct SimulationTrace {
  std::vector<std::string> lines;  // JSON-lines trace

  // summary mirrored from the trace for convenience
  bool touched_down = false;
  double touchdown_time = 0.0;
  WorldPoint2D touchdown{0.0, 0.0};
  int retreat_events = 0;
  bool emergency_landing = false;
  ChannelStats channel_stats;
  std::vector<WorldPoint2D> emergency_people;

  std::string to_string() const {
    std::string out;
    for (const std::string& l : lines) {
      out += l;
      out += '\n';
    }
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write trace: " + path);
    f << to_string();
  }
};

// Transport seam for the closed loop: in-process channel by default, UDP when
// requested.
struct Transport {
  std::function<bool(const BoundingBoxesDist&)> publish;
  std::function<std::vector<BoundingBoxesDist>()> poll;
  std::function<ChannelStats()> stats;
};

inline Transport make_inproc_transport(int rate_cap_hz = kRateCapHz) {
  auto channel = std::make_shared<Channel>(rate_cap_hz);
  auto sub = channel->subscribe();
  Transport t;
  t.publish = [channel](const BoundingBoxesDist& m) { return channel->publish(m); };
  t.poll = [sub] {
    std::vector<BoundingBoxesDist> out;
    while (auto m = sub->poll()) out.push_back(std::move(*m));
    return out;
  };
  t.stats = [channel] { return channel->stats(); };
  return t;
}

inline Transport make_udp_transport(std::uint16_t port, int rate_cap_hz = kRateCapHz) {
  auto sub = std::make_shared<UdpSubscriber>(port);
  auto pub = std::make_shared<UdpPublisher>(port, rate_cap_hz);
  Transport t;
  t.publish = [pub](const BoundingBoxesDist& m) { return pub->publish(m); };
  t.poll = [sub] { return sub->poll(); };
  t.stats = [pub] { return pub->stats(); };
  return t;
}

namespace detail {
inline nlohmann::ordered_json json_vec3(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x, v.y, v.z});
}
}  // namespace detail

nlohmann::ordered_json scenario_to_json(const Scenario& sc);

/// Deterministic lockstep loop: detector messages at message_hz, controller
/// and vehicle at control_hz, everything seeded from the scenario.
inline SimulationTrace run_scenario(const Scenario& sc, const GbdtModel* model = nullptr,
                                    const Transport* transport_in = nullptr) {
  sc.validate();
  SimulationTrace trace;
  trace.lines.push_back(stream_header());
  {
    nlohmann::ordered_json j;
    j["type"] = "scenario";
    j["config"] = scenario_to_json(sc);
    trace.lines.push_back(j.dump());
  }

  Transport transport = transport_in ? *transport_in : make_inproc_transport();
  std::mt19937 rng(sc.seed);
  MissionConfig mc = sc.mission;
  mc.camera = sc.camera.pose;
  mc.image_size = sc.camera.image_size;
  MissionController controller(mc);
  UavState uav{sc.uav.start, {}};

  const double dt = 1.0 / sc.control_hz;
  std::uint64_t next_msg = 0;
  std::uint64_t seq = 0;
  bool was_retreating = false;
  FlightMode last_mode = FlightMode::kTakeoff;

  const auto steps = static_cast<std::uint64_t>(std::ceil(sc.duration_s * sc.control_hz));
  for (std::uint64_t step = 0; step <= steps; ++step) {
    const double t = step * dt;

    // detector messages due up to t
    while (static_cast<double>(next_msg) / sc.message_hz <= t + 1e-12) {
      const double mt = static_cast<double>(next_msg) / sc.message_hz;
      BoundingBoxesDist msg = synth_detections(sc, mt, rng, model);
      msg.seq = seq++;
      transport.publish(msg);
      ++next_msg;

      nlohmann::ordered_json jm;
      jm["type"] = "msg";
      jm["t"] = mt;
      jm["data"] = nlohmann::ordered_json::parse(encode(msg));
      trace.lines.push_back(jm.dump());
      for (const Pedestrian& p : sc.pedestrians) {
        const WorldPoint2D pos = p.position_at(mt);
        nlohmann::ordered_json jp;
        jp["type"] = "ped";
        jp["t"] = mt;
        jp["id"] = p.id;
        jp["pos"] = nlohmann::ordered_json::array({pos.x, pos.y});
        trace.lines.push_back(jp.dump());
      }
    }

    // drain the channel into the controller
    for (const BoundingBoxesDist& m : transport.poll())
      controller.on_bbox_message(m, sc.landing);

    controller.mode_advance(uav.position);
    const Setpoint sp = controller.tick();

    const ControllerState& cs = controller.state();
    const bool retreating = cs.mode == FlightMode::kPrelanding && cs.emergency &&
                            !cs.emergency_landing;
    if (retreating && !was_retreating) ++trace.retreat_events;
    was_retreating = retreating;

    nlohmann::ordered_json js;
    js["type"] = "state";
    js["t"] = t;
    js["mode"] = to_string(cs.mode);
    js["emergency"] = cs.emergency;
    js["emergency_landing"] = cs.emergency_landing;
    js["danger_counter"] = cs.danger_counter;
    js["setpoint"] = sp.land ? nlohmann::ordered_json("LAND") : detail::json_vec3(sp.position);
    js["uav"] = detail::json_vec3(uav.position);
    trace.lines.push_back(js.dump());
    (void)last_mode;
    last_mode = cs.mode;

    uav = step_uav(uav, sp, dt, sc.uav);
    if (sp.land && uav.position.z == 0.0) {
      trace.touched_down = true;
      trace.touchdown_time = t + dt;
      trace.touchdown = {uav.position.x, uav.position.y};
      nlohmann::ordered_json jt;
      jt["type"] = "touchdown";
      jt["t"] = trace.touchdown_time;
      jt["pos"] = nlohmann::ordered_json::array({uav.position.x, uav.position.y});
      trace.lines.push_back(jt.dump());
      break;
    }
  }

  trace.emergency_landing = controller.state().emergency_landing;
  trace.emergency_people = controller.state().emergency_people;
  trace.channel_stats = transport.stats();
  {
    nlohmann::ordered_json je;
    je["type"] = "stats";
    je["published"] = trace.channel_stats.published;
    je["dropped"] = trace.channel_stats.dropped;
    je["retreat_events"] = trace.retreat_events;
    je["emergency_landing"] = trace.emergency_landing;
    je["selected_offset"] = nlohmann::ordered_json::array(
        {controller.state().emergency_offset.x, controller.state().emergency_offset.y});
    je["emergency_people"] = nlohmann::ordered_json::array();
    for (const WorldPoint2D& p : trace.emergency_people)
      je["emergency_people"].push_back(nlohmann::ordered_json::array({p.x, p.y}));
    trace.lines.push_back(je.dump());
  }
  return trace;
}

struct DatasetGenOptions {
  double min_distance = 0.3;  // meters
  double max_distance = 5.0;
  double min_height = 1.4;
  double max_height = 2.1;
  double person_radius = 0.25;
  double pixel_sigma = 0.0;
};

/// Random person placements projected through the camera model; targets are
/// ground-truth horizontal distances. Feeds the distance-estimator training.
inline Dataset generate_distance_dataset(const FisheyeCameraModel& cam, std::size_t n,
                                         std::uint32_t seed,
                                         const DatasetGenOptions& opt = {}) {
  cam.validate();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist_d(opt.min_distance, opt.max_distance);
  std::uniform_real_distribution<double> dist_az(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> dist_h(opt.min_height, opt.max_height);
  std::normal_distribution<double> pix(0.0, opt.pixel_sigma);

  Dataset data;
  data.reserve(n);
  while (data.size() < n) {
    const double d = dist_d(rng);
    const double az = dist_az(rng);
    const WorldPoint2D pos{cam.pose.d_x_cam + d * std::cos(az),
                           cam.pose.d_y_cam + d * std::sin(az)};
    auto box = project_person(cam, pos, dist_h(rng), opt.person_radius);
    if (!box) continue;
    if (opt.pixel_sigma > 0.0) {
      box->cx += pix(rng) / cam.image_size;
      box->cy += pix(rng) / cam.image_size;
      box->w = std::max(1e-4, box->w + pix(rng) / cam.image_size);
      box->h = std::max(1e-4, box->h + pix(rng) / cam.image_size);
    }
    data.push_back({*box, d});
  }
  return data;
}

// --- scenario (de)serialization -------------------------------------------

inline nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["id"] = sc.id;
  j["seed"] = sc.seed;
  j["duration_s"] = sc.duration_s;
  j["camera"] = {{"image_size", sc.camera.image_size},
                 {"focal_px_per_rad", sc.camera.focal_px_per_rad},
                 {"fov_deg", sc.camera.fov * 180.0 / std::numbers::pi},
                 {"mount_height", sc.camera.mount_height},
                 {"position", {sc.camera.pose.d_x_cam, sc.camera.pose.d_y_cam}},
                 {"yaw_deg", sc.camera.pose.yaw_offset * 180.0 / std::numbers::pi}};
  j["landing"] = {{"r_l", sc.landing.r_l},
                  {"r_s", sc.landing.r_s},
                  {"r_d", sc.landing.r_d},
                  {"alpha", sc.landing.alpha}};
  j["mission"] = {{"takeoff_position", {sc.mission.takeoff_position.x,
                                        sc.mission.takeoff_position.y,
                                        sc.mission.takeoff_position.z}},
                  {"prelanding_pos", {sc.mission.prelanding_pos.x, sc.mission.prelanding_pos.y,
                                      sc.mission.prelanding_pos.z}},
                  {"danger_threshold", sc.mission.danger_threshold},
                  {"retreat_climb", sc.mission.retreat_climb},
                  {"emergency_clear_after", sc.mission.emergency_clear_after}};
  j["mission"]["waypoints"] = nlohmann::ordered_json::array();
  for (const Vec3& w : sc.mission.mission_waypoints)
    j["mission"]["waypoints"].push_back({w.x, w.y, w.z});
  j["uav"] = {{"start", {sc.uav.start.x, sc.uav.start.y, sc.uav.start.z}},
              {"gain", sc.uav.gain},
              {"v_max", sc.uav.v_max},
              {"v_land", sc.uav.v_land}};
  j["noise"] = {{"pixel_sigma", sc.noise.pixel_sigma},
                {"miss_rate", sc.noise.miss_rate},
                {"false_positive_rate", sc.noise.false_positive_rate}};
  j["rates"] = {{"message_hz", sc.message_hz}, {"control_hz", sc.control_hz}};
  j["use_truth_distance"] = sc.use_truth_distance;
  j["pedestrians"] = nlohmann::ordered_json::array();
  for (const Pedestrian& p : sc.pedestrians) {
    nlohmann::ordered_json jp;
    jp["id"] = p.id;
    jp["height"] = p.height;
    jp["radius"] = p.radius;
    jp["trajectory"] = nlohmann::ordered_json::array();
    for (const TimedWaypoint& w : p.trajectory) jp["trajectory"].push_back({w.t, w.x, w.y});
    j["pedestrians"].push_back(std::move(jp));
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  sc.id = j.value("id", sc.id);
  sc.seed = j.value("seed", sc.seed);
  sc.duration_s = j.value("duration_s", sc.duration_s);
  if (j.contains("camera")) {
    const auto& c = j.at("camera");
    sc.camera.image_size = c.value("image_size", sc.camera.image_size);
    sc.camera.focal_px_per_rad = c.value("focal_px_per_rad", sc.camera.focal_px_per_rad);
    if (c.contains("fov_deg")) sc.camera.fov = c.at("fov_deg").get<double>() * std::numbers::pi / 180.0;
    sc.camera.mount_height = c.value("mount_height", sc.camera.mount_height);
    if (c.contains("position")) {
      sc.camera.pose.d_x_cam = c.at("position").at(0).get<double>();
      sc.camera.pose.d_y_cam = c.at("position").at(1).get<double>();
    }
    if (c.contains("yaw_deg"))
      sc.camera.pose.yaw_offset = c.at("yaw_deg").get<double>() * std::numbers::pi / 180.0;
  }
  if (j.contains("landing")) {
    const auto& l = j.at("landing");
    sc.landing.r_l = l.value("r_l", sc.landing.r_l);
    sc.landing.r_s = l.value("r_s", sc.landing.r_s);
    sc.landing.r_d = l.value("r_d", sc.landing.r_d);
    sc.landing.alpha = l.value("alpha", sc.landing.alpha);
  }
  if (j.contains("mission")) {
    const auto& m = j.at("mission");
    auto vec3 = [](const nlohmann::json& a) {
      return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    };
    if (m.contains("takeoff_position")) sc.mission.takeoff_position = vec3(m.at("takeoff_position"));
    if (m.contains("prelanding_pos")) sc.mission.prelanding_pos = vec3(m.at("prelanding_pos"));
    sc.mission.danger_threshold = m.value("danger_threshold", sc.mission.danger_threshold);
    sc.mission.retreat_climb = m.value("retreat_climb", sc.mission.retreat_climb);
    sc.mission.emergency_clear_after =
        m.value("emergency_clear_after", sc.mission.emergency_clear_after);
    if (m.contains("waypoints"))
      for (const auto& w : m.at("waypoints")) sc.mission.mission_waypoints.push_back(vec3(w));
  }
  if (j.contains("uav")) {
    const auto& u = j.at("uav");
    if (u.contains("start"))
      sc.uav.start = {u.at("start").at(0).get<double>(), u.at("start").at(1).get<double>(),
                      u.at("start").at(2).get<double>()};
    sc.uav.gain = u.value("gain", sc.uav.gain);
    sc.uav.v_max = u.value("v_max", sc.uav.v_max);
    sc.uav.v_land = u.value("v_land", sc.uav.v_land);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    sc.noise.pixel_sigma = n.value("pixel_sigma", 0.0);
    sc.noise.miss_rate = n.value("miss_rate", 0.0);
    sc.noise.false_positive_rate = n.value("false_positive_rate", 0.0);
  }
  if (j.contains("rates")) {
    sc.message_hz = j.at("rates").value("message_hz", sc.message_hz);
    sc.control_hz = j.at("rates").value("control_hz", sc.control_hz);
  }
  sc.use_truth_distance = j.value("use_truth_distance", sc.use_truth_distance);
  if (j.contains("pedestrians")) {
    for (const auto& jp : j.at("pedestrians")) {
      Pedestrian p;
      p.id = jp.value("id", 0);
      p.height = jp.value("height", p.height);
      p.radius = jp.value("radius", p.radius);
      for (const auto& w : jp.at("trajectory"))
        p.trajectory.push_back(
            {w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>()});
      sc.pedestrians.push_back(std::move(p));
    }
  }
  // the controller localizes boxes with the scenario camera
  sc.mission.camera = sc.camera.pose;
  sc.mission.image_size = sc.camera.image_size;
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("scenario " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace padguard
