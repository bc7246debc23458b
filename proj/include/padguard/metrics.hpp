#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "padguard/geometry.hpp"
#include "padguard/sim.hpp"

namespace padguard {

struct TimedPoint2D {
  double t = 0.0;
  double x = 0.0, y = 0.0;
};

struct LocalizationEval {
  double ape = 0.0;     // mean Euclidean error, meters
  double cossim = 0.0;  // mean cosine similarity of camera-relative directions
  std::size_t matched = 0;
  std::size_t omitted = 0;
};

/// Nearest-timestamp pairing within the window; frames lacking a counterpart
/// on either side are omitted from the metrics.
inline LocalizationEval eval_localization(const std::vector<TimedPoint2D>& predicted,
                                          const std::vector<TimedPoint2D>& truth,
                                          const WorldPoint2D& camera,
                                          double window_s = 0.05) {
  std::vector<TimedPoint2D> tr = truth;
  std::sort(tr.begin(), tr.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  LocalizationEval ev;
  double err_sum = 0.0, cos_sum = 0.0;
  std::vector<bool> truth_used(tr.size(), false);

  for (const TimedPoint2D& p : predicted) {
    // nearest truth frame by timestamp
    auto it = std::lower_bound(tr.begin(), tr.end(), p.t, [](const TimedPoint2D& a, double t) {
      return a.t < t;
    });
    std::size_t best = tr.size();
    double best_dt = window_s + 1.0;
    for (auto cand : {it, it == tr.begin() ? tr.end() : std::prev(it)}) {
      if (cand == tr.end()) continue;
      const double dt = std::abs(cand->t - p.t);
      if (dt < best_dt) {
        best_dt = dt;
        best = static_cast<std::size_t>(cand - tr.begin());
      }
    }
    if (best >= tr.size() || best_dt > window_s) {
      ++ev.omitted;
      continue;
    }
    truth_used[best] = true;
    const TimedPoint2D& q = tr[best];
    err_sum += std::hypot(p.x - q.x, p.y - q.y);
    const double ax = p.x - camera.x, ay = p.y - camera.y;
    const double bx = q.x - camera.x, by = q.y - camera.y;
    const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
    cos_sum += (na > 1e-12 && nb > 1e-12) ? (ax * bx + ay * by) / (na * nb) : 1.0;
    ++ev.matched;
  }
  for (bool used : truth_used)
    if (!used) ++ev.omitted;

  if (ev.matched == 0) throw std::runtime_error("no matched frames");
  ev.ape = err_sum / static_cast<double>(ev.matched);
  ev.cossim = cos_sum / static_cast<double>(ev.matched);
  return ev;
}

struct RunReport {
  std::string scenario_id;
  bool touched_down = false;
  WorldPoint2D touchdown{0.0, 0.0};
  double min_person_distance_at_touchdown = -1.0;  // -1: no pedestrians
  int retreat_events = 0;
  bool emergency_landing = false;
  bool has_localization = false;
  LocalizationEval localization;
  ChannelStats channel_stats;
  WorldPoint2D selected_offset{0.0, 0.0};

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["scenario_id"] = scenario_id;
    j["touched_down"] = touched_down;
    j["touchdown"] = {touchdown.x, touchdown.y};
    j["min_person_distance_at_touchdown"] = min_person_distance_at_touchdown;
    j["retreat_events"] = retreat_events;
    j["emergency_landing"] = emergency_landing;
    j["selected_offset"] = {selected_offset.x, selected_offset.y};
    if (has_localization) {
      j["localization"] = {{"ape", localization.ape},
                           {"cossim", localization.cossim},
                           {"matched", localization.matched},
                           {"omitted", localization.omitted}};
    }
    j["channel"] = {{"published", channel_stats.published}, {"dropped", channel_stats.dropped}};
    return j;
  }
};

/// Rebuild the report purely from a stored trace; re-running it on the same
/// trace reproduces the same numbers.
inline RunReport report_from_trace(const std::vector<std::string>& lines) {
  RunReport rep;
  Scenario sc;
  bool have_scenario = false;
  double touchdown_t = 0.0;
  std::vector<TimedPoint2D> predicted, truth;

  for (const std::string& line : lines) {
    if (line.empty() || line[0] != '{') continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (!j.contains("type")) continue;
    const std::string type = j.at("type").get<std::string>();
    if (type == "scenario") {
      sc = scenario_from_json(j.at("config"));
      rep.scenario_id = sc.id;
      have_scenario = true;
    } else if (type == "msg" && have_scenario) {
      const double t = j.at("t").get<double>();
      const BoundingBoxesDist msg = decode(j.at("data").dump());
      const ImageDims dims{sc.camera.image_size, sc.camera.image_size};
      for (const BoxDist& b : msg.boxes) {
        const ImagePoint ip{b.cx * sc.camera.image_size, b.cy * sc.camera.image_size};
        const WorldPoint2D w = localize_person(image_to_campix(ip, dims), b.dist, sc.camera.pose);
        predicted.push_back({t, w.x, w.y});
      }
    } else if (type == "ped") {
      truth.push_back({j.at("t").get<double>(), j.at("pos").at(0).get<double>(),
                       j.at("pos").at(1).get<double>()});
    } else if (type == "touchdown") {
      rep.touched_down = true;
      touchdown_t = j.at("t").get<double>();
      rep.touchdown = {j.at("pos").at(0).get<double>(), j.at("pos").at(1).get<double>()};
    } else if (type == "stats") {
      rep.channel_stats.published = j.at("published").get<std::uint64_t>();
      rep.channel_stats.dropped = j.at("dropped").get<std::uint64_t>();
      rep.retreat_events = j.at("retreat_events").get<int>();
      rep.emergency_landing = j.at("emergency_landing").get<bool>();
      if (j.contains("selected_offset"))
        rep.selected_offset = {j.at("selected_offset").at(0).get<double>(),
                               j.at("selected_offset").at(1).get<double>()};
    }
  }

  if (have_scenario && rep.touched_down && !sc.pedestrians.empty()) {
    double dmin = std::numeric_limits<double>::infinity();
    for (const Pedestrian& p : sc.pedestrians) {
      const WorldPoint2D pos = p.position_at(touchdown_t);
      dmin = std::min(dmin, std::hypot(pos.x - rep.touchdown.x, pos.y - rep.touchdown.y));
    }
    rep.min_person_distance_at_touchdown = dmin;
  }
  if (!predicted.empty() && !truth.empty()) {
    rep.localization =
        eval_localization(predicted, truth, {sc.camera.pose.d_x_cam, sc.camera.pose.d_y_cam});
    rep.has_localization = true;
  }
  return rep;
}

inline std::vector<std::string> load_trace(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trace: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  return lines;
}

}  // namespace padguard
