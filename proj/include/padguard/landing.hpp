#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "padguard/geometry.hpp"

namespace padguard {

struct LandingParams {
  double r_l = 1.0;   // search-zone radius, meters
  double r_s = 3.0;   // scan-zone radius, meters
  double r_d = 0.5;   // danger-zone radius around each person, meters
  double alpha = 0.0; // inverse-distance weighting exponent

  void validate() const {
    if (!(r_l > 0.0) || r_l > r_s) throw std::invalid_argument("require 0 < r_l <= r_s");
    if (r_d < 0.0) throw std::invalid_argument("require r_d >= 0");
    if (alpha < 0.0) throw std::invalid_argument("require alpha >= 0");
  }
};

struct LandingProblem {
  std::vector<WorldPoint2D> people;  // world frame
  WorldPoint2D camera{0.0, 0.0};
  LandingParams params;
};

struct LandingSolution {
  WorldPoint2D offset{0.0, 0.0};  // relative to the camera/hover position
  double objective = 0.0;
  bool feasible = false;
  bool fallback_used = false;
};

namespace detail {

inline constexpr double kWeightEps = 0.05;    // meters, guards the 1/d^alpha weight
inline constexpr double kConstraintTol = 1e-6;

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

// Camera-relative view of the problem: people offsets and weights.
struct RelProblem {
  std::vector<Vec2> people;
  std::vector<double> weights;
  double r_l = 0.0;
  double r_d = 0.0;

  double objective(Vec2 o) const {
    double s = 0.0;
    for (std::size_t i = 0; i < people.size(); ++i) s += weights[i] * (o - people[i]).norm();
    return s;
  }

  bool feasible(Vec2 o, double tol = kConstraintTol) const {
    if (o.norm() > r_l + tol) return false;
    for (const Vec2& p : people)
      if ((o - p).norm() < r_d - tol) return false;
    return true;
  }
};

inline RelProblem make_rel(const LandingProblem& pb) {
  pb.params.validate();
  RelProblem rel;
  rel.r_l = pb.params.r_l;
  rel.r_d = pb.params.r_d;
  rel.people.reserve(pb.people.size());
  rel.weights.reserve(pb.people.size());
  for (const WorldPoint2D& p : pb.people) {
    Vec2 q{p.x - pb.camera.x, p.y - pb.camera.y};
    rel.people.push_back(q);
    rel.weights.push_back(1.0 / std::pow(std::max(q.norm(), kWeightEps), pb.params.alpha));
  }
  return rel;
}

// Deterministic preference among near-equal maxima: smallest polar angle in
// [0, 2pi), then smallest radius.
struct BestTracker {
  double obj = -std::numeric_limits<double>::infinity();
  Vec2 point{0.0, 0.0};
  bool any = false;

  static double polar_angle(Vec2 p) {
    if (p.norm() == 0.0) return 0.0;
    double a = std::atan2(p.y, p.x);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
  }

  void offer(Vec2 p, double o) {
    const double tie = 1e-9 * std::max(1.0, std::abs(obj));
    if (!any || o > obj + tie) {
      obj = o;
      point = p;
      any = true;
      return;
    }
    if (o >= obj - tie) {
      const double a_new = polar_angle(p), a_old = polar_angle(point);
      if (a_new < a_old - 1e-12 ||
          (std::abs(a_new - a_old) <= 1e-12 && p.norm() < point.norm() - 1e-12)) {
        obj = std::max(obj, o);
        point = p;
      }
    }
  }
};

// Push a point into the feasible set: clamp to the search disc, then step out
// of violated danger discs. Returns nullopt if it fails to settle.
inline std::optional<Vec2> project_feasible(const RelProblem& rel, Vec2 o) {
  for (int pass = 0; pass < 16; ++pass) {
    if (o.norm() > rel.r_l) o = o * (rel.r_l / o.norm());
    bool moved = false;
    for (const Vec2& p : rel.people) {
      Vec2 d = o - p;
      double n = d.norm();
      if (n < rel.r_d) {
        if (n < 1e-12) {
          // person exactly under the point: push radially away from center
          double pn = p.norm();
          d = pn > 1e-12 ? p * (1.0 / pn) : Vec2{1.0, 0.0};
          n = 1.0;
        }
        o = p + d * (rel.r_d / n);
        moved = true;
      }
    }
    if (!moved && o.norm() <= rel.r_l + kConstraintTol) return o;
    if (!moved) o = o * (rel.r_l / o.norm());
  }
  return rel.feasible(o) ? std::optional<Vec2>(o) : std::nullopt;
}

// Local projected-gradient ascent from one start.
inline std::optional<Vec2> ascend(const RelProblem& rel, Vec2 start) {
  auto proj = project_feasible(rel, start);
  if (!proj) return std::nullopt;
  Vec2 o = *proj;
  double f = rel.objective(o);
  double step = rel.r_l / 4.0;
  while (step > 1e-10) {
    Vec2 g{0.0, 0.0};
    for (std::size_t i = 0; i < rel.people.size(); ++i) {
      Vec2 d = o - rel.people[i];
      double n = d.norm();
      if (n > 1e-12) g = g + d * (rel.weights[i] / n);
    }
    double gn = g.norm();
    if (gn < 1e-14) break;
    auto cand = project_feasible(rel, o + g * (step / gn));
    if (cand) {
      double fc = rel.objective(*cand);
      if (fc > f + 1e-15) {
        o = *cand;
        f = fc;
        continue;
      }
    }
    step *= 0.5;
  }
  return o;
}

// 1-D refinement along a circle arc around the best sampled angle. Infeasible
// angles score -inf; the window is small enough to be unimodal in practice.
template <typename F>
inline void refine_on_circle(const RelProblem& rel, Vec2 center, double radius, double theta0,
                             double half_width, F&& point_at, BestTracker& best) {
  auto value = [&](double th) {
    Vec2 o = point_at(center, radius, th);
    return rel.feasible(o) ? rel.objective(o) : -std::numeric_limits<double>::infinity();
  };
  double lo = theta0 - half_width, hi = theta0 + half_width;
  for (int it = 0; it < 80; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (value(m1) < value(m2))
      lo = m1;
    else
      hi = m2;
  }
  double th = 0.5 * (lo + hi);
  Vec2 o = point_at(center, radius, th);
  if (rel.feasible(o)) best.offer(o, rel.objective(o));
}

inline Vec2 circle_point(Vec2 c, double r, double th) {
  return {c.x + r * std::cos(th), c.y + r * std::sin(th)};
}

// The objective is a weighted sum of distances (convex), so its maximum over
// the feasible region lies on the region boundary: arcs of the search circle
// and of the danger circles. Sweep those arcs densely and refine locally.
inline void sweep_boundaries(const RelProblem& rel, BestTracker& best) {
  constexpr int kSamples = 2048;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<std::pair<Vec2, double>> circles;  // center, radius
  circles.push_back({{0.0, 0.0}, rel.r_l});
  for (const Vec2& p : rel.people) circles.push_back({p, rel.r_d});

  for (const auto& [c, r] : circles) {
    if (r <= 0.0) {
      if (rel.feasible(c)) best.offer(c, rel.objective(c));
      continue;
    }
    std::vector<double> vals(kSamples, -std::numeric_limits<double>::infinity());
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSamples; ++k) {
      double th = two_pi * k / kSamples;
      Vec2 o = circle_point(c, r, th);
      if (!rel.feasible(o)) continue;
      vals[k] = rel.objective(o);
      best.offer(o, vals[k]);
      best_val = std::max(best_val, vals[k]);
    }
    if (!std::isfinite(best_val)) continue;
    // Refine every near-best local maximum so symmetric optima all reach full
    // precision before tie-breaking.
    const double keep = best_val - 1e-4 * std::max(1.0, std::abs(best_val));
    for (int k = 0; k < kSamples; ++k) {
      if (vals[k] < keep) continue;
      double prev = vals[(k + kSamples - 1) % kSamples];
      double next = vals[(k + 1) % kSamples];
      if (vals[k] >= prev && vals[k] >= next)
        refine_on_circle(rel, c, r, two_pi * k / kSamples, two_pi / kSamples, circle_point, best);
    }
  }
}

// Max-min-distance fallback over a grid when danger zones cover the whole
// search disc.
inline LandingSolution fallback_maxmin(const RelProblem& rel, double grid_step = 0.02) {
  BestTracker best;
  const int n = static_cast<int>(std::floor(rel.r_l / grid_step + 1e-9));
  for (int iy = -n; iy <= n; ++iy) {
    for (int ix = -n; ix <= n; ++ix) {
      Vec2 o{ix * grid_step, iy * grid_step};
      if (o.norm() > rel.r_l + 1e-12) continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (const Vec2& p : rel.people) dmin = std::min(dmin, (o - p).norm());
      best.offer(o, dmin);
    }
  }
  LandingSolution sol;
  sol.offset = {best.point.x, best.point.y};
  sol.objective = rel.objective(best.point);
  sol.feasible = false;
  sol.fallback_used = true;
  return sol;
}

}  // namespace detail

inline double landing_objective(const WorldPoint2D& offset, const LandingProblem& pb) {
  const detail::RelProblem rel = detail::make_rel(pb);
  return rel.objective({offset.x, offset.y});
}

/// Constrained landing-spot search in the camera-relative frame. Combines a
/// multi-start projected-gradient ascent with a dense sweep of the boundary
/// circles; ties are broken by polar angle, then radius.
inline LandingSolution solve_landing(const LandingProblem& pb, double tol = 1e-6) {
  (void)tol;
  const detail::RelProblem rel = detail::make_rel(pb);
  if (rel.people.empty()) {
    return {{0.0, 0.0}, 0.0, true, false};
  }

  detail::BestTracker best;

  // 16 deterministic starts: center plus a boundary ring.
  std::vector<detail::Vec2> starts{{0.0, 0.0}};
  for (int k = 0; k < 15; ++k) {
    double th = 2.0 * std::numbers::pi * k / 15.0;
    starts.push_back({rel.r_l * std::cos(th), rel.r_l * std::sin(th)});
  }
  for (const detail::Vec2& s : starts) {
    if (auto o = detail::ascend(rel, s); o && rel.feasible(*o)) best.offer(*o, rel.objective(*o));
  }

  detail::sweep_boundaries(rel, best);

  if (!best.any) return detail::fallback_maxmin(rel);

  LandingSolution sol;
  sol.offset = {best.point.x, best.point.y};
  sol.objective = best.obj;
  sol.feasible = true;
  sol.fallback_used = false;
  return sol;
}

/// Exhaustive grid evaluation over the search disc; independent check for
/// solve_landing.
inline LandingSolution oracle_solve(const LandingProblem& pb, double grid_step) {
  if (grid_step <= 0.0) throw std::invalid_argument("grid_step must be > 0");
  const detail::RelProblem rel = detail::make_rel(pb);
  if (rel.people.empty()) return {{0.0, 0.0}, 0.0, true, false};

  detail::BestTracker best;
  const int n = static_cast<int>(std::floor(rel.r_l / grid_step + 1e-9));
  for (int iy = -n; iy <= n; ++iy) {
    for (int ix = -n; ix <= n; ++ix) {
      detail::Vec2 o{ix * grid_step, iy * grid_step};
      if (o.norm() > rel.r_l + 1e-12) continue;
      if (!rel.feasible(o, 1e-12)) continue;
      best.offer(o, rel.objective(o));
    }
  }
  if (!best.any) return detail::fallback_maxmin(rel);

  LandingSolution sol;
  sol.offset = {best.point.x, best.point.y};
  sol.objective = best.obj;
  sol.feasible = true;
  sol.fallback_used = false;
  return sol;
}

}  // namespace padguard
