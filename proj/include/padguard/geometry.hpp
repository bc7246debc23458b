#pragma once

#include <cmath>
#include <stdexcept>

namespace padguard {

struct ImagePoint {
  double x_image = 0.0;  // pixels, rightward from top-left origin
  double y_image = 0.0;  // pixels, downward
};

struct ImageDims {
  double w_image = 0.0;
  double h_image = 0.0;
};

// Camera-frame pixel coordinates, origin at the image center.
struct CamPixPoint {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
};

struct CameraPose {
  double d_x_cam = 0.0;      // meters, world frame
  double d_y_cam = 0.0;      // meters, world frame
  double yaw_offset = 0.0;   // radians, world->camera heading offset
};

struct WorldPoint2D {
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

inline constexpr double kDegenerateCenterEps = 1e-6;  // pixels

// The image->camera axis pairing is only self-consistent on square frames,
// so non-square dims are rejected rather than silently corrected.
inline CamPixPoint image_to_campix(const ImagePoint& p, const ImageDims& dims) {
  if (dims.w_image <= 0.0 || dims.h_image <= 0.0)
    throw std::invalid_argument("image dims must be positive");
  if (dims.w_image != dims.h_image)
    throw std::invalid_argument("image frame must be square");
  return {-p.y_image + dims.w_image / 2.0, -p.x_image + dims.h_image / 2.0};
}

// Inverse of image_to_campix on a square frame.
inline ImagePoint campix_to_image(const CamPixPoint& p, const ImageDims& dims) {
  if (dims.w_image <= 0.0 || dims.w_image != dims.h_image)
    throw std::invalid_argument("image frame must be square");
  return {-p.y + dims.h_image / 2.0, -p.x + dims.w_image / 2.0};
}

inline CamPixPoint rotate_to_world(const CamPixPoint& p, double yaw_offset) {
  const double c = std::cos(yaw_offset);
  const double s = std::sin(yaw_offset);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/// Scale the box-center direction by the predicted distance and shift into the
/// world frame. A box center within kDegenerateCenterEps of the image center
/// has no defined direction and is reported as "person at the camera".
inline WorldPoint2D localize_person(const CamPixPoint& box_center, double d_pred,
                                    const CameraPose& cam) {
  if (d_pred < 0.0) throw std::invalid_argument("predicted distance must be >= 0");
  const double n = box_center.norm();
  if (n <= kDegenerateCenterEps) return {cam.d_x_cam, cam.d_y_cam};
  const CamPixPoint dir = rotate_to_world({box_center.x / n, box_center.y / n}, cam.yaw_offset);
  return {d_pred * dir.x + cam.d_x_cam, d_pred * dir.y + cam.d_y_cam};
}

}  // namespace padguard
