#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace biotac {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
};

/// Cylinder with hemispherical caps, defined by the axis segment [p0, p1]
/// and a radius. Used as the skin-surface model.
struct Capsule {
  Vec3 p0, p1;
  double radius_mm = 0.0;

  bool valid() const { return radius_mm > 0.0 && (p1 - p0).norm() > 0.0; }
};

/// Signed point-to-capsule distance: negative inside, zero on the surface,
/// positive outside. Closed form via the distance to the axis segment.
double surface_distance(const Vec3& point_mm, const Capsule& surface);

/// Closest point on the capsule surface to an arbitrary point.
Vec3 project_to_surface(const Vec3& point_mm, const Capsule& surface);

/// Small-angle axis-angle rotation applied via the Rodrigues formula.
Vec3 rotate_axis_angle(const Vec3& v, const Vec3& axis_angle);

struct ElectrodeLayout {
  std::vector<Vec3> positions_mm;  // exactly 19, in the sensor frame
  Capsule skin_surface;

  bool valid(std::string* why = nullptr) const;
};

/// Toolkit-defined layout: 15 side electrodes in five angular columns plus
/// the four tip electrodes (indices 7..10) on the hemispherical cap.
ElectrodeLayout default_layout();

ElectrodeLayout load_layout(const std::string& path);
void save_layout(const ElectrodeLayout& layout, const std::string& path);

}  // namespace biotac
