#include "biotac/geometry.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace biotac {

namespace {

/// Closest point on segment [a, b] to p.
Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 == 0.0) return a;
  double t = (p - a).dot(ab) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return a + ab * t;
}

}  // namespace

double surface_distance(const Vec3& point_mm, const Capsule& surface) {
  Vec3 c = closest_on_segment(point_mm, surface.p0, surface.p1);
  return (point_mm - c).norm() - surface.radius_mm;
}

Vec3 project_to_surface(const Vec3& point_mm, const Capsule& surface) {
  Vec3 c = closest_on_segment(point_mm, surface.p0, surface.p1);
  Vec3 d = point_mm - c;
  if (d.norm() == 0.0) d = Vec3{0.0, -1.0, 0.0};  // arbitrary but fixed
  return c + d.normalized() * surface.radius_mm;
}

Vec3 rotate_axis_angle(const Vec3& v, const Vec3& axis_angle) {
  double theta = axis_angle.norm();
  if (theta < 1e-15) return v;
  Vec3 k = axis_angle * (1.0 / theta);
  double c = std::cos(theta), s = std::sin(theta);
  return v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

bool ElectrodeLayout::valid(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (positions_mm.size() != 19) return fail("electrode count");
  if (!skin_surface.valid()) return fail("invalid capsule");
  for (std::size_t i = 0; i < positions_mm.size(); ++i) {
    if (std::abs(surface_distance(positions_mm[i], skin_surface)) > 1.0)
      return fail("electrode " + std::to_string(i + 1) + " off surface");
  }
  return true;
}

ElectrodeLayout default_layout() {
  ElectrodeLayout layout;
  layout.skin_surface = Capsule{{0, 0, 0}, {0, 0, 12}, 7.0};
  const Capsule& cap = layout.skin_surface;
  const double r = cap.radius_mm;

  // Side electrodes: five angular columns about -y, three heights each.
  // Column angles (deg from straight down) and the axial heights.
  const double cols_deg[5] = {-50, -25, 0, 25, 50};
  const double heights[3] = {2, 5, 8};
  std::vector<Vec3> side;
  for (double deg : cols_deg) {
    double th = deg * 3.14159265358979323846 / 180.0;
    for (double h : heights) {
      side.push_back({r * std::sin(th), -r * std::cos(th), h});
    }
  }

  // Tip electrodes on the hemispherical cap around p1, biased toward -y
  // (the sensing side), matching the tip cluster of the electrode map.
  Vec3 tip_center = cap.p1;
  const Vec3 tip_dirs[4] = {
      Vec3{-0.35, -0.45, 0.82}.normalized(),
      Vec3{-0.12, -0.30, 0.95}.normalized(),
      Vec3{0.12, -0.30, 0.95}.normalized(),
      Vec3{0.35, -0.45, 0.82}.normalized(),
  };

  layout.positions_mm.resize(19);
  // Indices 7..10 (1-based) are the tip electrodes; the 15 side positions
  // fill indices 1..6 and 11..19.
  std::size_t s = 0;
  for (int i = 0; i < 6; ++i) layout.positions_mm[i] = side[s++];
  for (int i = 0; i < 4; ++i)
    layout.positions_mm[6 + i] = tip_center + tip_dirs[i] * r;
  for (int i = 10; i < 19; ++i) layout.positions_mm[i] = side[s++];
  return layout;
}

ElectrodeLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file: " + path);
  nlohmann::json j;
  in >> j;
  ElectrodeLayout layout;
  for (const auto& p : j.at("positions_mm")) {
    layout.positions_mm.push_back(
        {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  const auto& c = j.at("capsule");
  auto vec = [](const nlohmann::json& a) {
    return Vec3{a.at(0).get<double>(), a.at(1).get<double>(),
                a.at(2).get<double>()};
  };
  layout.skin_surface =
      Capsule{vec(c.at("p0")), vec(c.at("p1")), c.at("radius_mm").get<double>()};
  std::string why;
  if (!layout.valid(&why))
    throw std::runtime_error("invalid layout (" + why + "): " + path);
  return layout;
}

void save_layout(const ElectrodeLayout& layout, const std::string& path) {
  nlohmann::json j;
  for (const auto& p : layout.positions_mm)
    j["positions_mm"].push_back({p.x, p.y, p.z});
  j["capsule"] = {
      {"p0", {layout.skin_surface.p0.x, layout.skin_surface.p0.y,
              layout.skin_surface.p0.z}},
      {"p1", {layout.skin_surface.p1.x, layout.skin_surface.p1.y,
              layout.skin_surface.p1.z}},
      {"radius_mm", layout.skin_surface.radius_mm}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write layout file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace biotac
