#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "biotac/calibration.hpp"
#include "biotac/rng.hpp"

using namespace biotac;

namespace {

Capsule skin() { return {{0, 0, 0}, {0, 0, 12}, 7.0}; }

std::vector<Vec3> on_surface_probes(int n, std::uint64_t seed) {
  Rng rng(seed);
  Capsule c = skin();
  std::vector<Vec3> probes;
  for (int i = 0; i < n; ++i) {
    Vec3 raw{rng.normal(0, 5), rng.normal(0, 5), rng.uniform(-3, 16)};
    probes.push_back(project_to_surface(raw, c));
  }
  return probes;
}

double mean_abs_dist(const std::vector<Vec3>& probes, const PoseOffset& off,
                     const Capsule& c) {
  double s = 0.0;
  for (const Vec3& p : probes) s += std::abs(surface_distance(off.apply(p), c));
  return s / static_cast<double>(probes.size());
}

}  // namespace

TEST_CASE("already-on-surface probes stay optimal") {
  auto probes = on_surface_probes(40, 1);
  CalibrationResult res = calibrate(probes, skin(), {}, 500, 3);
  CHECK(res.report.initial_mean_dist_mm < 1e-9);
  CHECK(res.report.final_mean_dist_mm <= res.report.initial_mean_dist_mm + 1e-12);
}

TEST_CASE("zero step budget is a no-op") {
  auto probes = on_surface_probes(20, 2);
  PoseOffset init;
  init.translation_mm = {1, 0, 0};
  CalibrationResult res = calibrate(probes, skin(), init, 0, 3);
  CHECK(res.report.final_mean_dist_mm == res.report.initial_mean_dist_mm);
  CHECK(res.report.trace.empty());
  CHECK(res.offset.translation_mm.x == 1.0);
}

TEST_CASE("trace is monotone non-increasing and bounded by the start") {
  auto probes = on_surface_probes(30, 4);
  PoseOffset init;
  init.translation_mm = {2.5, -1.5, 1.0};
  CalibrationResult res = calibrate(probes, skin(), init, 600, 7);
  REQUIRE(res.report.trace.size() == 600);
  double prev = res.report.initial_mean_dist_mm;
  for (double d : res.report.trace) {
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
  CHECK(res.report.final_mean_dist_mm == res.report.trace.back());
}

TEST_CASE("calibration is deterministic for a fixed seed") {
  auto probes = on_surface_probes(25, 5);
  PoseOffset init;
  init.translation_mm = {3, 1, -2};
  CalibrationResult a = calibrate(probes, skin(), init, 400, 11);
  CalibrationResult b = calibrate(probes, skin(), init, 400, 11);
  CHECK(a.offset.translation_mm.x == b.offset.translation_mm.x);
  CHECK(a.offset.rotation.z == b.offset.rotation.z);
  CHECK(a.report.trace == b.report.trace);
}

TEST_CASE("too few probes are rejected") {
  auto probes = on_surface_probes(9, 6);
  CHECK_THROWS_AS(calibrate(probes, skin(), {}, 100, 1), std::invalid_argument);
}

TEST_CASE("inject-and-recover a 4 mm translation") {
  auto clean = on_surface_probes(60, 7);
  PoseOffset corrupt;
  corrupt.translation_mm = {2.3, -2.6, 1.8};  // |t| = 3.93 mm
  std::vector<Vec3> corrupted;
  for (const Vec3& p : clean) corrupted.push_back(corrupt.apply(p));

  double before = mean_abs_dist(corrupted, {}, skin());
  CHECK(before > 1.0);
  CalibrationResult res = calibrate(corrupted, skin(), {}, 1000, 13);
  CHECK(res.report.final_mean_dist_mm < 0.5);
  CHECK(res.report.final_mean_dist_mm < before);

  // Recovered translation approximately inverts the corruption.
  Vec3 resid = res.offset.translation_mm + corrupt.translation_mm;
  CHECK(resid.norm() < 1.0);
}

TEST_CASE("offset file round trip") {
  PoseOffset off;
  off.translation_mm = {0.5, -1.25, 2.0};
  off.rotation = {0.01, -0.02, 0.005};
  std::string p = "test_offset_rt.json";
  save_offset(off, p);
  PoseOffset back = load_offset(p);
  CHECK(back.translation_mm.x == off.translation_mm.x);
  CHECK(back.translation_mm.y == off.translation_mm.y);
  CHECK(back.rotation.z == off.rotation.z);
  std::remove(p.c_str());
}

TEST_CASE("trace CSV dumps one row per step") {
  auto probes = on_surface_probes(15, 8);
  PoseOffset init;
  init.translation_mm = {1, 1, 0};
  CalibrationResult res = calibrate(probes, skin(), init, 50, 2);
  std::string p = "test_trace.csv";
  save_trace_csv(res.report, p);
  std::ifstream in(p);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 51);  // header + 50 steps
  std::remove(p.c_str());
}
