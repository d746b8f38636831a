#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biotac/geometry.hpp"

namespace biotac {

/// Systematic pose correction: rotation (small-angle axis-angle) applied
/// first, then translation.
struct PoseOffset {
  Vec3 translation_mm{};
  Vec3 rotation{};  // axis-angle components, radians

  Vec3 apply(const Vec3& p) const {
    return rotate_axis_angle(p, rotation) + translation_mm;
  }
};

struct CalibrationReport {
  double initial_mean_dist_mm = 0.0;
  double final_mean_dist_mm = 0.0;
  int steps = 0;
  std::vector<double> trace;  // mean |distance| after each step
};

struct CalibrationResult {
  PoseOffset offset;
  CalibrationReport report;
};

/// Derivative-free hill climbing: each step perturbs one randomly chosen
/// offset component by +/-delta, keeping the change iff the mean absolute
/// probe-to-surface distance decreases. Delta starts at 0.5 mm / 0.01 rad
/// and halves every 200 steps.
CalibrationResult calibrate(const std::vector<Vec3>& probes_mm,
                            const Capsule& surface,
                            const PoseOffset& initial_offset, int steps,
                            std::uint64_t seed);

void save_offset(const PoseOffset& offset, const std::string& path);
PoseOffset load_offset(const std::string& path);
void save_trace_csv(const CalibrationReport& report, const std::string& path);

}  // namespace biotac
