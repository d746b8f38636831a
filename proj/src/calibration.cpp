#include "biotac/calibration.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "biotac/rng.hpp"

namespace biotac {

namespace {

double mean_abs_distance(const std::vector<Vec3>& probes, const Capsule& surface,
                         const PoseOffset& offset) {
  double sum = 0.0;
  for (const Vec3& p : probes) sum += std::abs(surface_distance(offset.apply(p), surface));
  return sum / static_cast<double>(probes.size());
}

}  // namespace

CalibrationResult calibrate(const std::vector<Vec3>& probes_mm,
                            const Capsule& surface,
                            const PoseOffset& initial_offset, int steps,
                            std::uint64_t seed) {
  if (probes_mm.size() < 10)
    throw std::invalid_argument("calibrate: need at least 10 probes");
  if (steps < 0) throw std::invalid_argument("calibrate: negative step budget");

  Rng rng(seed);
  PoseOffset offset = initial_offset;
  double cost = mean_abs_distance(probes_mm, surface, offset);

  CalibrationResult result;
  result.report.initial_mean_dist_mm = cost;
  result.report.steps = steps;

  double delta_t = 0.5;   // mm
  double delta_r = 0.01;  // rad
  for (int step = 0; step < steps; ++step) {
    if (step > 0 && step % 200 == 0) {
      delta_t *= 0.5;
      delta_r *= 0.5;
    }
    std::size_t comp = rng.index(6);
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    PoseOffset candidate = offset;
    double* fields[6] = {&candidate.translation_mm.x, &candidate.translation_mm.y,
                         &candidate.translation_mm.z, &candidate.rotation.x,
                         &candidate.rotation.y, &candidate.rotation.z};
    *fields[comp] += sign * (comp < 3 ? delta_t : delta_r);
    double c = mean_abs_distance(probes_mm, surface, candidate);
    if (c < cost) {
      cost = c;
      offset = candidate;
    }
    result.report.trace.push_back(cost);
  }
  result.offset = offset;
  result.report.final_mean_dist_mm = cost;
  return result;
}

void save_offset(const PoseOffset& offset, const std::string& path) {
  nlohmann::json j;
  j["translation_mm"] = {offset.translation_mm.x, offset.translation_mm.y,
                         offset.translation_mm.z};
  j["rotation"] = {offset.rotation.x, offset.rotation.y, offset.rotation.z};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write offset file: " + path);
  out << j.dump(2) << "\n";
}

PoseOffset load_offset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open offset file: " + path);
  nlohmann::json j;
  in >> j;
  PoseOffset o;
  const auto& t = j.at("translation_mm");
  o.translation_mm = {t.at(0).get<double>(), t.at(1).get<double>(),
                      t.at(2).get<double>()};
  const auto& r = j.at("rotation");
  o.rotation = {r.at(0).get<double>(), r.at(1).get<double>(),
                r.at(2).get<double>()};
  return o;
}

void save_trace_csv(const CalibrationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "step,mean_dist_mm\n";
  for (std::size_t i = 0; i < report.trace.size(); ++i)
    out << (i + 1) << ',' << report.trace[i] << "\n";
}

}  // namespace biotac
