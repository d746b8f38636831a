#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biotac/rng.hpp"
#include "biotac/sensor.hpp"

namespace biotac {

struct DriftParams {
  double t0_counts = 2000.0;
  double t_inf_counts = 2600.0;
  double tau_ticks = 60000.0;
};

struct CycleSpec {
  Vec3 center_mm{};      // contact point on the skin surface
  double peak_force_n = 1.0;
  int ramp_ticks = 50;
  int hold_ticks = 100;
};

/// Configuration of the synthetic sensor surrogate. The surrogate is a
/// stand-in oracle with known structure, not a physical sensor model.
struct OracleConfig {
  std::uint64_t seed = 0;
  std::int64_t duration_ticks = 6000;
  DriftParams drift;
  std::vector<double> electrode_gain;    // 19 entries (or 1, broadcast)
  double spatial_sigma_mm = 4.0;
  std::vector<double> temp_coupling;     // 19 entries (or 1, broadcast)
  double noise_std_counts = 0.0;
  std::vector<CycleSpec> cycles;

  // Response-shape constants.
  double base_counts = 2500.0;     // per-electrode resting level
  double f_sat_n = 5.0;            // force-saturation scale of g(f)
  double pdc_base_counts = 2000.0;
  double pdc_gain = 150.0;         // counts per newton of |F|
  double pac_base_counts = 2048.0;
  double pac_gain = 400.0;         // counts per newton/tick of d|F|
  double tac_base_counts = 2000.0;
  double tip_fluid_factor = 2.0;   // extra gain on tip electrodes 7..10
  int gap_ticks = 50;              // idle ticks between cycles

  double gain_at(int electrode_idx0) const;
  double coupling_at(int electrode_idx0) const;
  void validate() const;  // throws std::invalid_argument on bad config
};

OracleConfig load_oracle_config(const std::string& path);
void save_oracle_config(const OracleConfig& cfg, const std::string& path);

/// tdc(tick) = t_inf - (t_inf - t0) * exp(-tick / tau). Strictly increasing
/// and bounded above by t_inf.
double temperature_at(std::int64_t tick, const DriftParams& drift);

/// Channel values for one contact sample. prev_force_mag feeds the
/// first-difference dynamic pressure channels.
SensorFrame surrogate_response(const Vec3& point_mm, const Vec3& force_n,
                               double tdc, double prev_force_mag,
                               const OracleConfig& config,
                               const ElectrodeLayout& layout, Rng& rng);

/// Deterministic full trajectory: cycles ramp-hold-ramp with idle gaps,
/// positions held constant between 10 Hz updates (ticks = 0 mod 10).
std::vector<SensorFrame> generate_dataset(const OracleConfig& config,
                                          const ElectrodeLayout& layout);

}  // namespace biotac
