#include "biotac/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace biotac {

namespace {

double clamp_raw(double v) {
  return std::min(kRawMax, std::max(kRawMin, v));
}

double broadcast(const std::vector<double>& v, int i, double fallback) {
  if (v.empty()) return fallback;
  if (v.size() == 1) return v[0];
  return v[static_cast<std::size_t>(i)];
}

}  // namespace

double OracleConfig::gain_at(int i) const {
  return broadcast(electrode_gain, i, 300.0);
}

double OracleConfig::coupling_at(int i) const {
  return broadcast(temp_coupling, i, 0.0);
}

void OracleConfig::validate() const {
  if (drift.tau_ticks <= 0.0)
    throw std::invalid_argument("oracle config: tau_ticks must be > 0");
  if (drift.t0_counts >= drift.t_inf_counts)
    throw std::invalid_argument("oracle config: t0 must be below t_inf");
  if (spatial_sigma_mm <= 0.0)
    throw std::invalid_argument("oracle config: spatial_sigma_mm must be > 0");
  if (noise_std_counts < 0.0)
    throw std::invalid_argument("oracle config: noise_std must be >= 0");
  auto sized = [](const std::vector<double>& v) {
    return v.empty() || v.size() == 1 || v.size() == kNumElectrodes;
  };
  if (!sized(electrode_gain) || !sized(temp_coupling))
    throw std::invalid_argument(
        "oracle config: per-electrode vectors need 1 or 19 entries");
  std::int64_t needed = gap_ticks;
  for (const CycleSpec& c : cycles) {
    if (c.ramp_ticks <= 0 || c.hold_ticks < 0)
      throw std::invalid_argument("oracle config: bad cycle timing");
    needed += 2 * c.ramp_ticks + c.hold_ticks + gap_ticks;
  }
  if (needed > duration_ticks)
    throw std::invalid_argument("oracle config: cycles exceed duration_ticks");
}

double temperature_at(std::int64_t tick, const DriftParams& drift) {
  return drift.t_inf_counts -
         (drift.t_inf_counts - drift.t0_counts) *
             std::exp(-static_cast<double>(tick) / drift.tau_ticks);
}

SensorFrame surrogate_response(const Vec3& point_mm, const Vec3& force_n,
                               double tdc, double prev_force_mag,
                               const OracleConfig& config,
                               const ElectrodeLayout& layout, Rng& rng) {
  SensorFrame f;
  f.position_mm = point_mm;
  f.force_n = force_n;
  f.tdc = clamp_raw(tdc);

  double fmag = force_n.norm();
  double g = fmag / (1.0 + fmag / config.f_sat_n);  // monotone, saturating
  double dtemp = tdc - config.drift.t0_counts;
  double inv_2s2 = 1.0 / (2.0 * config.spatial_sigma_mm * config.spatial_sigma_mm);
  double noise = config.noise_std_counts;
  auto eps = [&]() { return noise > 0.0 ? rng.normal(0.0, noise) : 0.0; };

  for (int i = 0; i < kNumElectrodes; ++i) {
    Vec3 d = point_mm - layout.positions_mm[i];
    double spatial = std::exp(-d.dot(d) * inv_2s2);
    // Tip electrodes (1-based 7..10) carry extra fluid volume and respond
    // more strongly, which makes them harder to regress.
    double fluid = (i >= 6 && i <= 9) ? config.tip_fluid_factor : 1.0;
    double e = config.base_counts +
               config.gain_at(i) * fluid * g * spatial +
               config.coupling_at(i) * dtemp + eps();
    f.electrodes[i] = clamp_raw(e);
  }

  f.pdc = clamp_raw(config.pdc_base_counts + config.pdc_gain * fmag + eps());
  double pac = config.pac_base_counts + config.pac_gain * (fmag - prev_force_mag);
  f.pac0 = clamp_raw(pac + eps());
  f.pac1 = clamp_raw(pac + eps());  // near-identical twin channel
  f.tac = clamp_raw(config.tac_base_counts + eps());
  return f;
}

std::vector<SensorFrame> generate_dataset(const OracleConfig& config,
                                          const ElectrodeLayout& layout) {
  config.validate();
  Rng rng(config.seed);

  struct Interval {
    std::int64_t start, ramp, hold;
    Vec3 center;
    Vec3 inward;
    double peak;
    std::int64_t end() const { return start + 2 * ramp + hold; }
  };
  std::vector<Interval> intervals;
  std::int64_t cursor = config.gap_ticks;
  for (const CycleSpec& c : config.cycles) {
    Interval iv;
    iv.start = cursor;
    iv.ramp = c.ramp_ticks;
    iv.hold = c.hold_ticks;
    iv.center = project_to_surface(c.center_mm, layout.skin_surface);
    // Inward normal: from the surface point toward its closest axis point.
    {
      const Capsule& cap = layout.skin_surface;
      Vec3 ab = cap.p1 - cap.p0;
      double t = (iv.center - cap.p0).dot(ab) / ab.dot(ab);
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      Vec3 foot = cap.p0 + ab * t;
      iv.inward = (foot - iv.center).normalized();
    }
    iv.peak = c.peak_force_n;
    cursor = iv.end() + config.gap_ticks;
    intervals.push_back(iv);
  }

  std::vector<SensorFrame> frames;
  frames.reserve(static_cast<std::size_t>(config.duration_ticks));
  Vec3 held_pos{};
  double prev_fmag = 0.0;
  std::size_t active_hint = 0;
  for (std::int64_t t = 0; t < config.duration_ticks; ++t) {
    // Locate the active or upcoming cycle.
    while (active_hint < intervals.size() && t >= intervals[active_hint].end())
      ++active_hint;
    const Interval* active = nullptr;
    if (active_hint < intervals.size() && t >= intervals[active_hint].start)
      active = &intervals[active_hint];

    Vec3 target_pos;
    Vec3 force{};
    std::int64_t cycle_id = 0;
    if (active) {
      target_pos = active->center;
      std::int64_t k = t - active->start;
      double mag;
      if (k < active->ramp) {
        mag = active->peak * static_cast<double>(k + 1) /
              static_cast<double>(active->ramp);
      } else if (k < active->ramp + active->hold) {
        mag = active->peak;
      } else {
        std::int64_t kd = k - active->ramp - active->hold;
        mag = active->peak * static_cast<double>(active->ramp - 1 - kd) /
              static_cast<double>(active->ramp);
      }
      force = active->inward * mag;
      cycle_id = static_cast<std::int64_t>(active_hint) + 1;
    } else if (active_hint < intervals.size()) {
      // Idle approach pose: hover 5 mm off the next contact point.
      const Interval& next = intervals[active_hint];
      target_pos = next.center - next.inward * 5.0;
    } else if (!intervals.empty()) {
      const Interval& last = intervals.back();
      target_pos = last.center - last.inward * 5.0;
    } else {
      target_pos = Vec3{0.0, -(layout.skin_surface.radius_mm + 5.0), 6.0};
    }

    if (t % 10 == 0) held_pos = target_pos;  // 10 Hz position updates

    double tdc = temperature_at(t, config.drift);
    SensorFrame f =
        surrogate_response(held_pos, force, tdc, prev_fmag, config, layout, rng);
    f.tick = t;
    f.cycle_id = cycle_id;
    frames.push_back(f);
    prev_fmag = force.norm();
  }
  return frames;
}

OracleConfig load_oracle_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open oracle config: " + path);
  nlohmann::json j;
  in >> j;
  OracleConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.duration_ticks = j.value("duration_ticks", cfg.duration_ticks);
  if (j.contains("drift")) {
    const auto& d = j["drift"];
    cfg.drift.t0_counts = d.value("t0_counts", cfg.drift.t0_counts);
    cfg.drift.t_inf_counts = d.value("t_inf_counts", cfg.drift.t_inf_counts);
    cfg.drift.tau_ticks = d.value("tau_ticks", cfg.drift.tau_ticks);
  }
  if (j.contains("electrode_gain"))
    cfg.electrode_gain = j["electrode_gain"].get<std::vector<double>>();
  cfg.spatial_sigma_mm = j.value("spatial_sigma_mm", cfg.spatial_sigma_mm);
  if (j.contains("temp_coupling"))
    cfg.temp_coupling = j["temp_coupling"].get<std::vector<double>>();
  cfg.noise_std_counts = j.value("noise_std_counts", cfg.noise_std_counts);
  cfg.base_counts = j.value("base_counts", cfg.base_counts);
  cfg.f_sat_n = j.value("f_sat_n", cfg.f_sat_n);
  cfg.pdc_base_counts = j.value("pdc_base_counts", cfg.pdc_base_counts);
  cfg.pdc_gain = j.value("pdc_gain", cfg.pdc_gain);
  cfg.pac_base_counts = j.value("pac_base_counts", cfg.pac_base_counts);
  cfg.pac_gain = j.value("pac_gain", cfg.pac_gain);
  cfg.tac_base_counts = j.value("tac_base_counts", cfg.tac_base_counts);
  cfg.tip_fluid_factor = j.value("tip_fluid_factor", cfg.tip_fluid_factor);
  cfg.gap_ticks = j.value("gap_ticks", cfg.gap_ticks);
  for (const auto& c : j.value("cycles", nlohmann::json::array())) {
    CycleSpec cs;
    const auto& p = c.at("center_mm");
    cs.center_mm = {p.at(0).get<double>(), p.at(1).get<double>(),
                    p.at(2).get<double>()};
    cs.peak_force_n = c.value("peak_force_n", cs.peak_force_n);
    cs.ramp_ticks = c.value("ramp_ticks", cs.ramp_ticks);
    cs.hold_ticks = c.value("hold_ticks", cs.hold_ticks);
    cfg.cycles.push_back(cs);
  }
  cfg.validate();
  return cfg;
}

void save_oracle_config(const OracleConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["duration_ticks"] = cfg.duration_ticks;
  j["drift"] = {{"t0_counts", cfg.drift.t0_counts},
                {"t_inf_counts", cfg.drift.t_inf_counts},
                {"tau_ticks", cfg.drift.tau_ticks}};
  if (!cfg.electrode_gain.empty()) j["electrode_gain"] = cfg.electrode_gain;
  j["spatial_sigma_mm"] = cfg.spatial_sigma_mm;
  if (!cfg.temp_coupling.empty()) j["temp_coupling"] = cfg.temp_coupling;
  j["noise_std_counts"] = cfg.noise_std_counts;
  j["base_counts"] = cfg.base_counts;
  j["f_sat_n"] = cfg.f_sat_n;
  j["pdc_base_counts"] = cfg.pdc_base_counts;
  j["pdc_gain"] = cfg.pdc_gain;
  j["pac_base_counts"] = cfg.pac_base_counts;
  j["pac_gain"] = cfg.pac_gain;
  j["tac_base_counts"] = cfg.tac_base_counts;
  j["tip_fluid_factor"] = cfg.tip_fluid_factor;
  j["gap_ticks"] = cfg.gap_ticks;
  j["cycles"] = nlohmann::json::array();
  for (const CycleSpec& c : cfg.cycles) {
    j["cycles"].push_back({{"center_mm", {c.center_mm.x, c.center_mm.y, c.center_mm.z}},
                           {"peak_force_n", c.peak_force_n},
                           {"ramp_ticks", c.ramp_ticks},
                           {"hold_ticks", c.hold_ticks}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write oracle config: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace biotac
