#include "biotac/sensor.hpp"

#include <limits>
#include <map>

namespace biotac {

ChannelSet ChannelSet::standard21() {
  ChannelSet cs;
  for (int i = 1; i <= kNumElectrodes; ++i)
    cs.names.push_back("e" + std::to_string(i));
  cs.names.push_back("pdc");
  cs.names.push_back("pac0");
  for (int i = 0; i < kNumElectrodes; ++i) cs.electrode_mask.push_back(i);
  return cs;
}

ChannelSet ChannelSet::extended23() {
  ChannelSet cs = standard21();
  cs.names.push_back("pac1");
  cs.names.push_back("tac");
  return cs;
}

std::vector<double> channel_values(const SensorFrame& f, const ChannelSet& cs) {
  std::vector<double> v;
  v.reserve(cs.names.size());
  for (int i = 0; i < kNumElectrodes; ++i) v.push_back(f.electrodes[i]);
  v.push_back(f.pdc);
  v.push_back(f.pac0);
  if (cs.size() == 23) {
    v.push_back(f.pac1);
    v.push_back(f.tac);
  }
  return v;
}

Verdict validate_frame(const SensorFrame& frame,
                       std::optional<std::int64_t> prev_tick) {
  auto in_range = [](double v) { return v >= kRawMin && v <= kRawMax; };
  // array size is fixed at compile time; the count invariant guards the
  // dynamic paths (CSV ingestion) which funnel through here conceptually.
  for (double e : frame.electrodes)
    if (!in_range(e)) return {false, "channel out of raw range"};
  for (double v : {frame.pdc, frame.pac0, frame.pac1, frame.tdc, frame.tac})
    if (!in_range(v)) return {false, "channel out of raw range"};
  if (prev_tick && frame.tick <= *prev_tick)
    return {false, "tick not strictly increasing"};
  return {};
}

int nearest_electrode(const Vec3& point_mm, const ElectrodeLayout& layout) {
  int best = 1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(layout.positions_mm.size()); ++i) {
    Vec3 d = point_mm - layout.positions_mm[i];
    double d2 = d.dot(d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i + 1;
    }
  }
  return best;
}

std::vector<SensorFrame> select_contact_probes(
    const std::vector<SensorFrame>& dataset, double force_min_n,
    double dist_max_mm, ProbeMode mode, const ElectrodeLayout& layout) {
  std::vector<SensorFrame> out;
  if (mode == ProbeMode::kLightTouchEnd) {
    // Last frame of each contact cycle, kept when it is a light touch.
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const SensorFrame& f = dataset[i];
      if (f.cycle_id <= 0) continue;
      bool last_of_cycle =
          i + 1 == dataset.size() || dataset[i + 1].cycle_id != f.cycle_id;
      if (last_of_cycle && f.force_mag() < force_min_n) out.push_back(f);
    }
  } else {
    std::map<std::int64_t, bool> taken;
    for (const SensorFrame& f : dataset) {
      if (f.cycle_id <= 0 || taken[f.cycle_id]) continue;
      if (f.force_mag() > force_min_n &&
          std::abs(surface_distance(f.position_mm, layout.skin_surface)) <
              dist_max_mm) {
        out.push_back(f);
        taken[f.cycle_id] = true;
      }
    }
  }
  return out;
}

}  // namespace biotac
