#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biotac/geometry.hpp"

namespace biotac {

inline constexpr int kNumElectrodes = 19;
inline constexpr double kRawMin = 0.0;
inline constexpr double kRawMax = 4095.0;  // 12-bit ADC scale

/// One 100 Hz tick of raw sensor channels plus indenter pose and force.
struct SensorFrame {
  std::int64_t tick = 0;
  std::array<double, kNumElectrodes> electrodes{};
  double pdc = 0.0;
  double pac0 = 0.0;
  double pac1 = 0.0;
  double tdc = 0.0;
  double tac = 0.0;
  Vec3 position_mm{};
  Vec3 force_n{};
  std::int64_t cycle_id = 0;  // 0 = no contact cycle

  double force_mag() const { return force_n.norm(); }
};

/// The 21 model output channels: e1..e19, pdc, pac0. pac1 and tac are
/// never part of the metric set. An optional extended 23-channel mode
/// (adds pac1 and tac) exists for baseline replication.
struct ChannelSet {
  std::vector<std::string> names;
  std::vector<int> electrode_mask;  // indices of the 19 electrode channels

  static ChannelSet standard21();
  static ChannelSet extended23();
  int size() const { return static_cast<int>(names.size()); }
};

/// Extracts the channel values of a frame in ChannelSet order.
std::vector<double> channel_values(const SensorFrame& f, const ChannelSet& cs);

struct Verdict {
  bool ok = true;
  std::string violation;  // first violated invariant when !ok
};

/// prev_tick: tick of the preceding frame, if any, for the
/// strictly-increasing check.
Verdict validate_frame(const SensorFrame& frame,
                       std::optional<std::int64_t> prev_tick = std::nullopt);

/// 1-based electrode index minimizing Euclidean distance; ties break
/// toward the lowest index.
int nearest_electrode(const Vec3& point_mm, const ElectrodeLayout& layout);

enum class ProbeMode {
  kLightTouchEnd,  // |F| < force_min at the last frame of a contact cycle
  kContactStart,   // first frame per cycle with |F| > force_min and
                   // surface distance < dist_max
};

/// Order-preserving subset selection of calibration / histogram probes.
std::vector<SensorFrame> select_contact_probes(
    const std::vector<SensorFrame>& dataset, double force_min_n,
    double dist_max_mm, ProbeMode mode, const ElectrodeLayout& layout);

}  // namespace biotac
