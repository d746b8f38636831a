#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biotac/dataio.hpp"

namespace biotac {

/// One of the eight windowed input encodings. Feature order is fixed:
/// positions at ascending timestep offsets, then force triples at
/// ascending offsets, then (optionally) the current temperature.
struct WindowSpec {
  int combo = 1;                      // 1..8
  bool include_temperature = false;   // baseline replication only

  std::vector<int> position_offsets() const;  // tick offsets relative to T
  std::vector<int> force_offsets() const;
};

int input_size(const WindowSpec& spec);

/// Assembles the feature vector at tick t, or nullopt when a required tick
/// leaves the dataset or crosses a chunk boundary (chunk_size > 0).
std::optional<std::vector<double>> build_window(const Dataset& dataset,
                                                std::int64_t t,
                                                const WindowSpec& spec,
                                                std::int64_t chunk_size = 0);

/// Per-channel z-score normalization, fitted on training data only with
/// population standard deviation. Constant channels clamp sigma to 1.
struct Scaler {
  std::vector<double> mean, std;

  void fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(const std::vector<double>& v) const;
  std::vector<double> invert(const std::vector<double>& v) const;
  int size() const { return static_cast<int>(mean.size()); }
};

struct ScalerPair {
  Scaler inputs, outputs;
};

std::string scaler_pair_to_json(const ScalerPair& s);
ScalerPair scaler_pair_from_json(const std::string& text);

}  // namespace biotac
