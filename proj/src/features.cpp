#include "biotac/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace biotac {

std::vector<int> WindowSpec::position_offsets() const {
  if (combo == 7 || combo == 8) return {-10, 0, 10};
  return {0};
}

std::vector<int> WindowSpec::force_offsets() const {
  switch (combo) {
    case 1:
      return {-10, 0, 10};
    case 2:
      return {-10, 0};
    case 3:
      return {0};
    case 4:
      return {-10, -5, 0, 5, 10};
    case 5:
    case 8: {
      std::vector<int> v(21);
      std::iota(v.begin(), v.end(), -10);
      return v;
    }
    case 6: {
      std::vector<int> v(11);
      std::iota(v.begin(), v.end(), -10);
      return v;
    }
    case 7:
      return {-10, 0, 10};
    default:
      throw std::invalid_argument("window combo must be in [1, 8]");
  }
}

int input_size(const WindowSpec& spec) {
  int n = 3 * static_cast<int>(spec.position_offsets().size()) +
          3 * static_cast<int>(spec.force_offsets().size());
  return n + (spec.include_temperature ? 1 : 0);
}

std::optional<std::vector<double>> build_window(const Dataset& dataset,
                                                std::int64_t t,
                                                const WindowSpec& spec,
                                                std::int64_t chunk_size) {
  auto pos_off = spec.position_offsets();
  auto force_off = spec.force_offsets();
  std::int64_t lo = t, hi = t;
  for (int o : pos_off) {
    lo = std::min(lo, t + o);
    hi = std::max(hi, t + o);
  }
  for (int o : force_off) {
    lo = std::min(lo, t + o);
    hi = std::max(hi, t + o);
  }
  if (lo < 0 || hi >= dataset.size()) return std::nullopt;
  if (chunk_size > 0 && lo / chunk_size != hi / chunk_size)
    return std::nullopt;  // window would leak across fold chunks

  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(input_size(spec)));
  for (int o : pos_off) {
    const Vec3& p = dataset.frames[static_cast<std::size_t>(t + o)].position_mm;
    v.push_back(p.x);
    v.push_back(p.y);
    v.push_back(p.z);
  }
  for (int o : force_off) {
    const Vec3& f = dataset.frames[static_cast<std::size_t>(t + o)].force_n;
    v.push_back(f.x);
    v.push_back(f.y);
    v.push_back(f.z);
  }
  if (spec.include_temperature)
    v.push_back(dataset.frames[static_cast<std::size_t>(t)].tdc);
  return v;
}

void Scaler::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("scaler: empty fit data");
  std::size_t d = rows[0].size();
  mean.assign(d, 0.0);
  std.assign(d, 0.0);
  for (const auto& r : rows) {
    if (r.size() != d) throw std::invalid_argument("scaler: ragged fit data");
    for (std::size_t i = 0; i < d; ++i) mean[i] += r[i];
  }
  double n = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < d; ++i) mean[i] /= n;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i) {
      double c = r[i] - mean[i];
      std[i] += c * c;
    }
  for (std::size_t i = 0; i < d; ++i) {
    std[i] = std::sqrt(std[i] / n);  // population standard deviation
    if (std[i] <= 0.0) std[i] = 1.0;
  }
}

std::vector<double> Scaler::apply(const std::vector<double>& v) const {
  if (v.size() != mean.size()) throw std::invalid_argument("scaler: size mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean[i]) / std[i];
  return out;
}

std::vector<double> Scaler::invert(const std::vector<double>& v) const {
  if (v.size() != mean.size()) throw std::invalid_argument("scaler: size mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * std[i] + mean[i];
  return out;
}

std::string scaler_pair_to_json(const ScalerPair& s) {
  nlohmann::json j;
  j["inputs"] = {{"mean", s.inputs.mean}, {"std", s.inputs.std}};
  j["outputs"] = {{"mean", s.outputs.mean}, {"std", s.outputs.std}};
  return j.dump();
}

ScalerPair scaler_pair_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ScalerPair s;
  s.inputs.mean = j.at("inputs").at("mean").get<std::vector<double>>();
  s.inputs.std = j.at("inputs").at("std").get<std::vector<double>>();
  s.outputs.mean = j.at("outputs").at("mean").get<std::vector<double>>();
  s.outputs.std = j.at("outputs").at("std").get<std::vector<double>>();
  return s;
}

}  // namespace biotac
