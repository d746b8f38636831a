#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "biotac/dataio.hpp"
#include "biotac/gbt.hpp"
#include "biotac/neural.hpp"
#include "biotac/stats.hpp"

namespace biotac {

struct ExperimentConfig {
  std::string dataset_path;
  std::string output_dir = ".";
  int n_folds = 5;
  std::int64_t chunk_size = 100;
  int chunks_per_split = 2;
  std::uint64_t fold_seed = 1;
  std::uint64_t seed = 7;
  WindowSpec window;
  bool extended_channels = false;  // adds pac1/tac outputs (23 channels)
  std::string model_kind;          // gbt | feed_forward | network_b | transformer
  std::string model_json;          // the raw "model" object for the family
  TrainConfig train;               // neural families only
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Raw (unnormalized) windows and targets for one fold's three splits.
struct FoldData {
  std::vector<std::vector<double>> x_train, y_train;
  std::vector<std::vector<double>> x_val, y_val;
  std::vector<std::vector<double>> x_test, y_test;
};

FoldData assemble_fold(const Dataset& dataset, const FoldPlan& plan, int fold,
                       const WindowSpec& window, const ChannelSet& channels);

/// A trained model of either family behind one prediction interface.
struct AnyModel {
  enum class Kind { kGbt, kNeural } kind = Kind::kGbt;
  GbtModel gbt;
  NeuralModel neural;

  const ScalerPair& scaler() const;
  std::vector<double> predict_normalized(const std::vector<double>& xn) const;
  std::vector<double> predict_raw(const std::vector<double>& x) const;
};

/// Fits the fold scalers on the training split only, then trains the
/// configured model family on normalized data.
AnyModel train_fold_model(const ExperimentConfig& config, const FoldData& fold);

struct FoldResult {
  int fold = 0;
  std::string model_kind;
  int combo = 1;
  double n_train = 0, n_test = 0;  // window counts entering the t-test
  std::vector<std::string> channel_names;
  std::vector<double> nmae_channels;  // normalized, per channel
  std::vector<double> mae_channels;   // original scale, per channel
  double nmae_all = 0.0, nmae_electrodes = 0.0;
  double mae_all = 0.0, mae_electrodes = 0.0;
};

FoldResult score_fold(const AnyModel& model, const FoldData& fold,
                      int fold_index, const ExperimentConfig& config,
                      const ChannelSet& channels);

std::vector<FoldResult> run_experiment(const Dataset& dataset,
                                       const FoldPlan& plan,
                                       const ExperimentConfig& config);

void write_results_csv(const std::vector<FoldResult>& results,
                       const std::string& path);
std::vector<FoldResult> load_results_csv(const std::string& path);

/// Pairs two result sets by fold and tests mean(nmae_a - nmae_b) < 0.
TTestReport compare_results(const std::vector<FoldResult>& a,
                            const std::vector<FoldResult>& b);

struct SweepPoint {
  double temperature = 0.0;
  double nmae = 0.0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  double true_temperature_nmae = 0.0;
  double best_fixed_nmae = 0.0;
  double best_temperature = 0.0;
};

/// Evaluates a temperature-input model with the (raw) temperature feature
/// clamped to each grid value; the reference line uses true temperatures.
SweepCurve fixed_temperature_sweep(const AnyModel& model,
                                   const std::vector<std::vector<double>>& x_raw,
                                   const std::vector<std::vector<double>>& y_raw,
                                   const std::vector<double>& grid);

struct LatencyReport {
  double mean_ms = 0.0, min_ms = 0.0, max_ms = 0.0;
  int n = 0;
};

/// Times single calls over seeded standard-normal inputs after 10 untimed
/// warm-up calls; single-threaded, monotonic clock.
LatencyReport bench_latency(
    const std::function<std::vector<double>(const std::vector<double>&)>& fn,
    int input_size, int n_inputs, std::uint64_t seed);

}  // namespace biotac
