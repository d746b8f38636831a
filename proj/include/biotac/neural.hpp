#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biotac/features.hpp"
#include "biotac/rng.hpp"
#include "biotac/tensor.hpp"

namespace biotac {

/// Thrown when training loss turns non-finite.
struct TrainingDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetSpec {
  enum class Kind { kNetworkB, kFeedForward, kTransformer };
  Kind kind = Kind::kFeedForward;
  WindowSpec window;
  int output_dim = 21;  // 23 for baseline replication

  // feed_forward: hidden widths with a per-layer activation.
  std::vector<int> widths;
  std::vector<Act> activations;
  double leaky_slope = 0.01;

  // network_b: three input-specific dense columns merged into a trunk.
  std::vector<int> position_widths{64, 64};
  std::vector<int> force_widths{128, 128};
  std::vector<int> temperature_widths{32, 32};
  std::vector<int> trunk_widths{560, 560, 560};

  // transformer encoder
  int n_layers = 2;
  int n_heads = 2;
  int embed_dim = 32;
  int hidden_dim = 64;
  double dropout_rate = 0.0;

  int input_dim() const { return input_size(window); }
  void validate() const;
};

struct TrainConfig {
  int batch_size = 256;
  double lr = 1e-3;
  int max_epochs = 50;
  int patience = 10;  // >= max_epochs disables early stopping
  std::uint64_t seed = 0;
};

struct NeuralModel {
  NetSpec spec;
  std::vector<Mat> params;  // canonical order fixed by the architecture walk
  ScalerPair scaler;
  std::vector<double> train_curve, val_curve;  // per-epoch Eq-loss values

  std::int64_t param_count() const;
};

/// Seeded uniform +/-sqrt(6/(fan_in+fan_out)) weight init, zero biases.
NeuralModel init_model(const NetSpec& spec, std::uint64_t seed);

/// Builds the forward graph for a batch (B x input_dim) and returns the
/// prediction node (B x output_dim). train_mode enables dropout.
int forward_graph(Tape& tape, const NeuralModel& model, const Mat& batch,
                  bool train_mode, Rng* dropout_rng,
                  std::vector<int>* param_nodes_out);

/// Eval-mode forward for a single normalized input vector.
std::vector<double> forward(const NeuralModel& model,
                            const std::vector<double>& x);

struct AdamState {
  std::vector<Mat> m, v;
  std::int64_t step = 0;
};

void adam_step(std::vector<Mat>& params, const std::vector<Mat>& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

/// Mini-batch training on the combined MAE+MSE loss with early stopping on
/// validation loss; parameters from the best validation epoch are kept.
NeuralModel train(const NetSpec& spec,
                  const std::vector<std::vector<double>>& x_train,
                  const std::vector<std::vector<double>>& y_train,
                  const std::vector<std::vector<double>>& x_val,
                  const std::vector<std::vector<double>>& y_val,
                  const TrainConfig& config);

std::int64_t param_count(const NetSpec& spec);
std::int64_t flops_count(const NetSpec& spec);

void save_neural(const NeuralModel& model, const std::string& path);
NeuralModel load_neural(const std::string& path);

NetSpec net_spec_from_json(const std::string& text, const WindowSpec& window,
                           int output_dim);

}  // namespace biotac
