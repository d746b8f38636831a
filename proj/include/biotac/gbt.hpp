#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biotac/features.hpp"

namespace biotac {

struct GbtParams {
  double eta = 0.3;
  double gamma = 0.0;            // minimum split gain
  int n_estimators = 100;
  int max_depth = 6;
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double max_delta_step = 0.0;    // 0 = unbounded leaf weights
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double colsample_bylevel = 1.0;
  double colsample_bynode = 1.0;
  enum class Objective { kMae, kSquared } objective = Objective::kMae;

  void validate() const;  // throws std::invalid_argument
};

struct TreeNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0;  // left child takes x[feature] < threshold
  int left = -1, right = -1;
  double weight = 0.0;     // leaf weight, unscaled by eta

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double eval(const std::vector<double>& x) const;
  int node_count() const { return static_cast<int>(nodes.size()); }
};

struct ChannelEnsemble {
  double base_score = 0.0;
  std::vector<Tree> trees;
};

/// One independent boosted-tree ensemble per output channel, trained on
/// normalized targets with a first-order MAE objective (gradient = sign
/// of the residual, hessian clamped to 1).
struct GbtModel {
  GbtParams params;
  std::vector<ChannelEnsemble> channels;
  WindowSpec window;
  ScalerPair scaler;

  int input_dim = 0;
  std::int64_t node_count() const;
};

ChannelEnsemble fit_channel(const std::vector<std::vector<double>>& X,
                            const std::vector<double>& y,
                            const GbtParams& params, std::uint64_t seed);

/// Fits one ensemble per target column with identical params and the same
/// seed stream, so identical columns produce identical ensembles.
GbtModel fit_all(const std::vector<std::vector<double>>& X,
                 const std::vector<std::vector<double>>& Y,
                 const GbtParams& params, std::uint64_t seed);

double predict_channel(const ChannelEnsemble& ens, double eta,
                       const std::vector<double>& x);
std::vector<double> predict(const GbtModel& model, const std::vector<double>& x);

void save_gbt(const GbtModel& model, const std::string& path);
GbtModel load_gbt(const std::string& path);

GbtParams gbt_params_from_json(const std::string& text);

}  // namespace biotac
