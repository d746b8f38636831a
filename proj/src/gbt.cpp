#include "biotac/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "biotac/rng.hpp"

namespace biotac {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Builder {
  const std::vector<std::vector<double>>& X;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const std::vector<double>& resid;
  const GbtParams& params;
  Rng& rng;
  std::vector<int> tree_features;  // colsample_bytree survivors
  Tree tree;

  std::vector<int> sample_features(const std::vector<int>& from, double frac) {
    if (frac >= 1.0) return from;
    std::vector<int> pool = from;
    rng.shuffle(pool);
    std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(frac * static_cast<double>(from.size()))));
    pool.resize(std::min(keep, pool.size()));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  double leaf_weight(const std::vector<int>& rows, double g_sum,
                     double h_sum) const {
    double w;
    if (params.objective == GbtParams::Objective::kMae) {
      // Unit-magnitude sign gradients saturate near the optimum, leaving
      // predictions oscillating at the eta scale. Renew the leaf with the
      // MAE-optimal constant for its rows instead (the split search still
      // uses the gradient statistics).
      std::vector<double> rs;
      rs.reserve(rows.size());
      for (int r : rows) rs.push_back(resid[static_cast<std::size_t>(r)]);
      w = rs.empty() ? 0.0 : median(std::move(rs));
    } else {
      w = h_sum > 0.0 ? -g_sum / h_sum : 0.0;
    }
    if (params.max_delta_step > 0.0)
      w = std::clamp(w, -params.max_delta_step, params.max_delta_step);
    return w;
  }

  int build(std::vector<int>& rows, int depth,
            const std::vector<int>& level_features) {
    double g_sum = 0.0, h_sum = 0.0;
    for (int r : rows) {
      g_sum += grad[static_cast<std::size_t>(r)];
      h_sum += hess[static_cast<std::size_t>(r)];
    }

    bool can_split = depth < params.max_depth && rows.size() >= 2 &&
                     h_sum >= 2.0 * params.min_child_weight;
    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    if (can_split) {
      double parent_score = h_sum > 0.0 ? g_sum * g_sum / h_sum : 0.0;
      std::vector<int> node_features =
          sample_features(level_features, params.colsample_bynode);
      std::vector<std::size_t> order(rows.size());
      for (int f : node_features) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          double va = X[static_cast<std::size_t>(rows[a])][static_cast<std::size_t>(f)];
          double vb = X[static_cast<std::size_t>(rows[b])][static_cast<std::size_t>(f)];
          if (va != vb) return va < vb;
          return rows[a] < rows[b];  // stable, deterministic
        });
        double gl = 0.0, hl = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          int r = rows[order[i]];
          gl += grad[static_cast<std::size_t>(r)];
          hl += hess[static_cast<std::size_t>(r)];
          double x_here = X[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
          double x_next =
              X[static_cast<std::size_t>(rows[order[i + 1]])][static_cast<std::size_t>(f)];
          if (x_here == x_next) continue;  // no candidate between equal values
          double hr = h_sum - hl, gr = g_sum - gl;
          if (hl < params.min_child_weight || hr < params.min_child_weight)
            continue;
          double gain = gl * gl / hl + gr * gr / hr - parent_score;
          // Strict improvement keeps the first (lowest feature index, then
          // lowest threshold) of any equal-gain candidates.
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = f;
            best_threshold = 0.5 * (x_here + x_next);
          }
        }
      }
      if (best_feature >= 0 && best_gain <= params.gamma) best_feature = -1;
      if (best_feature >= 0 && best_gain <= 1e-12) best_feature = -1;
    }

    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (best_feature < 0) {
      tree.nodes[static_cast<std::size_t>(idx)].weight =
          leaf_weight(rows, g_sum, h_sum);
      return idx;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      if (X[static_cast<std::size_t>(r)][static_cast<std::size_t>(best_feature)] <
          best_threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }
    std::vector<int> child_features =
        sample_features(tree_features, params.colsample_bylevel);
    tree.nodes[static_cast<std::size_t>(idx)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(idx)].threshold = best_threshold;
    int l = build(left_rows, depth + 1, child_features);
    int r = build(right_rows, depth + 1, child_features);
    tree.nodes[static_cast<std::size_t>(idx)].left = l;
    tree.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }
};

}  // namespace

void GbtParams::validate() const {
  if (eta <= 0.0 || eta > 1.0)
    throw std::invalid_argument("gbt params: eta must be in (0, 1]");
  if (max_depth < 1) throw std::invalid_argument("gbt params: max_depth >= 1");
  if (n_estimators < 0)
    throw std::invalid_argument("gbt params: n_estimators >= 0");
  auto frac = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!frac(subsample) || !frac(colsample_bytree) || !frac(colsample_bylevel) ||
      !frac(colsample_bynode))
    throw std::invalid_argument("gbt params: sampling fractions in (0, 1]");
}

double Tree::eval(const std::vector<double>& x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].weight;
}

ChannelEnsemble fit_channel(const std::vector<std::vector<double>>& X,
                            const std::vector<double>& y,
                            const GbtParams& params, std::uint64_t seed) {
  params.validate();
  if (X.empty() || X.size() != y.size())
    throw std::invalid_argument("gbt fit: empty input or size mismatch");
  std::size_t n = X.size();
  std::size_t d = X[0].size();

  ChannelEnsemble ens;
  ens.base_score = params.objective == GbtParams::Objective::kMae
                       ? median(y)
                       : std::accumulate(y.begin(), y.end(), 0.0) /
                             static_cast<double>(n);

  std::vector<double> pred(n, ens.base_score);
  std::vector<double> grad(n), hess(n, 1.0), resid(n);
  Rng rng(seed);
  std::vector<int> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);

  for (int m = 0; m < params.n_estimators; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      double r = pred[i] - y[i];
      resid[i] = -r;
      grad[i] = params.objective == GbtParams::Objective::kMae
                    ? (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0))
                    : r;
    }

    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    if (params.subsample < 1.0) {
      rng.shuffle(rows);
      std::size_t keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(params.subsample *
                                                   static_cast<double>(n))));
      rows.resize(std::min(keep, rows.size()));
      std::sort(rows.begin(), rows.end());
    }

    Builder b{X, grad, hess, resid, params, rng, {}, {}};
    b.tree_features = b.sample_features(all_features, params.colsample_bytree);
    std::vector<int> level0 =
        b.sample_features(b.tree_features, params.colsample_bylevel);
    b.build(rows, 0, level0);
    for (std::size_t i = 0; i < n; ++i) pred[i] += params.eta * b.tree.eval(X[i]);
    ens.trees.push_back(std::move(b.tree));
  }
  return ens;
}

GbtModel fit_all(const std::vector<std::vector<double>>& X,
                 const std::vector<std::vector<double>>& Y,
                 const GbtParams& params, std::uint64_t seed) {
  if (X.empty() || Y.empty() || X.size() != Y.size())
    throw std::invalid_argument("gbt fit: empty input or size mismatch");
  GbtModel model;
  model.params = params;
  model.input_dim = static_cast<int>(X[0].size());
  std::size_t n_channels = Y[0].size();
  std::vector<double> column(X.size());
  for (std::size_t c = 0; c < n_channels; ++c) {
    for (std::size_t i = 0; i < X.size(); ++i) column[i] = Y[i][c];
    model.channels.push_back(fit_channel(X, column, params, seed));
  }
  return model;
}

double predict_channel(const ChannelEnsemble& ens, double eta,
                       const std::vector<double>& x) {
  double v = ens.base_score;
  for (const Tree& t : ens.trees) v += eta * t.eval(x);
  return v;
}

std::vector<double> predict(const GbtModel& model, const std::vector<double>& x) {
  if (model.input_dim > 0 && static_cast<int>(x.size()) != model.input_dim)
    throw std::invalid_argument("gbt predict: input dimension mismatch");
  std::vector<double> out;
  out.reserve(model.channels.size());
  for (const ChannelEnsemble& ens : model.channels)
    out.push_back(predict_channel(ens, model.params.eta, x));
  return out;
}

std::int64_t GbtModel::node_count() const {
  std::int64_t total = 0;
  for (const ChannelEnsemble& ens : channels)
    for (const Tree& t : ens.trees) total += t.node_count();
  return total;
}

namespace {

nlohmann::json node_to_json(const Tree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return {{"weight", n.weight}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(t, n.left)},
          {"right", node_to_json(t, n.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& t) {
  int idx = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("feature")) {
    t.nodes[static_cast<std::size_t>(idx)].feature = j.at("feature").get<int>();
    t.nodes[static_cast<std::size_t>(idx)].threshold =
        j.at("threshold").get<double>();
    int l = node_from_json(j.at("left"), t);
    int r = node_from_json(j.at("right"), t);
    t.nodes[static_cast<std::size_t>(idx)].left = l;
    t.nodes[static_cast<std::size_t>(idx)].right = r;
  } else {
    t.nodes[static_cast<std::size_t>(idx)].weight = j.at("weight").get<double>();
  }
  return idx;
}

nlohmann::json params_to_json(const GbtParams& p) {
  return {{"eta", p.eta},
          {"gamma", p.gamma},
          {"n_estimators", p.n_estimators},
          {"max_depth", p.max_depth},
          {"min_child_weight", p.min_child_weight},
          {"max_delta_step", p.max_delta_step},
          {"subsample", p.subsample},
          {"colsample_bytree", p.colsample_bytree},
          {"colsample_bylevel", p.colsample_bylevel},
          {"colsample_bynode", p.colsample_bynode},
          {"objective",
           p.objective == GbtParams::Objective::kMae ? "mae" : "squared"}};
}

GbtParams params_from_json(const nlohmann::json& j) {
  GbtParams p;
  p.eta = j.value("eta", p.eta);
  p.gamma = j.value("gamma", p.gamma);
  p.n_estimators = j.value("n_estimators", p.n_estimators);
  p.max_depth = j.value("max_depth", p.max_depth);
  p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
  p.max_delta_step = j.value("max_delta_step", p.max_delta_step);
  p.subsample = j.value("subsample", p.subsample);
  p.colsample_bytree = j.value("colsample_bytree", p.colsample_bytree);
  p.colsample_bylevel = j.value("colsample_bylevel", p.colsample_bylevel);
  p.colsample_bynode = j.value("colsample_bynode", p.colsample_bynode);
  p.objective = j.value("objective", std::string("mae")) == "squared"
                    ? GbtParams::Objective::kSquared
                    : GbtParams::Objective::kMae;
  p.validate();
  return p;
}

}  // namespace

GbtParams gbt_params_from_json(const std::string& text) {
  return params_from_json(nlohmann::json::parse(text));
}

void save_gbt(const GbtModel& model, const std::string& path) {
  nlohmann::json j;
  j["model"] = "gbt";
  j["params"] = params_to_json(model.params);
  j["input_dim"] = model.input_dim;
  j["window"] = {{"combo", model.window.combo},
                 {"include_temperature", model.window.include_temperature}};
  j["scaler"] = nlohmann::json::parse(scaler_pair_to_json(model.scaler));
  j["channels"] = nlohmann::json::array();
  for (const ChannelEnsemble& ens : model.channels) {
    nlohmann::json cj;
    cj["base_score"] = ens.base_score;
    cj["trees"] = nlohmann::json::array();
    for (const Tree& t : ens.trees) cj["trees"].push_back(node_to_json(t, 0));
    j["channels"].push_back(std::move(cj));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump() << "\n";
}

GbtModel load_gbt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("model", std::string()) != "gbt")
    throw std::runtime_error("not a gbt model file: " + path);
  GbtModel model;
  model.params = params_from_json(j.at("params"));
  model.input_dim = j.value("input_dim", 0);
  model.window.combo = j.at("window").at("combo").get<int>();
  model.window.include_temperature =
      j.at("window").at("include_temperature").get<bool>();
  model.scaler = scaler_pair_from_json(j.at("scaler").dump());
  for (const auto& cj : j.at("channels")) {
    ChannelEnsemble ens;
    ens.base_score = cj.at("base_score").get<double>();
    for (const auto& tj : cj.at("trees")) {
      Tree t;
      node_from_json(tj, t);
      ens.trees.push_back(std::move(t));
    }
    model.channels.push_back(std::move(ens));
  }
  return model;
}

}  // namespace biotac
