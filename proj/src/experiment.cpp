#include "biotac/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "biotac/rng.hpp"

namespace biotac {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_num(const std::string& cell, const std::string& what, int row) {
  try {
    std::size_t pos = 0;
    double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError("non-numeric " + what + " value '" + cell + "'", row);
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

/// Per-channel mean absolute error over rows; subset selects columns.
std::vector<double> per_channel_mae(const std::vector<std::vector<double>>& y,
                                    const std::vector<std::vector<double>>& yhat) {
  std::vector<double> out(y.empty() ? 0 : y[0].size(), 0.0);
  for (std::size_t r = 0; r < y.size(); ++r)
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] += std::abs(y[r][c] - yhat[r][c]);
  for (double& v : out) v /= static_cast<double>(y.size());
  return out;
}

double mean_subset(const std::vector<double>& v, const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += v[static_cast<std::size_t>(i)];
  return s / static_cast<double>(idx.size());
}

std::vector<int> all_indices(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return idx;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad experiment config: ") + e.what(), 0);
  }

  ExperimentConfig c;
  c.dataset_path = j.value("dataset", std::string());
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("folds")) {
    const auto& f = j["folds"];
    c.n_folds = f.value("n_folds", c.n_folds);
    c.chunk_size = f.value("chunk_size", c.chunk_size);
    c.chunks_per_split = f.value("chunks_per_split", c.chunks_per_split);
    c.fold_seed = f.value("seed", c.fold_seed);
  }
  c.seed = j.value("seed", c.seed);
  if (j.contains("window")) {
    c.window.combo = j["window"].value("combo", 1);
    c.window.include_temperature =
        j["window"].value("include_temperature", false);
  }
  if (c.window.combo < 1 || c.window.combo > 8)
    throw std::invalid_argument("experiment config: combo must be in [1, 8]");
  c.extended_channels = j.value("extended_channels", false);
  if (!j.contains("model"))
    throw std::invalid_argument("experiment config: missing model object");
  c.model_kind = j["model"].value("kind", std::string());
  if (c.model_kind != "gbt" && c.model_kind != "feed_forward" &&
      c.model_kind != "network_b" && c.model_kind != "transformer")
    throw std::invalid_argument("experiment config: unknown model kind '" +
                                c.model_kind + "'");
  c.model_json = j["model"].dump();
  if (j["model"].contains("train")) {
    const auto& t = j["model"]["train"];
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.lr = t.value("lr", c.train.lr);
    c.train.max_epochs = t.value("max_epochs", c.train.max_epochs);
    c.train.patience = t.value("patience", c.train.patience);
  }
  c.train.seed = c.seed;
  return c;
}

FoldData assemble_fold(const Dataset& dataset, const FoldPlan& plan, int fold,
                       const WindowSpec& window, const ChannelSet& channels) {
  if (fold < 0 || fold >= plan.n_folds)
    throw std::out_of_range("fold index out of range");
  FoldData data;
  auto fill = [&](const std::vector<int>& chunks,
                  std::vector<std::vector<double>>& xs,
                  std::vector<std::vector<double>>& ys) {
    for (int c : chunks) {
      std::int64_t lo = static_cast<std::int64_t>(c) * plan.chunk_size;
      std::int64_t hi = lo + plan.chunk_size;
      for (std::int64_t t = lo; t < hi; ++t) {
        auto x = build_window(dataset, t, window, plan.chunk_size);
        if (!x) continue;
        xs.push_back(std::move(*x));
        ys.push_back(channel_values(dataset.frames[static_cast<std::size_t>(t)],
                                    channels));
      }
    }
  };
  const FoldPlan::Fold& f = plan.folds[static_cast<std::size_t>(fold)];
  fill(f.train, data.x_train, data.y_train);
  fill(f.validation, data.x_val, data.y_val);
  fill(f.test, data.x_test, data.y_test);
  return data;
}

const ScalerPair& AnyModel::scaler() const {
  return kind == Kind::kGbt ? gbt.scaler : neural.scaler;
}

std::vector<double> AnyModel::predict_normalized(
    const std::vector<double>& xn) const {
  return kind == Kind::kGbt ? predict(gbt, xn) : forward(neural, xn);
}

std::vector<double> AnyModel::predict_raw(const std::vector<double>& x) const {
  const ScalerPair& s = scaler();
  return s.outputs.invert(predict_normalized(s.inputs.apply(x)));
}

AnyModel train_fold_model(const ExperimentConfig& config, const FoldData& fold) {
  if (fold.x_train.empty()) throw std::invalid_argument("empty training split");
  ScalerPair scaler;
  scaler.inputs.fit(fold.x_train);
  scaler.outputs.fit(fold.y_train);

  auto norm = [](const Scaler& s, const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(s.apply(r));
    return out;
  };
  auto xn = norm(scaler.inputs, fold.x_train);
  auto yn = norm(scaler.outputs, fold.y_train);

  AnyModel model;
  if (config.model_kind == "gbt") {
    model.kind = AnyModel::Kind::kGbt;
    model.gbt = fit_all(xn, yn, gbt_params_from_json(config.model_json),
                        config.seed);
    model.gbt.window = config.window;
    model.gbt.scaler = scaler;
  } else {
    model.kind = AnyModel::Kind::kNeural;
    int output_dim = static_cast<int>(fold.y_train[0].size());
    NetSpec spec =
        net_spec_from_json(config.model_json, config.window, output_dim);
    auto xvn = norm(scaler.inputs, fold.x_val);
    auto yvn = norm(scaler.outputs, fold.y_val);
    model.neural = train(spec, xn, yn, xvn, yvn, config.train);
    model.neural.scaler = scaler;
  }
  return model;
}

FoldResult score_fold(const AnyModel& model, const FoldData& fold,
                      int fold_index, const ExperimentConfig& config,
                      const ChannelSet& channels) {
  if (fold.x_test.empty()) throw std::invalid_argument("empty test split");
  const ScalerPair& s = model.scaler();

  std::vector<std::vector<double>> yn, yn_hat, y_hat;
  yn.reserve(fold.x_test.size());
  for (std::size_t i = 0; i < fold.x_test.size(); ++i) {
    std::vector<double> pn = model.predict_normalized(s.inputs.apply(fold.x_test[i]));
    yn.push_back(s.outputs.apply(fold.y_test[i]));
    y_hat.push_back(s.outputs.invert(pn));
    yn_hat.push_back(std::move(pn));
  }

  FoldResult r;
  r.fold = fold_index;
  r.model_kind = config.model_kind;
  r.combo = config.window.combo;
  r.n_train = static_cast<double>(fold.x_train.size());
  r.n_test = static_cast<double>(fold.x_test.size());
  r.channel_names = channels.names;
  r.nmae_channels = per_channel_mae(yn, yn_hat);
  r.mae_channels = per_channel_mae(fold.y_test, y_hat);
  std::vector<int> all = all_indices(channels.size());
  r.nmae_all = mean_subset(r.nmae_channels, all);
  r.mae_all = mean_subset(r.mae_channels, all);
  r.nmae_electrodes = mean_subset(r.nmae_channels, channels.electrode_mask);
  r.mae_electrodes = mean_subset(r.mae_channels, channels.electrode_mask);
  return r;
}

std::vector<FoldResult> run_experiment(const Dataset& dataset,
                                       const FoldPlan& plan,
                                       const ExperimentConfig& config) {
  ChannelSet channels = config.extended_channels ? ChannelSet::extended23()
                                                 : ChannelSet::standard21();
  std::vector<FoldResult> results;
  for (int f = 0; f < plan.n_folds; ++f) {
    FoldData data = assemble_fold(dataset, plan, f, config.window, channels);
    AnyModel model = train_fold_model(config, data);
    results.push_back(score_fold(model, data, f, config, channels));
  }
  return results;
}

void write_results_csv(const std::vector<FoldResult>& results,
                       const std::string& path) {
  if (results.empty()) throw std::invalid_argument("no fold results to write");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write results file: " + path);
  out << "model,combo,fold,n_train,n_test,nmae_all,nmae_electrodes,mae_all,"
         "mae_electrodes";
  for (const std::string& n : results[0].channel_names) out << ",nmae_" << n;
  for (const std::string& n : results[0].channel_names) out << ",mae_" << n;
  out << "\n";
  for (const FoldResult& r : results) {
    out << r.model_kind << "," << r.combo << "," << r.fold << ","
        << fmt(r.n_train) << "," << fmt(r.n_test) << "," << fmt(r.nmae_all)
        << "," << fmt(r.nmae_electrodes) << "," << fmt(r.mae_all) << ","
        << fmt(r.mae_electrodes);
    for (double v : r.nmae_channels) out << "," << fmt(v);
    for (double v : r.mae_channels) out << "," << fmt(v);
    out << "\n";
  }
}

std::vector<FoldResult> load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty results file", 0);
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 9 || header[0] != "model")
    throw ParseError("unrecognized results header", 0);
  std::vector<std::string> channel_names;
  for (std::size_t i = 9; i < header.size(); ++i) {
    if (header[i].rfind("nmae_", 0) == 0)
      channel_names.push_back(header[i].substr(5));
    else
      break;
  }
  std::size_t expected = 9 + 2 * channel_names.size();

  std::vector<FoldResult> results;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != expected)
      throw ParseError("wrong column count in results row", row);
    FoldResult r;
    r.model_kind = cells[0];
    r.combo = static_cast<int>(parse_num(cells[1], "combo", row));
    r.fold = static_cast<int>(parse_num(cells[2], "fold", row));
    r.n_train = parse_num(cells[3], "n_train", row);
    r.n_test = parse_num(cells[4], "n_test", row);
    r.nmae_all = parse_num(cells[5], "nmae_all", row);
    r.nmae_electrodes = parse_num(cells[6], "nmae_electrodes", row);
    r.mae_all = parse_num(cells[7], "mae_all", row);
    r.mae_electrodes = parse_num(cells[8], "mae_electrodes", row);
    r.channel_names = channel_names;
    for (std::size_t i = 0; i < channel_names.size(); ++i)
      r.nmae_channels.push_back(parse_num(cells[9 + i], "nmae channel", row));
    for (std::size_t i = 0; i < channel_names.size(); ++i)
      r.mae_channels.push_back(
          parse_num(cells[9 + channel_names.size() + i], "mae channel", row));
    results.push_back(std::move(r));
  }
  if (results.empty()) throw ParseError("results file has no rows", 0);
  return results;
}

TTestReport compare_results(const std::vector<FoldResult>& a,
                            const std::vector<FoldResult>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("result sets must pair up fold by fold");
  std::vector<double> diffs;
  double n_train = 0.0, n_test = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].fold != b[i].fold)
      throw std::invalid_argument("fold indices do not match between runs");
    diffs.push_back(a[i].nmae_all - b[i].nmae_all);
    n_train += a[i].n_train;
    n_test += a[i].n_test;
  }
  n_train /= static_cast<double>(a.size());
  n_test /= static_cast<double>(a.size());
  return corrected_ttest(diffs, n_train, n_test);
}

SweepCurve fixed_temperature_sweep(const AnyModel& model,
                                   const std::vector<std::vector<double>>& x_raw,
                                   const std::vector<std::vector<double>>& y_raw,
                                   const std::vector<double>& grid) {
  if (x_raw.empty() || x_raw.size() != y_raw.size())
    throw std::invalid_argument("sweep: empty or mismatched evaluation set");
  if (grid.empty()) throw std::invalid_argument("sweep: empty temperature grid");
  const ScalerPair& s = model.scaler();

  auto evaluate = [&](bool clamp, double temperature) {
    double total = 0.0;
    std::size_t n_ch = y_raw[0].size();
    for (std::size_t i = 0; i < x_raw.size(); ++i) {
      std::vector<double> x = x_raw[i];
      if (clamp) x.back() = temperature;
      std::vector<double> pn = model.predict_normalized(s.inputs.apply(x));
      std::vector<double> yn = s.outputs.apply(y_raw[i]);
      for (std::size_t c = 0; c < n_ch; ++c) total += std::abs(yn[c] - pn[c]);
    }
    return total / static_cast<double>(x_raw.size() * y_raw[0].size());
  };

  SweepCurve curve;
  curve.true_temperature_nmae = evaluate(false, 0.0);
  curve.best_fixed_nmae = std::numeric_limits<double>::infinity();
  for (double g : grid) {
    double e = evaluate(true, g);
    curve.points.push_back({g, e});
    if (e < curve.best_fixed_nmae) {
      curve.best_fixed_nmae = e;
      curve.best_temperature = g;
    }
  }
  return curve;
}

LatencyReport bench_latency(
    const std::function<std::vector<double>(const std::vector<double>&)>& fn,
    int input_size, int n_inputs, std::uint64_t seed) {
  if (n_inputs <= 0) throw std::invalid_argument("empty benchmark");
  Rng rng(seed);
  std::vector<std::vector<double>> inputs(static_cast<std::size_t>(n_inputs));
  for (auto& x : inputs) {
    x.resize(static_cast<std::size_t>(input_size));
    for (double& v : x) v = rng.normal();
  }
  for (int i = 0; i < 10; ++i) fn(inputs[static_cast<std::size_t>(i % n_inputs)]);

  LatencyReport rep;
  rep.n = n_inputs;
  rep.min_ms = std::numeric_limits<double>::infinity();
  using clock = std::chrono::steady_clock;
  for (const auto& x : inputs) {
    auto t0 = clock::now();
    volatile double sink = fn(x)[0];
    (void)sink;
    auto t1 = clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rep.mean_ms += ms;
    rep.min_ms = std::min(rep.min_ms, ms);
    rep.max_ms = std::max(rep.max_ms, ms);
  }
  rep.mean_ms /= static_cast<double>(n_inputs);
  return rep;
}

}  // namespace biotac
