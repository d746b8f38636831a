#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biotac/calibration.hpp"
#include "biotac/dataio.hpp"
#include "biotac/experiment.hpp"
#include "biotac/oracle.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

bool use_color() {
  if (std::getenv("NO_COLOR") != nullptr) return false;
  return true;
}

void diag(const std::string& msg) {
  if (use_color())
    std::cerr << "\033[31merror:\033[0m " << msg << "\n";
  else
    std::cerr << "error: " << msg << "\n";
}

void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("file not found: " + path);
}

struct SavedModel {
  biotac::AnyModel model;
  int input_dim = 0;
};

SavedModel load_any_model(const std::string& path) {
  require_file(path);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  in.close();
  nlohmann::json j = nlohmann::json::parse(header);
  SavedModel sm;
  std::string kind = j.value("model", std::string());
  if (kind == "gbt") {
    sm.model.kind = biotac::AnyModel::Kind::kGbt;
    sm.model.gbt = biotac::load_gbt(path);
    sm.input_dim = sm.model.gbt.input_dim;
  } else if (kind == "neural") {
    sm.model.kind = biotac::AnyModel::Kind::kNeural;
    sm.model.neural = biotac::load_neural(path);
    sm.input_dim = sm.model.neural.spec.input_dim();
  } else {
    throw std::runtime_error("unrecognized model file: " + path);
  }
  return sm;
}

std::string save_any_model(const biotac::AnyModel& model,
                           const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/model.bin";
  if (model.kind == biotac::AnyModel::Kind::kGbt)
    biotac::save_gbt(model.gbt, path);
  else
    biotac::save_neural(model.neural, path);
  return path;
}

nlohmann::json ttest_json(const biotac::TTestReport& t) {
  return {{"mean_diff", t.mean_diff}, {"t_statistic", t.t_statistic},
          {"df", t.df},               {"p_value", t.p_value},
          {"k", t.k},                 {"n_train", t.n_train},
          {"n_test", t.n_test}};
}

int cmd_gen_data(const std::string& config_path, const std::string& out_path) {
  require_file(config_path);
  biotac::OracleConfig cfg = biotac::load_oracle_config(config_path);
  biotac::ElectrodeLayout layout = biotac::default_layout();
  biotac::Dataset ds;
  ds.frames = biotac::generate_dataset(cfg, layout);
  ds.meta.source = "surrogate";
  biotac::write_dataset(ds, out_path);
  std::cout << "wrote " << ds.size() << " frames to " << out_path << "\n";
  return 0;
}

int cmd_calibrate(const std::string& data_path, const std::string& layout_path,
                  int steps, std::uint64_t seed, const std::string& out_path,
                  const std::string& trace_path) {
  require_file(data_path);
  require_file(layout_path);
  biotac::Dataset ds = biotac::read_dataset(data_path);
  biotac::ElectrodeLayout layout = biotac::load_layout(layout_path);
  std::vector<biotac::SensorFrame> probes = biotac::select_contact_probes(
      ds.frames, 0.3, 3.0, biotac::ProbeMode::kLightTouchEnd, layout);
  std::vector<biotac::Vec3> points;
  for (const auto& f : probes) points.push_back(f.position_mm);
  biotac::CalibrationResult res =
      biotac::calibrate(points, layout.skin_surface, {}, steps, seed);
  std::cout << "probes: " << points.size() << "\n"
            << "initial mean |distance|: " << res.report.initial_mean_dist_mm
            << " mm\n"
            << "final mean |distance|:   " << res.report.final_mean_dist_mm
            << " mm\n";
  if (!out_path.empty()) biotac::save_offset(res.offset, out_path);
  if (!trace_path.empty()) biotac::save_trace_csv(res.report, trace_path);
  return 0;
}

struct LoadedExperiment {
  biotac::ExperimentConfig config;
  biotac::Dataset dataset;
  biotac::FoldPlan plan;
};

LoadedExperiment load_experiment(const std::string& config_path) {
  require_file(config_path);
  LoadedExperiment ex;
  ex.config = biotac::load_experiment_config(config_path);
  require_file(ex.config.dataset_path);
  ex.dataset = biotac::read_dataset(ex.config.dataset_path);
  ex.plan = biotac::make_fold_plan(ex.dataset.size(), ex.config.n_folds,
                                   ex.config.chunk_size,
                                   ex.config.chunks_per_split,
                                   ex.config.fold_seed);
  return ex;
}

int cmd_train(const std::string& config_path) {
  LoadedExperiment ex = load_experiment(config_path);
  biotac::ChannelSet channels = ex.config.extended_channels
                                    ? biotac::ChannelSet::extended23()
                                    : biotac::ChannelSet::standard21();
  biotac::FoldData fold = biotac::assemble_fold(ex.dataset, ex.plan, 0,
                                                ex.config.window, channels);
  biotac::AnyModel model = biotac::train_fold_model(ex.config, fold);
  std::string path = save_any_model(model, ex.config.output_dir);
  biotac::FoldResult r =
      biotac::score_fold(model, fold, 0, ex.config, channels);
  std::cout << "model written to " << path << "\n"
            << "fold 0 normalized MAE (all channels): " << r.nmae_all << "\n"
            << "fold 0 normalized MAE (electrodes):   " << r.nmae_electrodes
            << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path) {
  LoadedExperiment ex = load_experiment(config_path);
  biotac::ChannelSet channels = ex.config.extended_channels
                                    ? biotac::ChannelSet::extended23()
                                    : biotac::ChannelSet::standard21();
  std::vector<biotac::FoldResult> results;
  std::vector<double> naive_nmae;
  for (int f = 0; f < ex.plan.n_folds; ++f) {
    biotac::FoldData fold = biotac::assemble_fold(ex.dataset, ex.plan, f,
                                                  ex.config.window, channels);
    biotac::AnyModel model = biotac::train_fold_model(ex.config, fold);
    if (f == 0) save_any_model(model, ex.config.output_dir);
    results.push_back(
        biotac::score_fold(model, fold, f, ex.config, channels));

    // Naive constant-mean reference on the same normalized scale.
    const biotac::ScalerPair& s = model.scaler();
    std::vector<std::vector<double>> yn_train, yn_test;
    for (const auto& y : fold.y_train) yn_train.push_back(s.outputs.apply(y));
    for (const auto& y : fold.y_test) yn_test.push_back(s.outputs.apply(y));
    biotac::NaiveBaseline naive = biotac::NaiveBaseline::fit(yn_train);
    double total = 0.0;
    for (const auto& y : yn_test)
      for (std::size_t c = 0; c < y.size(); ++c)
        total += std::abs(y[c] - naive.channel_means[c]);
    naive_nmae.push_back(total /
                         static_cast<double>(yn_test.size() * channels.size()));
  }

  std::filesystem::create_directories(ex.config.output_dir);
  std::string results_path = ex.config.output_dir + "/results.csv";
  biotac::write_results_csv(results, results_path);

  std::vector<double> diffs;
  double n_train = 0, n_test = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    diffs.push_back(results[i].nmae_all - naive_nmae[i]);
    n_train += results[i].n_train;
    n_test += results[i].n_test;
  }
  biotac::TTestReport vs_naive = biotac::corrected_ttest(
      diffs, n_train / static_cast<double>(results.size()),
      n_test / static_cast<double>(results.size()));

  nlohmann::json summary;
  summary["model"] = ex.config.model_kind;
  summary["combo"] = ex.config.window.combo;
  summary["n_folds"] = ex.plan.n_folds;
  summary["results_csv"] = results_path;
  double mean_nmae = 0.0;
  nlohmann::json folds = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    folds.push_back({{"fold", results[i].fold},
                     {"nmae_all", results[i].nmae_all},
                     {"nmae_electrodes", results[i].nmae_electrodes},
                     {"mae_all", results[i].mae_all},
                     {"naive_nmae", naive_nmae[i]}});
    mean_nmae += results[i].nmae_all;
  }
  summary["folds"] = folds;
  summary["mean_nmae_all"] = mean_nmae / static_cast<double>(results.size());
  summary["ttest_vs_naive"] = ttest_json(vs_naive);
  std::string summary_path = ex.config.output_dir + "/summary.json";
  std::ofstream out(summary_path);
  out << summary.dump(2) << "\n";
  std::cout << "mean normalized MAE: " << summary["mean_nmae_all"] << "\n"
            << "summary written to " << summary_path << "\n";
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
  require_file(path_a);
  require_file(path_b);
  biotac::TTestReport t = biotac::compare_results(
      biotac::load_results_csv(path_a), biotac::load_results_csv(path_b));
  std::cout << ttest_json(t).dump(2) << "\n";
  return 0;
}

int cmd_bench(const std::string& model_path, int n_inputs,
              std::uint64_t seed) {
  SavedModel sm = load_any_model(model_path);
  biotac::LatencyReport rep = biotac::bench_latency(
      [&](const std::vector<double>& x) {
        return sm.model.predict_normalized(x);
      },
      sm.input_dim, n_inputs, seed);
  std::cout << "inputs: " << rep.n << "\n"
            << "mean: " << rep.mean_ms << " ms\n"
            << "min:  " << rep.min_ms << " ms\n"
            << "max:  " << rep.max_ms << " ms\n";
  return 0;
}

int cmd_sweep_temp(const std::string& config_path, int grid_size) {
  LoadedExperiment ex = load_experiment(config_path);
  if (!ex.config.window.include_temperature)
    throw std::invalid_argument(
        "sweep-temp requires window.include_temperature = true");
  biotac::ChannelSet channels = ex.config.extended_channels
                                    ? biotac::ChannelSet::extended23()
                                    : biotac::ChannelSet::standard21();
  biotac::FoldData fold = biotac::assemble_fold(ex.dataset, ex.plan, 0,
                                                ex.config.window, channels);
  biotac::AnyModel model = biotac::train_fold_model(ex.config, fold);

  double lo = 1e300, hi = -1e300;
  for (const auto& f : ex.dataset.frames) {
    lo = std::min(lo, f.tdc);
    hi = std::max(hi, f.tdc);
  }
  std::vector<double> grid;
  for (int i = 0; i < grid_size; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                            static_cast<double>(std::max(1, grid_size - 1)));
  biotac::SweepCurve curve =
      biotac::fixed_temperature_sweep(model, fold.x_test, fold.y_test, grid);

  std::filesystem::create_directories(ex.config.output_dir);
  std::string curve_path = ex.config.output_dir + "/temperature_sweep.csv";
  std::ofstream out(curve_path);
  out << "temperature,nmae\n";
  for (const auto& p : curve.points)
    out << p.temperature << "," << p.nmae << "\n";
  std::cout << "true-temperature normalized MAE: "
            << curve.true_temperature_nmae << "\n"
            << "best fixed temperature: " << curve.best_temperature
            << " (normalized MAE " << curve.best_fixed_nmae << ")\n"
            << "curve written to " << curve_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BioTac tactile regression toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, data_path, layout_path, out_path, trace_path;
  std::string path_a, path_b, model_path;
  int steps = 1000, n_inputs = 100, grid_size = 25;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("config", config_path, "oracle config JSON")->required();
  gen->add_option("output", out_path, "output dataset CSV")->required();

  auto* cal = app.add_subcommand("calibrate", "Fit a pose offset from probes");
  cal->add_option("data", data_path, "dataset CSV")->required();
  cal->add_option("layout", layout_path, "electrode layout JSON")->required();
  cal->add_option("--steps", steps, "hill-climbing steps");
  cal->add_option("--seed", seed, "random seed");
  cal->add_option("--out", out_path, "write fitted offset JSON here");
  cal->add_option("--trace", trace_path, "write per-step distance CSV here");

  auto* train = app.add_subcommand("train", "Train a model on fold 0");
  train->add_option("config", config_path, "experiment JSON")->required();

  auto* eval = app.add_subcommand("evaluate", "Run full cross-validation");
  eval->add_option("config", config_path, "experiment JSON")->required();

  auto* cmp = app.add_subcommand("compare", "Corrected paired t-test A vs B");
  cmp->add_option("results_a", path_a, "results CSV A")->required();
  cmp->add_option("results_b", path_b, "results CSV B")->required();

  auto* bench = app.add_subcommand("bench", "Benchmark per-call latency");
  bench->add_option("model", model_path, "model file")->required();
  bench->add_option("--inputs", n_inputs, "number of timed inputs");
  bench->add_option("--seed", seed, "random seed");

  auto* sweep = app.add_subcommand("sweep-temp", "Fixed-temperature sweep");
  sweep->add_option("config", config_path, "experiment JSON")->required();
  sweep->add_option("--grid", grid_size, "grid points across the tdc range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(config_path, out_path);
    if (cal->parsed())
      return cmd_calibrate(data_path, layout_path, steps, seed, out_path,
                           trace_path);
    if (train->parsed()) return cmd_train(config_path);
    if (eval->parsed()) return cmd_evaluate(config_path);
    if (cmp->parsed()) return cmd_compare(path_a, path_b);
    if (bench->parsed()) return cmd_bench(model_path, n_inputs, seed);
    if (sweep->parsed()) return cmd_sweep_temp(config_path, grid_size);
  } catch (const biotac::TrainingDiverged& e) {
    diag(e.what());
    return 3;
  } catch (const biotac::ParseError& e) {
    diag(std::string(e.what()) +
         (e.row > 0 ? " (row " + std::to_string(e.row) + ")" : ""));
    return 2;
  } catch (const std::invalid_argument& e) {
    diag(e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    diag(e.what());
    return 2;
  } catch (const std::exception& e) {
    diag(e.what());
    return 3;
  }
  return 1;
}
