#include "biotac/dataio.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "biotac/rng.hpp"

namespace biotac {

namespace {

std::string csv_header() {
  std::string h = "tick,cycle_id,x_mm,y_mm,z_mm,fx_n,fy_n,fz_n,tdc,tac,pdc,pac0,pac1";
  for (int i = 1; i <= kNumElectrodes; ++i) h += ",e" + std::to_string(i);
  return h;
}

/// Shortest-round-trip-safe formatting; stable across rewrite cycles.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_cell(const std::string& s, int row) {
  const char* c = s.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  if (end == c || *end != '\0')
    throw ParseError("non-numeric cell '" + s + "' at row " + std::to_string(row),
                     row);
  return v;
}

}  // namespace

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path, 0);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ParseError("header mismatch", 0);

  Dataset ds;
  ds.meta.source = path;
  int row = 0;
  const std::size_t ncols = 13 + kNumElectrodes;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != ncols)
      throw ParseError("expected " + std::to_string(ncols) + " columns at row " +
                           std::to_string(row),
                       row);
    SensorFrame f;
    std::size_t k = 0;
    f.tick = static_cast<std::int64_t>(parse_cell(cells[k++], row));
    f.cycle_id = static_cast<std::int64_t>(parse_cell(cells[k++], row));
    f.position_mm = {parse_cell(cells[k], row), parse_cell(cells[k + 1], row),
                     parse_cell(cells[k + 2], row)};
    k += 3;
    f.force_n = {parse_cell(cells[k], row), parse_cell(cells[k + 1], row),
                 parse_cell(cells[k + 2], row)};
    k += 3;
    f.tdc = parse_cell(cells[k++], row);
    f.tac = parse_cell(cells[k++], row);
    f.pdc = parse_cell(cells[k++], row);
    f.pac0 = parse_cell(cells[k++], row);
    f.pac1 = parse_cell(cells[k++], row);
    for (int i = 0; i < kNumElectrodes; ++i)
      f.electrodes[i] = parse_cell(cells[k++], row);
    if (f.tick != row - 1)
      throw ParseError("non-contiguous tick at row " + std::to_string(row), row);
    ds.frames.push_back(f);
  }
  if (ds.frames.empty()) throw ParseError("dataset has no rows", 0);
  return ds;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << csv_header() << "\n";
  for (const SensorFrame& f : dataset.frames) {
    out << f.tick << ',' << f.cycle_id << ',' << fmt(f.position_mm.x) << ','
        << fmt(f.position_mm.y) << ',' << fmt(f.position_mm.z) << ','
        << fmt(f.force_n.x) << ',' << fmt(f.force_n.y) << ','
        << fmt(f.force_n.z) << ',' << fmt(f.tdc) << ',' << fmt(f.tac) << ','
        << fmt(f.pdc) << ',' << fmt(f.pac0) << ',' << fmt(f.pac1);
    for (int i = 0; i < kNumElectrodes; ++i) out << ',' << fmt(f.electrodes[i]);
    out << "\n";
  }
}

FoldPlan make_fold_plan(std::int64_t dataset_len, int n_folds,
                        std::int64_t chunk_size, int chunks_per_split,
                        std::uint64_t seed) {
  if (n_folds < 1 || chunk_size < 1 || chunks_per_split < 1)
    throw std::invalid_argument("fold plan: sizes must be positive");
  if (2 * static_cast<std::int64_t>(chunks_per_split) * chunk_size > dataset_len)
    throw std::invalid_argument(
        "fold plan: dataset too short for test+validation chunks");
  int n_chunks = static_cast<int>(dataset_len / chunk_size);
  if (n_chunks <= 2 * chunks_per_split)
    throw std::invalid_argument("fold plan: no chunks left for training");

  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.chunk_size = chunk_size;
  plan.chunks_per_split = chunks_per_split;
  plan.n_chunks = n_chunks;
  Rng rng(seed);
  for (int fold = 0; fold < n_folds; ++fold) {
    std::vector<int> idx(static_cast<std::size_t>(n_chunks));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    FoldPlan::Fold f;
    f.test.assign(idx.begin(), idx.begin() + chunks_per_split);
    f.validation.assign(idx.begin() + chunks_per_split,
                        idx.begin() + 2 * chunks_per_split);
    f.train.assign(idx.begin() + 2 * chunks_per_split, idx.end());
    std::sort(f.test.begin(), f.test.end());
    std::sort(f.validation.begin(), f.validation.end());
    std::sort(f.train.begin(), f.train.end());
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

void save_fold_plan(const FoldPlan& plan, const std::string& path) {
  nlohmann::json j;
  j["n_folds"] = plan.n_folds;
  j["chunk_size"] = plan.chunk_size;
  j["chunks_per_split"] = plan.chunks_per_split;
  j["n_chunks"] = plan.n_chunks;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : plan.folds) {
    j["folds"].push_back({{"test", f.test},
                          {"validation", f.validation},
                          {"train", f.train}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fold plan: " + path);
  out << j.dump(2) << "\n";
}

FoldPlan load_fold_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fold plan: " + path);
  nlohmann::json j;
  in >> j;
  FoldPlan plan;
  plan.n_folds = j.at("n_folds").get<int>();
  plan.chunk_size = j.at("chunk_size").get<std::int64_t>();
  plan.chunks_per_split = j.at("chunks_per_split").get<int>();
  plan.n_chunks = j.at("n_chunks").get<int>();
  for (const auto& f : j.at("folds")) {
    FoldPlan::Fold fold;
    fold.test = f.at("test").get<std::vector<int>>();
    fold.validation = f.at("validation").get<std::vector<int>>();
    fold.train = f.at("train").get<std::vector<int>>();
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace biotac
