#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "biotac/sensor.hpp"

namespace biotac {

struct DatasetMeta {
  std::string source;
  int tick_hz = 100;
  std::string layout_ref;
};

struct Dataset {
  std::vector<SensorFrame> frames;  // ticks contiguous from 0
  DatasetMeta meta;

  std::int64_t size() const { return static_cast<std::int64_t>(frames.size()); }
};

/// Raised on malformed dataset files; `row` is the 1-based data row.
struct ParseError : std::runtime_error {
  int row;
  ParseError(const std::string& msg, int row_)
      : std::runtime_error(msg), row(row_) {}
};

Dataset read_dataset(const std::string& path);
void write_dataset(const Dataset& dataset, const std::string& path);

/// Chunked train/validation/test split: the dataset is cut into
/// fixed-length chunks; each fold draws `chunks_per_split` chunks for test
/// and for validation (seeded, disjoint), the remainder trains.
struct FoldPlan {
  int n_folds = 0;
  std::int64_t chunk_size = 0;
  int chunks_per_split = 0;
  int n_chunks = 0;
  struct Fold {
    std::vector<int> test, validation, train;  // chunk indices, sorted
  };
  std::vector<Fold> folds;
};

FoldPlan make_fold_plan(std::int64_t dataset_len, int n_folds,
                        std::int64_t chunk_size, int chunks_per_split,
                        std::uint64_t seed);

void save_fold_plan(const FoldPlan& plan, const std::string& path);
FoldPlan load_fold_plan(const std::string& path);

}  // namespace biotac
