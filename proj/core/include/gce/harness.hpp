#pragma once

#include "gce/csv.hpp"
#include "gce/dataset.hpp"
#include "gce/estimator.hpp"
#include "gce/model.hpp"
#include "gce/optim.hpp"
#include "gce/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gce {

struct CsvSource {
  std::filesystem::path data;
  std::filesystem::path spec; // dataset spec file next to the CSV
};

using DatasetSource = std::variant<CsvSource, SyntheticSpec>;

struct TrainConfig {
  DatasetSource source;
  ModelSpec model;
  OptimizerKind optimizer = OptimizerKind::sgd;
  OptimizerHyper hyper{};
  EstimatorMode mode = EstimatorMode::classic;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  bool scale_covariates = false; // min-max scale covariates on the train split
  std::string dataset_name = "dataset";
};

enum class RunStatus { ok, diverged };

struct EpochRecord {
  std::size_t epoch = 0;   // 1-based
  double train_loss = 0.0; // mean per-row loss over the train split
  double test_metric = 0.0; // mse (regression) or error rate (classification)
};

struct RunResult {
  std::vector<EpochRecord> per_epoch;
  double final_metric = 0.0;
  RunStatus status = RunStatus::ok;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::string dataset_name;
  std::string model_name;
  OptimizerKind optimizer = OptimizerKind::sgd;
  EstimatorMode mode = EstimatorMode::classic;
  std::size_t batch_size = 0;
};

EncodedDataset load_source(const DatasetSource& source);

// One full training run: epoch shuffle, batch accumulation, one optimizer
// step per batch, per-epoch evaluation. Deterministic in (config, data).
// A run that produces a non-finite loss or metric stops where it is and is
// reported as diverged, not thrown.
RunResult run_training(const TrainConfig& config);
RunResult run_training(const TrainConfig& config, const EncodedDataset& data);

struct SweepGrid {
  std::vector<OptimizerKind> optimizers = {
      OptimizerKind::sgd, OptimizerKind::adagrad, OptimizerKind::adam};
  std::vector<EstimatorMode> modes = {EstimatorMode::classic,
                                      EstimatorMode::gce};
  std::vector<std::size_t> batch_sizes = {32};
};

struct CellStats {
  double mean = 0.0; // over completed runs
  double stddev = 0.0;
  std::size_t runs = 0;
  std::size_t diverged = 0;
};

struct SweepResult {
  TrainConfig base;
  SweepGrid grid;
  std::size_t repeats = 0;
  // cell key: (batch_size, optimizer, mode)
  std::map<std::tuple<std::size_t, OptimizerKind, EstimatorMode>, CellStats>
      cells;
  std::vector<RunResult> runs;
};

// Grid of runs: every (optimizer, mode, batch size) cell `repeats` times.
// Repeat r uses the same derived seed in every cell, so cells see matched
// splits, inits and shuffles. Diverged runs stay out of the means but are
// counted.
SweepResult run_sweep(const TrainConfig& base, const SweepGrid& grid,
                      std::size_t repeats);

// Writes into `out_dir`:
//   runs.jsonl                    one JSON object per epoch per run
//   summary_b<batch>.csv          mean +- std table, one optimizer/mode column
//                                 pair per cell, one row per dataset
//   curve_b<batch>_<opt>_<mode>.csv   epoch, mean test metric
// Refuses to overwrite files from a previous invocation unless `force`.
void write_outputs(const SweepResult& sweep, const std::filesystem::path& out_dir,
                   bool force);

// Single-run flavor: runs.jsonl plus a curve file for the run itself.
void write_outputs(const RunResult& run, const std::filesystem::path& out_dir,
                   bool force);

int cli_main(const std::vector<std::string>& args);

} // namespace gce
