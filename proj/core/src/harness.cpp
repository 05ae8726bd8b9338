#include "gce/harness.hpp"

#include "gce/error.hpp"
#include "gce/rng.hpp"
#include "gce/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gce {

namespace {

constexpr std::uint64_t kSplitStream = 0x5b;
constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kEpochStream = 0xe0;
constexpr std::uint64_t kRepeatStream = 0x4e;

std::string model_name(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelSpec::Kind::product: return "product";
    case ModelSpec::Kind::mlp: return "mlp";
    case ModelSpec::Kind::resnet: return "resnet";
  }
  return "?";
}

double mean_train_loss(const ModelSpec& spec, const ParamStore& params,
                       const EncodedDataset& data) {
  double total = 0.0;
  for (const Row& row : data.rows())
    total += loss_value(forward(spec, params, row), row.target, spec.task);
  return total / static_cast<double>(data.size());
}

double test_metric(const ModelSpec& spec, const ParamStore& params,
                   const EncodedDataset& data) {
  if (spec.task.kind == TaskKind::regression)
    return mean_train_loss(spec, params, data); // mse
  std::size_t wrong = 0;
  for (const Row& row : data.rows()) {
    std::vector<double> logits = forward(spec, params, row);
    std::size_t arg = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (arg != static_cast<std::size_t>(row.target)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

// Min-max scaling fitted on the train split only.
void scale_covariates_in_place(EncodedDataset& train, EncodedDataset& test) {
  std::size_t ncov = train.covariate_count();
  if (ncov == 0) return;
  std::vector<double> lo(ncov, std::numeric_limits<double>::infinity());
  std::vector<double> hi(ncov, -std::numeric_limits<double>::infinity());
  for (const Row& row : train.rows()) {
    for (std::size_t c = 0; c < ncov; ++c) {
      lo[c] = std::min(lo[c], row.covariates[c]);
      hi[c] = std::max(hi[c], row.covariates[c]);
    }
  }
  auto rescale = [&](const EncodedDataset& data) {
    std::vector<Row> rows = data.rows();
    for (Row& row : rows)
      for (std::size_t c = 0; c < ncov; ++c) {
        double span = hi[c] - lo[c];
        row.covariates[c] =
            span > 0.0 ? (row.covariates[c] - lo[c]) / span : 0.0;
      }
    return EncodedDataset(data.schema(), std::move(rows), data.task());
  };
  train = rescale(train);
  test = rescale(test);
}

ModelSpec resolve_model(const ModelSpec& spec, const EncodedDataset& data) {
  ModelSpec resolved = spec;
  if (spec.kind != ModelSpec::Kind::product) {
    if (resolved.task.kind != data.task().kind)
      throw ConfigError("model task does not match the dataset task");
    if (resolved.task.kind == TaskKind::classification &&
        resolved.task.num_classes == 0)
      resolved.task.num_classes = data.task().num_classes;
  } else if (data.task().kind != TaskKind::regression) {
    throw ConfigError("product model supports regression only");
  }
  return resolved;
}

bool finite(double x) { return std::isfinite(x); }

std::string format_cell(const CellStats& stats) {
  std::ostringstream out;
  if (stats.runs == 0) {
    out << "diverged";
  } else {
    out.precision(4);
    out << stats.mean << " ± " << stats.stddev;
  }
  if (stats.diverged > 0)
    out << " (" << stats.diverged << " diverged)";
  return std::move(out).str();
}

void ensure_fresh(const std::vector<std::filesystem::path>& targets,
                  bool force) {
  if (force) return;
  for (const std::filesystem::path& p : targets)
    if (std::filesystem::exists(p))
      throw DataError("refusing to overwrite '" + p.string() +
                      "' (pass force/--force to allow)");
}

nlohmann::json epoch_json(const RunResult& run, const EpochRecord& e) {
  nlohmann::json j;
  j["dataset"] = run.dataset_name;
  j["model"] = run.model_name;
  j["optimizer"] = std::string(to_string(run.optimizer));
  j["estimator"] = std::string(to_string(run.mode));
  j["batch_size"] = run.batch_size;
  j["seed"] = run.seed;
  j["status"] = run.status == RunStatus::ok ? "ok" : "diverged";
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["test_metric"] = e.test_metric;
  return j;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<RunResult>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const RunResult& run : runs)
    for (const EpochRecord& e : run.per_epoch)
      out << epoch_json(run, e).dump() << '\n';
}

std::string column_name(OptimizerKind opt, EstimatorMode mode) {
  std::string base = opt == OptimizerKind::sgd       ? "SGD"
                     : opt == OptimizerKind::adagrad ? "Adagrad"
                                                     : "Adam";
  return mode == EstimatorMode::gce ? base + "&GCE" : base;
}

} // namespace

EncodedDataset load_source(const DatasetSource& source) {
  if (const auto* csv = std::get_if<CsvSource>(&source)) {
    DatasetSpec spec = read_dataset_spec(csv->spec);
    return load_csv(csv->data, spec);
  }
  return generate_synthetic(std::get<SyntheticSpec>(source)).dataset;
}

RunResult run_training(const TrainConfig& config) {
  EncodedDataset data = load_source(config.source);
  return run_training(config, data);
}

RunResult run_training(const TrainConfig& config, const EncodedDataset& data) {
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  if (config.epochs == 0) throw ConfigError("need at least one epoch");

  auto started = std::chrono::steady_clock::now();
  ModelSpec spec = resolve_model(config.model, data);

  auto [train, test] = split_train_test(
      data, config.test_fraction, Rng::derive(config.seed, kSplitStream));
  if (config.scale_covariates) scale_covariates_in_place(train, test);

  ParamStore params =
      init_params(spec, data.schema(), Rng::derive(config.seed, kInitStream));
  Optimizer opt(config.optimizer, config.hyper, params);
  GradAccumulator acc(params);

  RunResult result;
  result.seed = config.seed;
  result.dataset_name = config.dataset_name;
  result.model_name = model_name(spec);
  result.optimizer = config.optimizer;
  result.mode = config.mode;
  result.batch_size = config.batch_size;
  result.per_epoch.reserve(config.epochs);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto batches =
        make_batches(train.size(), config.batch_size,
                     Rng::derive(config.seed, kEpochStream + epoch),
                     BatchMode::partition);
    for (const std::vector<std::size_t>& batch : batches) {
      acc.reset();
      for (std::size_t r : batch) {
        const Row& row = train.row(r);
        acc.accumulate(backward(spec, params, row, row.target), row);
      }
      opt.apply_update(params, acc.finalize(config.mode));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = mean_train_loss(spec, params, train);
    record.test_metric = test_metric(spec, params, test);
    result.per_epoch.push_back(record);
    if (!finite(record.train_loss) || !finite(record.test_metric)) {
      result.status = RunStatus::diverged;
      break;
    }
  }

  result.final_metric = result.status == RunStatus::ok
                            ? result.per_epoch.back().test_metric
                            : std::numeric_limits<double>::quiet_NaN();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

SweepResult run_sweep(const TrainConfig& base, const SweepGrid& grid,
                      std::size_t repeats) {
  if (repeats == 0) throw ConfigError("need at least one repeat");
  if (grid.optimizers.empty() || grid.modes.empty() || grid.batch_sizes.empty())
    throw ConfigError("sweep grid has an empty axis");

  EncodedDataset data = load_source(base.source);

  SweepResult sweep;
  sweep.base = base;
  sweep.grid = grid;
  sweep.repeats = repeats;

  for (std::size_t batch : grid.batch_sizes) {
    for (OptimizerKind opt : grid.optimizers) {
      for (EstimatorMode mode : grid.modes) {
        std::vector<double> finals;
        CellStats stats;
        for (std::size_t r = 0; r < repeats; ++r) {
          TrainConfig cfg = base;
          cfg.batch_size = batch;
          cfg.optimizer = opt;
          cfg.hyper = base.hyper;
          cfg.mode = mode;
          // Same derived seed across cells: repeat r sees matched splits,
          // inits and shuffles everywhere.
          cfg.seed = Rng::derive(base.seed, kRepeatStream + r);
          RunResult run = run_training(cfg, data);
          if (run.status == RunStatus::ok) {
            finals.push_back(run.final_metric);
          } else {
            ++stats.diverged;
          }
          sweep.runs.push_back(std::move(run));
        }
        stats.runs = finals.size();
        if (!finals.empty()) {
          double sum = 0.0;
          for (double v : finals) sum += v;
          stats.mean = sum / static_cast<double>(finals.size());
          if (finals.size() > 1) {
            double ss = 0.0;
            for (double v : finals) ss += (v - stats.mean) * (v - stats.mean);
            stats.stddev =
                std::sqrt(ss / static_cast<double>(finals.size() - 1));
          }
        }
        sweep.cells[{batch, opt, mode}] = stats;
      }
    }
  }
  return sweep;
}

void write_outputs(const SweepResult& sweep,
                   const std::filesystem::path& out_dir, bool force) {
  std::filesystem::create_directories(out_dir);

  std::vector<std::filesystem::path> targets = {out_dir / "runs.jsonl"};
  for (std::size_t batch : sweep.grid.batch_sizes) {
    targets.push_back(out_dir /
                      ("summary_b" + std::to_string(batch) + ".csv"));
    for (OptimizerKind opt : sweep.grid.optimizers)
      for (EstimatorMode mode : sweep.grid.modes)
        targets.push_back(out_dir / ("curve_b" + std::to_string(batch) + "_" +
                                     std::string(to_string(opt)) + "_" +
                                     std::string(to_string(mode)) + ".csv"));
  }
  ensure_fresh(targets, force);

  write_jsonl(out_dir / "runs.jsonl", sweep.runs);

  // Fixed column set in the published layout, independent of the grid;
  // cells outside the grid stay empty.
  const std::vector<std::pair<OptimizerKind, EstimatorMode>> columns = {
      {OptimizerKind::sgd, EstimatorMode::classic},
      {OptimizerKind::sgd, EstimatorMode::gce},
      {OptimizerKind::adagrad, EstimatorMode::classic},
      {OptimizerKind::adagrad, EstimatorMode::gce},
      {OptimizerKind::adam, EstimatorMode::classic},
      {OptimizerKind::adam, EstimatorMode::gce},
  };

  for (std::size_t batch : sweep.grid.batch_sizes) {
    std::ofstream out(out_dir / ("summary_b" + std::to_string(batch) + ".csv"),
                      std::ios::binary);
    out << "Dataset,SGD,SGD&GCE,Adagrad,Adagrad&GCE,Adam,Adam&GCE\n";
    out << sweep.base.dataset_name;
    for (auto [opt, mode] : columns) {
      out << ',';
      auto it = sweep.cells.find({batch, opt, mode});
      if (it != sweep.cells.end()) {
        std::string cell = format_cell(it->second);
        if (cell.find(',') != std::string::npos) out << '"' << cell << '"';
        else out << cell;
      }
    }
    out << '\n';
  }

  for (std::size_t batch : sweep.grid.batch_sizes) {
    for (OptimizerKind opt : sweep.grid.optimizers) {
      for (EstimatorMode mode : sweep.grid.modes) {
        std::ofstream out(out_dir / ("curve_b" + std::to_string(batch) + "_" +
                                     std::string(to_string(opt)) + "_" +
                                     std::string(to_string(mode)) + ".csv"),
                          std::ios::binary);
        out << "epoch,test_metric\n";
        out.precision(17);
        std::size_t max_epochs = 0;
        for (const RunResult& run : sweep.runs)
          if (run.batch_size == batch && run.optimizer == opt &&
              run.mode == mode)
            max_epochs = std::max(max_epochs, run.per_epoch.size());
        for (std::size_t e = 0; e < max_epochs; ++e) {
          double sum = 0.0;
          std::size_t count = 0;
          for (const RunResult& run : sweep.runs) {
            if (run.batch_size != batch || run.optimizer != opt ||
                run.mode != mode || run.status != RunStatus::ok)
              continue;
            if (e < run.per_epoch.size()) {
              sum += run.per_epoch[e].test_metric;
              ++count;
            }
          }
          if (count > 0)
            out << (e + 1) << ',' << sum / static_cast<double>(count) << '\n';
        }
      }
    }
  }
}

void write_outputs(const RunResult& run, const std::filesystem::path& out_dir,
                   bool force) {
  std::filesystem::create_directories(out_dir);
  std::filesystem::path jsonl = out_dir / "runs.jsonl";
  std::filesystem::path curve = out_dir / "curve.csv";
  ensure_fresh({jsonl, curve}, force);

  write_jsonl(jsonl, {run});
  std::ofstream out(curve, std::ios::binary);
  if (!out) throw DataError("cannot write '" + curve.string() + "'");
  out << "epoch,train_loss,test_metric\n";
  out.precision(17);
  for (const EpochRecord& e : run.per_epoch)
    out << e.epoch << ',' << e.train_loss << ',' << e.test_metric << '\n';
}

} // namespace gce
