#include <doctest.h>

#include <gce/error.hpp>
#include <gce/harness.hpp>
#include <gce/rng.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace gce;
namespace fs = std::filesystem;

namespace {

SyntheticSpec small_synth() {
  SyntheticSpec s;
  s.num_features = 1;
  s.cardinalities = {12};
  s.n = 160;
  s.noise_std = 0.1;
  s.seed = 5;
  return s;
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.source = small_synth();
  cfg.model = ModelSpec::make_mlp({{4}, 0});
  cfg.optimizer = OptimizerKind::adagrad;
  cfg.hyper.lr = 0.05;
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.seed = 11;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gce_test_" + std::to_string(std::rand()) +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

} // namespace

TEST_CASE("training is deterministic in config and data") {
  TrainConfig cfg = small_config();
  RunResult a = run_training(cfg);
  RunResult b = run_training(cfg);

  REQUIRE(a.per_epoch.size() == 3);
  REQUIRE(a.status == RunStatus::ok);
  CHECK(a.final_metric == b.final_metric);
  for (std::size_t e = 0; e < a.per_epoch.size(); ++e) {
    CHECK(a.per_epoch[e].train_loss == b.per_epoch[e].train_loss);
    CHECK(a.per_epoch[e].test_metric == b.per_epoch[e].test_metric);
    CHECK(a.per_epoch[e].epoch == e + 1);
  }

  TrainConfig other = cfg;
  other.seed = 12;
  CHECK(run_training(other).final_metric != a.final_metric);
}

TEST_CASE("the two estimator modes produce different runs") {
  TrainConfig cfg = small_config();
  cfg.mode = EstimatorMode::classic;
  RunResult classic = run_training(cfg);
  cfg.mode = EstimatorMode::gce;
  RunResult gce_run = run_training(cfg);
  CHECK(classic.final_metric != gce_run.final_metric);
  CHECK(classic.mode == EstimatorMode::classic);
  CHECK(gce_run.mode == EstimatorMode::gce);
}

TEST_CASE("an exploding run is reported as diverged, not thrown") {
  TrainConfig cfg = small_config();
  cfg.optimizer = OptimizerKind::sgd;
  cfg.hyper.lr = 1e12;
  cfg.epochs = 6;
  RunResult r = run_training(cfg);
  CHECK(r.status == RunStatus::diverged);
  CHECK(std::isnan(r.final_metric));
  CHECK(r.per_epoch.size() < 6); // stopped at the bad epoch
}

TEST_CASE("covariate scaling changes nothing when there are no covariates") {
  TrainConfig cfg = small_config();
  RunResult plain = run_training(cfg);
  cfg.scale_covariates = true;
  RunResult scaled = run_training(cfg);
  CHECK(plain.final_metric == scaled.final_metric);
}

TEST_CASE("classification runs report an error rate") {
  // Hand-built three-class table: class = symbol index modulo 3.
  FeatureSchema schema(
      {{"F", {"a", "b", "c", "d", "e", "f"}}});
  std::vector<Row> rows;
  Rng rng(17);
  for (std::size_t i = 0; i < 120; ++i) {
    int s = static_cast<int>(rng.below(6));
    rows.push_back({{s}, {}, static_cast<double>(s % 3)});
  }
  EncodedDataset data(schema, std::move(rows), Task::classification(3));

  TrainConfig cfg;
  cfg.source = small_synth(); // ignored by the data overload
  cfg.model = ModelSpec::make_mlp({{8}, 0}, Task::classification(3));
  cfg.optimizer = OptimizerKind::adagrad;
  cfg.hyper.lr = 0.05;
  cfg.batch_size = 16;
  cfg.epochs = 2;
  cfg.seed = 3;
  RunResult r = run_training(cfg, data);
  REQUIRE(r.status == RunStatus::ok);
  for (const EpochRecord& e : r.per_epoch) {
    CHECK(e.test_metric >= 0.0);
    CHECK(e.test_metric <= 1.0);
  }
}

TEST_CASE("config validation") {
  TrainConfig cfg = small_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(run_training(cfg), ConfigError);
  cfg = small_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(run_training(cfg), ConfigError);
  cfg = small_config();
  cfg.model = ModelSpec::make_product({{"nope"}, {}, false});
  CHECK_THROWS_AS(run_training(cfg), ConfigError);
}

TEST_CASE("sweep covers the grid with paired repeats") {
  TrainConfig base = small_config();
  SweepGrid grid;
  grid.optimizers = {OptimizerKind::sgd, OptimizerKind::adagrad};
  grid.modes = {EstimatorMode::classic, EstimatorMode::gce};
  grid.batch_sizes = {16};
  SweepResult sweep = run_sweep(base, grid, 2);

  CHECK(sweep.cells.size() == 4);
  CHECK(sweep.runs.size() == 8);
  for (const auto& [key, cell] : sweep.cells) {
    CHECK(cell.runs + cell.diverged == 2);
    CHECK(std::isfinite(cell.mean));
  }

  // Repeat r shares its seed across cells: paired runs split identically.
  std::map<std::uint64_t, std::size_t> seed_uses;
  for (const RunResult& r : sweep.runs) ++seed_uses[r.seed];
  CHECK(seed_uses.size() == 2);
  for (const auto& [seed, uses] : seed_uses) CHECK(uses == 4);

  CHECK_THROWS_AS(run_sweep(base, grid, 0), ConfigError);
  SweepGrid empty;
  empty.optimizers.clear();
  CHECK_THROWS_AS(run_sweep(base, empty, 2), ConfigError);
}

TEST_CASE("sweep outputs: jsonl, summary table, curve files") {
  TrainConfig base = small_config();
  base.dataset_name = "toy";
  SweepGrid grid;
  grid.optimizers = {OptimizerKind::sgd, OptimizerKind::adagrad,
                     OptimizerKind::adam};
  grid.modes = {EstimatorMode::classic, EstimatorMode::gce};
  grid.batch_sizes = {16};
  SweepResult sweep = run_sweep(base, grid, 2);

  TempDir dir;
  write_outputs(sweep, dir.path, false);

  std::string summary = slurp(dir.path / "summary_b16.csv");
  CHECK(summary.rfind("Dataset,SGD,SGD&GCE,Adagrad,Adagrad&GCE,Adam,Adam&GCE",
                      0) == 0);
  CHECK(summary.find("toy,") != std::string::npos);
  CHECK(line_count(summary) == 2);

  // One JSON line per epoch per run.
  std::string jsonl = slurp(dir.path / "runs.jsonl");
  std::size_t epochs_total = 0;
  for (const RunResult& r : sweep.runs) epochs_total += r.per_epoch.size();
  CHECK(line_count(jsonl) == epochs_total);
  CHECK(jsonl.find("\"optimizer\"") != std::string::npos);

  for (const char* name :
       {"curve_b16_sgd_classic.csv", "curve_b16_sgd_gce.csv",
        "curve_b16_adagrad_classic.csv", "curve_b16_adagrad_gce.csv",
        "curve_b16_adam_classic.csv", "curve_b16_adam_gce.csv"}) {
    CAPTURE(name);
    std::string curve = slurp(dir.path / name);
    CHECK(line_count(curve) == 4); // header + 3 epochs
  }

  // A second write into the same directory is refused without force.
  CHECK_THROWS_AS(write_outputs(sweep, dir.path, false), DataError);
  CHECK_NOTHROW(write_outputs(sweep, dir.path, true));
}

TEST_CASE("single-run outputs") {
  TrainConfig cfg = small_config();
  RunResult r = run_training(cfg);

  TempDir dir;
  write_outputs(r, dir.path, false);
  std::string curve = slurp(dir.path / "curve.csv");
  CHECK(line_count(curve) == 4);
  CHECK(curve.rfind("epoch,", 0) == 0);
  std::string jsonl = slurp(dir.path / "runs.jsonl");
  CHECK(line_count(jsonl) == 3);
  CHECK_THROWS_AS(write_outputs(r, dir.path, false), DataError);
}

TEST_CASE("csv sources load through the dataset spec") {
  TempDir dir;
  fs::path csv = dir.path / "mini.csv";
  fs::path spec = dir.path / "mini.spec";
  {
    std::ofstream out(csv);
    out << "Color,City,price\n";
    out << "blue,Paris,14\npink,Rome,12\npink,Rome,13\n";
    out << "blue,Berlin,17\npink,Paris,8\n";
  }
  {
    std::ofstream out(spec);
    out << "task = regression\ntarget = price\nfeatures = Color, City\n";
  }
  EncodedDataset data = load_source(CsvSource{csv, spec});
  CHECK(data.size() == 5);
  CHECK(data.schema().feature_count() == 2);

  CHECK_THROWS_AS(load_source(CsvSource{dir.path / "absent.csv", spec}),
                  DataError);
}
