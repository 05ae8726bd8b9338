#include <doctest.h>

#include <gce/harness.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

using gce::cli_main;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gce_cli_" + std::to_string(std::rand()) +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(std::vector<std::string> args) { return cli_main(args); }

} // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"train", "--help"}) == 0);
  CHECK(run({}) == 2);                     // a subcommand is required
  CHECK(run({"train", "--bogus"}) == 2);   // unknown flag
  CHECK(run({"nonsense"}) == 2);           // unknown subcommand
}

TEST_CASE("config errors exit with 2") {
  CHECK(run({"train", "--synthetic", "n=50,card=5", "--model", "bogus",
             "--epochs", "1"}) == 2);
  CHECK(run({"train", "--synthetic", "n=50,card=5,wat=1", "--epochs", "1"}) ==
        2);
}

TEST_CASE("missing input file exits with 1") {
  CHECK(run({"train", "--data", "/nonexistent/never.csv", "--epochs", "1"}) ==
        1);
}

TEST_CASE("synth then train round trip") {
  TempDir dir;
  std::string csv = (dir.path / "t.csv").string();
  CHECK(run({"synth", "--synthetic", "n=120,card=8,seed=4,noise=0.1", "--out",
             csv}) == 0);
  CHECK(fs::exists(dir.path / "t.csv"));
  CHECK(fs::exists(dir.path / "t.spec"));

  CHECK(run({"train", "--data", csv, "--model", "product", "--epochs", "2",
             "--batch-size", "16"}) == 0);

  // Rewriting the dataset needs --force.
  CHECK(run({"synth", "--synthetic", "n=120,card=8", "--out", csv}) == 1);
  CHECK(run({"synth", "--synthetic", "n=120,card=8", "--out", csv, "--force"}) ==
        0);
}

TEST_CASE("train writes outputs when asked") {
  TempDir dir;
  std::string out = (dir.path / "run").string();
  CHECK(run({"train", "--synthetic", "n=120,card=8,seed=4", "--model", "mlp:4",
             "--epochs", "2", "--batch-size", "16", "--optimizer", "adagrad",
             "--estimator", "gce", "--out", out}) == 0);
  CHECK(fs::exists(dir.path / "run" / "runs.jsonl"));
  CHECK(fs::exists(dir.path / "run" / "curve.csv"));
}

TEST_CASE("sweep writes the grid outputs and respects force") {
  TempDir dir;
  std::string out = (dir.path / "sweep").string();
  std::vector<std::string> cmd = {
      "sweep",     "--synthetic",   "n=120,card=8,seed=4",
      "--model",   "mlp:4",         "--epochs",
      "2",         "--batch-sizes", "16",
      "--repeats", "2",             "--optimizers",
      "sgd",       "--modes",       "classic,gce",
      "--out",     out};
  CHECK(run(cmd) == 0);
  CHECK(fs::exists(dir.path / "sweep" / "runs.jsonl"));
  CHECK(fs::exists(dir.path / "sweep" / "summary_b16.csv"));
  CHECK(fs::exists(dir.path / "sweep" / "curve_b16_sgd_classic.csv"));
  CHECK(fs::exists(dir.path / "sweep" / "curve_b16_sgd_gce.csv"));

  CHECK(run(cmd) == 1); // refuses to overwrite
  cmd.push_back("--force");
  CHECK(run(cmd) == 0);
}

TEST_CASE("verification subcommand smoke run") {
  CHECK(run({"verify", "--trials", "30000"}) == 0);
}
