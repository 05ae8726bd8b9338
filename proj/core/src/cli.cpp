#include "gce/harness.hpp"

#include "gce/error.hpp"
#include "gce/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

namespace gce {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view piece = text.substr(start, end - start);
    while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
    while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
    out.emplace_back(piece);
    start = end + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, const std::string& what) {
  T value{};
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError("bad " + what + ": '" + std::string(text) + "'");
  return value;
}

// key=value list, e.g. "card=50,n=2000,zipf=1.5,noise=0.1,seed=7".
// card takes a ':' separated list for per-feature cardinalities.
SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec spec;
  spec.n = 1000;
  spec.cardinalities = {10};
  for (const std::string& item : split(text, ',')) {
    if (item.empty()) continue;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("synthetic option needs key=value, got '" + item +
                        "'");
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "features") {
      spec.num_features = parse_number<std::size_t>(value, "features");
    } else if (key == "card") {
      spec.cardinalities.clear();
      for (const std::string& c : split(value, ':'))
        spec.cardinalities.push_back(parse_number<std::size_t>(c, "card"));
    } else if (key == "n") {
      spec.n = parse_number<std::size_t>(value, "n");
    } else if (key == "dist") {
      if (value == "uniform") spec.dist = SymbolDistribution::uniform;
      else if (value == "zipf") spec.dist = SymbolDistribution::zipf;
      else throw ConfigError("unknown dist '" + value + "'");
    } else if (key == "zipf") {
      spec.dist = SymbolDistribution::zipf;
      spec.zipf_s = parse_number<double>(value, "zipf");
    } else if (key == "noise") {
      spec.noise_std = parse_number<double>(value, "noise");
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(value, "seed");
    } else {
      throw ConfigError("unknown synthetic option '" + key + "'");
    }
  }
  return spec;
}

struct CommonOpts {
  std::string data;
  std::string schema;
  std::string synthetic;
  std::string model = "product";
  std::string optimizer = "sgd";
  std::string estimator = "classic";
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double lr = 0.0; // 0 keeps the optimizer's default
  double test_fraction = 0.2;
  bool scale_covariates = false;
  std::string name;
  std::string out;
  bool force = false;
};

void add_source_options(CLI::App* cmd, CommonOpts& o) {
  auto* data = cmd->add_option("--data", o.data, "CSV file to train on");
  cmd->add_option("--schema", o.schema,
                  "dataset spec file (default: data file with .spec "
                  "extension)")
      ->needs(data);
  cmd->add_option("--synthetic", o.synthetic,
                  "generate data instead: key=value list with features, "
                  "card, n, dist, zipf, noise, seed")
      ->excludes(data);
}

void add_train_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model,
                  "product[:FeatA,FeatB][@cov][+b] | mlp[:h1,h2,...] | "
                  "resnet[:width,blocks]");
  cmd->add_option("--batch-size", o.batch_size, "rows per optimizer step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", o.epochs, "passes over the training split")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--lr", o.lr, "learning rate (0: optimizer default)");
  cmd->add_option("--test-fraction", o.test_fraction,
                  "held-out fraction of rows");
  cmd->add_flag("--scale-covariates", o.scale_covariates,
                "min-max scale covariates, fitted on the train split");
  cmd->add_option("--name", o.name, "dataset name used in reports");
  cmd->add_flag("--force", o.force, "overwrite existing output files");
}

DatasetSource make_source(const CommonOpts& o, std::string& name) {
  if (!o.synthetic.empty()) {
    if (name.empty()) name = "synthetic";
    return parse_synthetic(o.synthetic);
  }
  if (o.data.empty())
    throw ConfigError("no data source: pass --data or --synthetic");
  std::filesystem::path csv(o.data);
  std::filesystem::path spec =
      o.schema.empty() ? std::filesystem::path(csv).replace_extension(".spec")
                       : std::filesystem::path(o.schema);
  if (name.empty()) name = csv.stem().string();
  return CsvSource{csv, spec};
}

ModelSpec parse_model(const std::string& text, const EncodedDataset& data,
                      const std::vector<std::string>& covariate_names) {
  std::string kind = text;
  std::string tail;
  if (std::size_t colon = text.find(':'); colon != std::string::npos) {
    kind = text.substr(0, colon);
    tail = text.substr(colon + 1);
  }

  if (kind == "product") {
    ProductSpec p;
    if (std::size_t plus = tail.rfind("+b"); plus != std::string::npos &&
                                             plus == tail.size() - 2) {
      p.intercept = true;
      tail.resize(plus);
    }
    if (std::size_t at = tail.find('@'); at != std::string::npos) {
      std::string cov = tail.substr(at + 1);
      tail.resize(at);
      auto named = std::find(covariate_names.begin(), covariate_names.end(),
                             cov);
      std::size_t index;
      if (named != covariate_names.end())
        index = static_cast<std::size_t>(named - covariate_names.begin());
      else
        index = parse_number<std::size_t>(cov, "covariate");
      if (index >= data.covariate_count())
        throw ConfigError("covariate '" + cov + "' not in the dataset");
      p.covariate = index;
    }
    if (tail.empty()) {
      for (const Feature& f : data.schema().features())
        p.factors.push_back(f.name);
    } else {
      p.factors = split(tail, ',');
    }
    return ModelSpec::make_product(std::move(p));
  }

  if (kind == "mlp") {
    MlpSpec m;
    m.covariates = data.covariate_count();
    if (!tail.empty()) {
      m.hidden.clear();
      for (const std::string& h : split(tail, ','))
        m.hidden.push_back(parse_number<std::size_t>(h, "hidden size"));
    }
    return ModelSpec::make_mlp(std::move(m), data.task());
  }

  if (kind == "resnet") {
    ResNetSpec r;
    r.covariates = data.covariate_count();
    if (!tail.empty()) {
      std::vector<std::string> parts = split(tail, ',');
      if (parts.size() != 2)
        throw ConfigError("resnet takes width,blocks, got '" + tail + "'");
      r.width = parse_number<std::size_t>(parts[0], "width");
      r.blocks = parse_number<std::size_t>(parts[1], "blocks");
    }
    return ModelSpec::make_resnet(std::move(r), data.task());
  }

  throw ConfigError("unknown model '" + kind +
                    "' (product, mlp or resnet)");
}

std::vector<std::string> covariate_names_for(const DatasetSource& source) {
  if (const auto* csv = std::get_if<CsvSource>(&source))
    return read_dataset_spec(csv->spec).covariates;
  return {};
}

TrainConfig build_config(const CommonOpts& o) {
  TrainConfig config;
  std::string name = o.name;
  config.source = make_source(o, name);
  config.dataset_name = name;
  config.optimizer = parse_optimizer_kind(o.optimizer);
  config.hyper.lr = o.lr;
  config.mode = parse_estimator_mode(o.estimator);
  config.batch_size = o.batch_size;
  config.epochs = o.epochs;
  config.seed = o.seed;
  config.test_fraction = o.test_fraction;
  config.scale_covariates = o.scale_covariates;
  return config;
}

int cmd_train(const CommonOpts& o) {
  TrainConfig config = build_config(o);
  EncodedDataset data = load_source(config.source);
  config.model =
      parse_model(o.model, data, covariate_names_for(config.source));

  RunResult run = run_training(config, data);
  const char* metric = data.task().kind == TaskKind::regression
                           ? "test_mse"
                           : "test_error";
  for (const EpochRecord& e : run.per_epoch)
    std::printf("epoch %3zu  train_loss=%-12.6g %s=%.6g\n", e.epoch,
                e.train_loss, metric, e.test_metric);
  if (run.status == RunStatus::diverged)
    std::printf("diverged after epoch %zu\n", run.per_epoch.size());
  else
    std::printf("final %s=%.6g (%.2fs)\n", metric, run.final_metric,
                run.wall_seconds);
  if (!o.out.empty()) write_outputs(run, o.out, o.force);
  return 0;
}

int cmd_sweep(const CommonOpts& o, std::size_t repeats,
              const std::vector<std::size_t>& batch_sizes,
              const std::vector<std::string>& optimizers,
              const std::vector<std::string>& modes) {
  TrainConfig base = build_config(o);
  EncodedDataset data = load_source(base.source);
  base.model = parse_model(o.model, data, covariate_names_for(base.source));

  SweepGrid grid;
  if (!batch_sizes.empty()) grid.batch_sizes = batch_sizes;
  if (!optimizers.empty()) {
    grid.optimizers.clear();
    for (const std::string& name : optimizers)
      grid.optimizers.push_back(parse_optimizer_kind(name));
  }
  if (!modes.empty()) {
    grid.modes.clear();
    for (const std::string& name : modes)
      grid.modes.push_back(parse_estimator_mode(name));
  }

  SweepResult sweep = run_sweep(base, grid, repeats);
  for (const auto& [key, stats] : sweep.cells) {
    auto [batch, opt, mode] = key;
    std::printf("b=%-4zu %-7s %-7s  mean=%-12.6g std=%-12.6g", batch,
                std::string(to_string(opt)).c_str(),
                std::string(to_string(mode)).c_str(), stats.mean,
                stats.stddev);
    if (stats.diverged > 0)
      std::printf(" (%zu of %zu diverged)", stats.diverged,
                  stats.runs + stats.diverged);
    std::printf("\n");
  }
  write_outputs(sweep, o.out, o.force);
  std::printf("wrote %s\n", o.out.c_str());
  return 0;
}

int cmd_verify(std::size_t trials, std::uint64_t seed) {
  VerifyOptions options;
  if (trials > 0) {
    options.mc_trials = trials;
    options.stop_trials = trials;
  }
  options.seed = seed;
  std::vector<CheckResult> checks = run_verification(options);
  print_report(checks, std::cout);
  return all_passed(checks) ? 0 : 1;
}

int cmd_synth(const std::string& synthetic, const std::string& out,
              const std::string& schema_out, const std::string& truth,
              bool force) {
  SyntheticSpec spec = parse_synthetic(synthetic);
  SyntheticData made = generate_synthetic(spec);

  std::filesystem::path csv(out);
  std::filesystem::path spec_path =
      schema_out.empty()
          ? std::filesystem::path(csv).replace_extension(".spec")
          : std::filesystem::path(schema_out);
  if (!force) {
    for (const auto& p : {csv, spec_path})
      if (std::filesystem::exists(p))
        throw DataError("refusing to overwrite '" + p.string() +
                        "' (pass --force to allow)");
  }

  write_dataset_csv(csv, made.dataset, {}, "target");
  DatasetSpec dspec;
  for (const Feature& f : made.dataset.schema().features())
    dspec.features.push_back(f.name);
  dspec.target = "target";
  dspec.task = Task::regression();
  write_dataset_spec(spec_path, dspec);

  if (!truth.empty()) {
    std::ofstream tf(truth);
    if (!tf) throw DataError("cannot write '" + truth + "'");
    made.ground_truth.dump(tf);
  }
  std::printf("wrote %s (%zu rows) and %s\n", csv.string().c_str(),
              made.dataset.size(), spec_path.string().c_str());
  return 0;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"training toolkit for tables with categorical features"};
  app.require_subcommand(1);

  CommonOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "one training run");
  add_source_options(train, train_opts);
  add_train_options(train, train_opts);
  train->add_option("--optimizer", train_opts.optimizer,
                    "sgd, adagrad or adam");
  train->add_option("--estimator", train_opts.estimator, "classic or gce");
  train->add_option("--out", train_opts.out,
                    "directory for runs.jsonl and curve.csv");

  CommonOpts sweep_opts;
  std::size_t repeats = 5;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::string> optimizers;
  std::vector<std::string> modes;
  CLI::App* sweep =
      app.add_subcommand("sweep", "optimizer x estimator grid of runs");
  add_source_options(sweep, sweep_opts);
  add_train_options(sweep, sweep_opts);
  sweep->add_option("--repeats", repeats, "runs per grid cell")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--batch-sizes", batch_sizes, "batch sizes to sweep")
      ->delimiter(',');
  sweep->add_option("--optimizers", optimizers, "subset of sgd,adagrad,adam")
      ->delimiter(',');
  sweep->add_option("--modes", modes, "subset of classic,gce")
      ->delimiter(',');
  sweep->add_option("--out", sweep_opts.out, "output directory")->required();

  std::size_t verify_trials = 0;
  std::uint64_t verify_seed = VerifyOptions{}.seed;
  CLI::App* verify =
      app.add_subcommand("verify", "internal consistency checks");
  verify->add_option("--trials", verify_trials,
                     "Monte Carlo trials per check (0: default)");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");

  std::string synth_spec = "card=10,n=1000";
  std::string synth_out;
  std::string synth_schema_out;
  std::string synth_truth;
  bool synth_force = false;
  CLI::App* synth =
      app.add_subcommand("synth", "write a synthetic dataset to CSV");
  synth->add_option("--synthetic", synth_spec,
                    "key=value list with features, card, n, dist, zipf, "
                    "noise, seed");
  synth->add_option("--out", synth_out, "CSV path to write")->required();
  synth->add_option("--schema-out", synth_schema_out,
                    "spec file path (default: CSV path with .spec extension)");
  synth->add_option("--truth", synth_truth,
                    "also dump the generating parameters here");
  synth->add_flag("--force", synth_force, "overwrite existing files");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("gce");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_opts);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, repeats, batch_sizes, optimizers, modes);
    if (verify->parsed()) return cmd_verify(verify_trials, verify_seed);
    if (synth->parsed())
      return cmd_synth(synth_spec, synth_out, synth_schema_out, synth_truth,
                       synth_force);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace gce
