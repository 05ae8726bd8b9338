#include "gce/verify.hpp"

#include "gce/dataset.hpp"
#include "gce/estimator.hpp"
#include "gce/model.hpp"
#include "gce/rng.hpp"
#include "gce/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

namespace gce {

namespace {

void push_eq(std::vector<CheckResult>& out, std::string claim, double computed,
             double reference, double tol) {
  bool pass = std::abs(computed - reference) <= tol;
  if (!std::isfinite(computed)) pass = false;
  out.push_back({std::move(claim), computed, reference, tol, pass});
}

// Two categorical features, five rows, product model with hand-set scalars.
// Every reference number below was worked out by hand from this table.
//
//   row   Color  City    target   prediction   squared error
//    0    blue   Paris     14      2*3 =  6        64
//    1    pink   Rome      12      1*4 =  4        64
//    2    pink   Rome      13      1*4 =  4        81
//    3    blue   Berlin    17      2*5 = 10        49
//    4    pink   Paris      8      1*3 =  3        25
struct Fixture {
  EncodedDataset data;
  ModelSpec spec;
  ParamStore params;
};

Fixture make_fixture() {
  FeatureSchema schema({{"Color", {"blue", "pink"}},
                        {"City", {"Paris", "Rome", "Berlin"}}});
  std::vector<Row> rows = {
      {{0, 0}, {}, 14.0}, {{1, 1}, {}, 12.0}, {{1, 1}, {}, 13.0},
      {{0, 2}, {}, 17.0}, {{1, 0}, {}, 8.0},
  };
  EncodedDataset data(schema, std::move(rows), Task::regression());

  ModelSpec spec = ModelSpec::make_product({{"Color", "City"}, {}, false});
  ParamStore params = init_params(spec, data.schema(), 0);
  auto set = [&](std::size_t f, std::size_t s, double v) {
    params.values(params.symbol_group(f, s))[0] = v;
  };
  set(0, 0, 2.0); // blue
  set(0, 1, 1.0); // pink
  set(1, 0, 3.0); // Paris
  set(1, 1, 4.0); // Rome
  set(1, 2, 5.0); // Berlin
  return {std::move(data), std::move(spec), std::move(params)};
}

// Fully balanced companion: 2 x 2 features, all four combinations once, so
// every symbol group holds exactly two rows.
Fixture make_balanced() {
  FeatureSchema schema({{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}});
  std::vector<Row> rows = {
      {{0, 0}, {}, 3.0}, {{0, 1}, {}, 5.0}, {{1, 0}, {}, 7.0},
      {{1, 1}, {}, 11.0},
  };
  EncodedDataset data(schema, std::move(rows), Task::regression());

  ModelSpec spec = ModelSpec::make_product({{"A", "B"}, {}, false});
  ParamStore params = init_params(spec, data.schema(), 0);
  params.values(params.symbol_group(0, 0))[0] = 2.0;
  params.values(params.symbol_group(0, 1))[0] = 3.0;
  params.values(params.symbol_group(1, 0))[0] = 1.0;
  params.values(params.symbol_group(1, 1))[0] = 4.0;
  return {std::move(data), std::move(spec), std::move(params)};
}

double mean_loss(const Fixture& fx) {
  double total = 0.0;
  for (const Row& row : fx.data.rows())
    total += loss_value(forward(fx.spec, fx.params, row), row.target,
                        fx.spec.task);
  return total / static_cast<double>(fx.data.size());
}

double guarded_rel(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

void check_fixture_values(std::vector<CheckResult>& out) {
  Fixture fx = make_fixture();

  push_eq(out, "group-mean objective on the worked fixture",
          categorical_loss(fx.spec, fx.params, fx.data), 335.0 / 6.0, 1e-12);
  push_eq(out, "plain mean loss on the worked fixture", mean_loss(fx), 56.6,
          1e-12);

  GradMap g0 = backward(fx.spec, fx.params, fx.data.row(0), 14.0);
  const std::vector<double>* blue = g0.find(fx.params.symbol_group(0, 0));
  const std::vector<double>* paris = g0.find(fx.params.symbol_group(1, 0));
  push_eq(out, "row-0 gradient wrt Color=blue scalar",
          blue ? (*blue)[0] : std::nan(""), -48.0, 1e-12);
  push_eq(out, "row-0 gradient wrt City=Paris scalar",
          paris ? (*paris)[0] : std::nan(""), -32.0, 1e-12);
}

void check_batch_scaling(std::vector<CheckResult>& out) {
  Fixture fx = make_fixture();
  GradAccumulator acc(fx.params);
  for (std::size_t i : {0, 1, 2}) {
    const Row& row = fx.data.row(i);
    acc.accumulate(backward(fx.spec, fx.params, row, row.target), row);
  }
  ScaledGradient count_scaled = acc.finalize(EstimatorMode::gce);
  ScaledGradient size_scaled = acc.finalize(EstimatorMode::classic);

  GroupId pink = fx.params.symbol_group(0, 1);
  GroupId rome = fx.params.symbol_group(1, 1);
  GroupId berlin = fx.params.symbol_group(1, 2);

  push_eq(out, "count-scaled batch update, Color=pink over rows {0,1,2}",
          count_scaled.grads[pink][0], -68.0, 1e-12);
  push_eq(out, "count-scaled batch update, City=Rome over rows {0,1,2}",
          count_scaled.grads[rome][0], -17.0, 1e-12);
  push_eq(out, "size-scaled batch update, Color=pink over rows {0,1,2}",
          size_scaled.grads[pink][0], -136.0 / 3.0, 1e-12);

  bool dropped = !count_scaled.masked(berlin) &&
                 count_scaled.grads[berlin].empty();
  push_eq(out, "unseen symbol absent from the count-scaled update",
          dropped ? 1.0 : 0.0, 1.0, 0.0);
  bool zeroed = size_scaled.masked(berlin) &&
                size_scaled.grads[berlin].size() == 1 &&
                size_scaled.grads[berlin][0] == 0.0;
  push_eq(out, "unseen symbol zero-filled in the size-scaled update",
          zeroed ? 1.0 : 0.0, 1.0, 0.0);
}

void check_balanced_identities(std::vector<CheckResult>& out) {
  Fixture fx = make_balanced();

  push_eq(out, "balanced data: group-mean objective equals plain mean",
          categorical_loss(fx.spec, fx.params, fx.data) - mean_loss(fx), 0.0,
          1e-12);

  GradAccumulator acc(fx.params);
  for (const Row& row : fx.data.rows())
    acc.accumulate(backward(fx.spec, fx.params, row, row.target), row);
  ScaledGradient count_scaled = acc.finalize(EstimatorMode::gce);
  ScaledGradient size_scaled = acc.finalize(EstimatorMode::classic);

  // Four rows, every group seen twice: count scaling is exactly twice the
  // size scaling, group by group.
  double worst = 0.0;
  for (GroupId g = 0; g < fx.params.group_count(); ++g)
    for (std::size_t i = 0; i < count_scaled.grads[g].size(); ++i)
      worst = std::max(worst, std::abs(count_scaled.grads[g][i] -
                                       2.0 * size_scaled.grads[g][i]));
  push_eq(out, "balanced full batch: count scaling = 2 x size scaling", worst,
          0.0, 1e-12);
}

void check_draw_averages(std::vector<CheckResult>& out,
                         const VerifyOptions& options) {
  Fixture fx = make_fixture();

  double worst = 0.0;
  for (std::size_t f = 0; f < fx.data.schema().feature_count(); ++f) {
    std::size_t card = fx.data.schema().feature(f).alphabet.size();
    for (std::size_t s = 0; s < card; ++s)
      for (std::size_t m : {1, 2, 3}) {
        ExpectationResult r = estimator_expectation_exhaustive(
            fx.spec, fx.params, fx.data, f, s, m);
        worst = std::max(worst, r.max_abs_error);
      }
  }
  push_eq(out,
          "exhaustive draw average equals group mean (all groups, m=1..3)",
          worst, 0.0, 1e-10);

  ExpectationResult pink = estimator_expectation_monte_carlo(
      fx.spec, fx.params, fx.data, 0, 1, 2, options.mc_trials,
      Rng::derive(options.seed, 101));
  push_eq(out, "Monte Carlo draw average, Color=pink, m=2 (rel err)",
          guarded_rel(pink.estimated[0], pink.exact[0]), 0.0, 0.02);

  ExpectationResult paris = estimator_expectation_monte_carlo(
      fx.spec, fx.params, fx.data, 1, 0, 4, options.mc_trials,
      Rng::derive(options.seed, 102));
  push_eq(out, "Monte Carlo draw average, City=Paris, m=4 (rel err)",
          guarded_rel(paris.estimated[0], paris.exact[0]), 0.0, 0.02);
}

void check_stopping_times(std::vector<CheckResult>& out,
                          const VerifyOptions& options) {
  push_eq(out, "first-hit probability, pool 5, subset 1, draw 2",
          stopping_time_p1(5, 1, 2), 0.36, 1e-15);

  double worst_rel = 0.0;
  double worst_violation = 0.0;
  std::uint64_t stream = 200;
  for (std::size_t z : {5, 10, 50}) {
    std::vector<std::size_t> subs = {1, z / 5, z / 2};
    std::sort(subs.begin(), subs.end());
    subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    for (std::size_t t : subs) {
      if (t == 0) continue;
      for (std::size_t m : {1, 2, 8}) {
        double expected = 1.0 / stopping_time_p1(z, t, m);
        DrawSpec spec;
        spec.z_size = z;
        spec.subset.resize(t);
        for (std::size_t i = 0; i < t; ++i) spec.subset[i] = i;
        spec.m = m;

        std::uint64_t seed = Rng::derive(options.seed, stream++);
        spec.mode = DrawMode::with_replacement;
        double with = stopping_time_simulate(spec, options.stop_trials, seed);
        spec.mode = DrawMode::without_replacement;
        double without =
            stopping_time_simulate(spec, options.stop_trials, seed);

        worst_rel =
            std::max(worst_rel, std::abs(with - expected) / expected);
        worst_violation = std::max(worst_violation, (without - with) / with);
      }
    }
  }
  push_eq(out, "mean draws to first hit vs closed form (max rel err on grid)",
          worst_rel, 0.0, 0.02);
  push_eq(out, "distinct-row draws hit no later (max violation on grid)",
          std::max(worst_violation, 0.0), 0.0, 0.01);
}

void check_gradients(std::vector<CheckResult>& out,
                     const VerifyOptions& options) {
  FeatureSchema schema({{"u", {"u0", "u1", "u2"}},
                        {"v", {"v0", "v1", "v2", "v3"}}});
  Rng rng(Rng::derive(options.seed, 300));

  auto random_row = [&](bool classify) {
    Row row;
    row.symbols = {static_cast<int>(rng.below(3)),
                   static_cast<int>(rng.below(4))};
    row.covariates = {rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};
    row.target = classify ? static_cast<double>(rng.below(3))
                          : rng.normal(0.0, 2.0);
    return row;
  };

  struct Case {
    std::string claim;
    ModelSpec spec;
    double step;
    double tol;
    bool classify;
  };
  std::vector<Case> cases;
  cases.push_back({"product model gradient vs central differences",
                   ModelSpec::make_product({{"u", "v"}, 0, true}), 1e-5, 1e-6,
                   false});
  cases.push_back({"mlp regression gradient vs central differences",
                   ModelSpec::make_mlp({{4, 8, 4}, 2}), 1e-6, 1e-5, false});
  cases.push_back({"mlp classification gradient vs central differences",
                   ModelSpec::make_mlp({{4, 8, 4}, 2}, Task::classification(3)),
                   1e-6, 1e-5, true});
  cases.push_back({"resnet regression gradient vs central differences",
                   ModelSpec::make_resnet({8, 2, 2}), 1e-6, 1e-5, false});

  for (const Case& c : cases) {
    ParamStore params = init_params(c.spec, schema, rng.next());
    // Fresh nets sit exactly on relu kinks: biases start at zero, so a fully
    // dead layer makes every later pre-activation exactly zero and the loss
    // non-differentiable there. Analytic backward picks the zero subgradient
    // while central differences average the one-sided slopes, and the two
    // legitimately disagree. Jitter every coordinate away from that set.
    for (GroupId g = 0; g < params.group_count(); ++g)
      for (double& v : params.values(g))
        v += (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.05, 0.15);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      Row row = random_row(c.classify);
      GradMap analytic = backward(c.spec, params, row, row.target);
      DenseGrads fd =
          finite_difference_gradient(c.spec, params, row, row.target, c.step);
      for (GroupId g = 0; g < params.group_count(); ++g) {
        const std::vector<double>* a = analytic.find(g);
        for (std::size_t i = 0; i < fd[g].size(); ++i) {
          double av = a ? (*a)[i] : 0.0; // untouched group: exact zero
          worst = std::max(worst, guarded_rel(av, fd[g][i]));
        }
      }
    }
    push_eq(out, c.claim, worst, 0.0, c.tol);
  }
}

} // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  check_fixture_values(out);
  check_batch_scaling(out);
  check_balanced_identities(out);
  check_draw_averages(out, options);
  check_stopping_times(out, options);
  check_gradients(out, options);
  return out;
}

bool all_passed(const std::vector<CheckResult>& checks) {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

void print_report(const std::vector<CheckResult>& checks, std::ostream& out) {
  std::size_t width = 0;
  for (const CheckResult& c : checks) width = std::max(width, c.claim.size());
  for (const CheckResult& c : checks) {
    out << (c.pass ? "[ ok ] " : "[FAIL] ") << std::left
        << std::setw(static_cast<int>(width + 2)) << c.claim << std::right
        << std::setprecision(12) << " computed=" << c.computed
        << " reference=" << c.reference << std::setprecision(2)
        << " tol=" << c.tolerance << '\n';
  }
  std::size_t passed = 0;
  for (const CheckResult& c : checks)
    if (c.pass) ++passed;
  out << passed << "/" << checks.size() << " checks passed\n";
}

} // namespace gce
