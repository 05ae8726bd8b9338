#include <doctest.h>

#include "fixtures.hpp"

#include <gce/error.hpp>
#include <gce/estimator.hpp>
#include <gce/model.hpp>

#include <vector>

using namespace gce;

namespace {

GradAccumulator accumulate_rows(const fx::Worked& w,
                                const std::vector<std::size_t>& rows) {
  GradAccumulator acc(w.params);
  for (std::size_t i : rows) {
    const Row& row = w.data.row(i);
    acc.accumulate(backward(w.spec, w.params, row, row.target), row);
  }
  return acc;
}

} // namespace

TEST_CASE("mode names round-trip") {
  CHECK(parse_estimator_mode("classic") == EstimatorMode::classic);
  CHECK(parse_estimator_mode("gce") == EstimatorMode::gce);
  CHECK(to_string(EstimatorMode::classic) == "classic");
  CHECK(to_string(EstimatorMode::gce) == "gce");
  CHECK_THROWS_AS(parse_estimator_mode("mean"), ConfigError);
}

TEST_CASE("per-symbol counters follow the batch rows") {
  fx::Worked w = fx::worked();
  GradAccumulator acc = accumulate_rows(w, {0, 1, 2});

  CHECK(acc.batch_rows() == 3);
  CHECK(acc.count(w.params.symbol_group(0, 0)) == 1); // blue: row 0
  CHECK(acc.count(w.params.symbol_group(0, 1)) == 2); // pink: rows 1, 2
  CHECK(acc.count(w.params.symbol_group(1, 0)) == 1); // Paris
  CHECK(acc.count(w.params.symbol_group(1, 1)) == 2); // Rome
  CHECK(acc.count(w.params.symbol_group(1, 2)) == 0); // Berlin absent
}

TEST_CASE("per-count scaling on the three-row batch") {
  fx::Worked w = fx::worked();
  ScaledGradient g = accumulate_rows(w, {0, 1, 2}).finalize(EstimatorMode::gce);

  GroupId pink = w.params.symbol_group(0, 1);
  GroupId rome = w.params.symbol_group(1, 1);
  CHECK(g.grads[pink][0] == doctest::Approx(-68.0).epsilon(1e-12));
  CHECK(g.grads[rome][0] == doctest::Approx(-17.0).epsilon(1e-12));

  // Berlin got no rows: no gradient, not in the mask.
  GroupId berlin = w.params.symbol_group(1, 2);
  CHECK(!g.masked(berlin));
  CHECK(g.grads[berlin].empty());

  // Present groups are masked in.
  CHECK(g.masked(pink));
  CHECK(g.masked(w.params.symbol_group(0, 0)));
}

TEST_CASE("batch-mean scaling on the three-row batch") {
  fx::Worked w = fx::worked();
  ScaledGradient g =
      accumulate_rows(w, {0, 1, 2}).finalize(EstimatorMode::classic);

  CHECK(g.grads[w.params.symbol_group(0, 1)][0] ==
        doctest::Approx(-136.0 / 3.0).epsilon(1e-12)); // pink
  CHECK(g.grads[w.params.symbol_group(0, 0)][0] ==
        doctest::Approx(-16.0).epsilon(1e-12)); // blue: -48/3
  CHECK(g.grads[w.params.symbol_group(1, 1)][0] ==
        doctest::Approx(-34.0 / 3.0).epsilon(1e-12)); // Rome
  CHECK(g.grads[w.params.symbol_group(1, 0)][0] ==
        doctest::Approx(-32.0 / 3.0).epsilon(1e-12)); // Paris

  // Absent symbol becomes an explicit zero and stays visible.
  GroupId berlin = w.params.symbol_group(1, 2);
  CHECK(g.masked(berlin));
  REQUIRE(g.grads[berlin].size() == 1);
  CHECK(g.grads[berlin][0] == 0.0);
}

TEST_CASE("row order inside a batch does not matter") {
  fx::Worked w = fx::worked();
  for (EstimatorMode mode : {EstimatorMode::classic, EstimatorMode::gce}) {
    ScaledGradient a = accumulate_rows(w, {0, 1, 2}).finalize(mode);
    ScaledGradient b = accumulate_rows(w, {2, 0, 1}).finalize(mode);
    REQUIRE(a.grads.size() == b.grads.size());
    for (GroupId g = 0; g < a.grads.size(); ++g) {
      CHECK(a.mask[g] == b.mask[g]);
      REQUIRE(a.grads[g].size() == b.grads[g].size());
      for (std::size_t i = 0; i < a.grads[g].size(); ++i)
        CHECK(a.grads[g][i] == doctest::Approx(b.grads[g][i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("reset clears sums, counts and the row counter") {
  fx::Worked w = fx::worked();
  GradAccumulator acc = accumulate_rows(w, {0, 1, 2});
  acc.reset();
  CHECK(acc.batch_rows() == 0);
  CHECK(acc.count(w.params.symbol_group(0, 1)) == 0);
  for (double v : acc.sum(w.params.symbol_group(0, 1))) CHECK(v == 0.0);

  // Accumulating after reset behaves like a fresh batch.
  const Row& row = w.data.row(0);
  acc.accumulate(backward(w.spec, w.params, row, row.target), row);
  ScaledGradient g = acc.finalize(EstimatorMode::gce);
  CHECK(g.grads[w.params.symbol_group(0, 0)][0] ==
        doctest::Approx(-48.0).epsilon(1e-12));
}

TEST_CASE("finalizing an empty batch is refused") {
  fx::Worked w = fx::worked();
  GradAccumulator acc(w.params);
  CHECK_THROWS_AS(acc.finalize(EstimatorMode::classic), EstimatorError);
  CHECK_THROWS_AS(acc.finalize(EstimatorMode::gce), EstimatorError);
}

TEST_CASE("gradient of the wrong shape is rejected") {
  fx::Worked w = fx::worked();
  GradAccumulator acc(w.params);
  GradMap bad;
  bad.add(w.params.symbol_group(0, 0), 3); // group holds 1 value, not 3
  CHECK_THROWS_AS(acc.accumulate(bad, w.data.row(0)), InternalError);
}

TEST_CASE("shared groups are batch means under both modes") {
  FeatureSchema schema({{"F", {"a", "b"}}});
  ModelSpec spec = ModelSpec::make_product({{"F"}, {}, true});
  ParamStore params = init_params(spec, schema, 0);
  params.values(params.symbol_group(0, 0))[0] = 2.0;
  params.values(params.symbol_group(0, 1))[0] = 3.0;

  // Targets 0 so residual = prediction. d/db = 2 * residual.
  std::vector<Row> rows = {{{0}, {}, 0.0}, {{0}, {}, 0.0}, {{1}, {}, 0.0}};
  GradAccumulator acc(params);
  for (const Row& r : rows)
    acc.accumulate(backward(spec, params, r, r.target), r);

  GroupId b = *params.shared_id("b");
  double want = (2 * 2.0 + 2 * 2.0 + 2 * 3.0) / 3.0;
  for (EstimatorMode mode : {EstimatorMode::classic, EstimatorMode::gce}) {
    ScaledGradient g = acc.finalize(mode);
    CHECK(g.masked(b));
    CHECK(g.grads[b][0] == doctest::Approx(want).epsilon(1e-12));
  }

  // Symbol group "a" appeared twice: gce divides by 2, classic by 3.
  GroupId ga = params.symbol_group(0, 0);
  double raw = 2 * 2.0 + 2 * 2.0; // two identical rows
  CHECK(acc.finalize(EstimatorMode::gce).grads[ga][0] ==
        doctest::Approx(raw / 2.0).epsilon(1e-12));
  CHECK(acc.finalize(EstimatorMode::classic).grads[ga][0] ==
        doctest::Approx(raw / 3.0).epsilon(1e-12));
}

TEST_CASE("duplicating every row leaves the per-count estimate unchanged") {
  fx::Worked w = fx::worked();
  std::vector<std::size_t> once = {0, 1, 2, 3, 4};
  std::vector<std::size_t> twice = {0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  ScaledGradient a = accumulate_rows(w, once).finalize(EstimatorMode::gce);
  ScaledGradient b = accumulate_rows(w, twice).finalize(EstimatorMode::gce);
  for (GroupId g = 0; g < a.grads.size(); ++g) {
    REQUIRE(a.grads[g].size() == b.grads[g].size());
    for (std::size_t i = 0; i < a.grads[g].size(); ++i)
      CHECK(a.grads[g][i] == doctest::Approx(b.grads[g][i]).epsilon(1e-12));
  }
}
