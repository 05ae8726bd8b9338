#pragma once

#include "gce/dataset.hpp"
#include "gce/model.hpp"
#include "gce/params.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gce {

// Dense gradient over every group of a store, indexed by GroupId.
using DenseGrads = std::vector<std::vector<double>>;

// Group-balanced objective: average over non-empty symbol groups of the
// within-group mean per-row loss,
//
//   (1/p') * sum over groups S_k of (1/|S_k|) * sum over rows in S_k of f(row)
//
// where p' counts the non-empty groups in `data`. On balanced data (all
// groups the same size) this collapses to the plain mean loss.
double categorical_loss(const ModelSpec& spec, const ParamStore& params,
                        const EncodedDataset& data);

// Exact gradient of categorical_loss with respect to every parameter group.
DenseGrads full_categorical_gradient(const ModelSpec& spec,
                                     const ParamStore& params,
                                     const EncodedDataset& data);

// Diagnostics for the batch estimator's per-group expectation. The score of
// a row is its loss gradient restricted to the chosen symbol group's
// parameters; `exact` is the plain average of scores over the group.
struct ExpectationResult {
  std::vector<double> estimated;
  std::vector<double> exact;
  double max_abs_error = 0.0;
  std::size_t draws_used = 0; // draws with a non-empty group intersection
};

// Enumerates every ordered with-replacement draw of m rows (n^m of them,
// refused above 10^6), discards draws that miss the group, and averages the
// group-restricted score over the rest. For an unbiased estimator the result
// equals `exact` up to rounding.
ExpectationResult estimator_expectation_exhaustive(const ModelSpec& spec,
                                                   const ParamStore& params,
                                                   const EncodedDataset& data,
                                                   std::size_t feature,
                                                   std::size_t symbol,
                                                   std::size_t m);

// Same quantity estimated from `trials` random draws.
ExpectationResult estimator_expectation_monte_carlo(
    const ModelSpec& spec, const ParamStore& params, const EncodedDataset& data,
    std::size_t feature, std::size_t symbol, std::size_t m, std::size_t trials,
    std::uint64_t seed);

// Probability that one uniform with-replacement draw of m rows from a pool
// of z intersects a fixed subset of t rows: 1 - ((z - t) / z)^m. The number
// of draws until the first hit is geometric with this parameter, so its mean
// is the reciprocal.
double stopping_time_p1(std::size_t z_size, std::size_t t_size, std::size_t m);

enum class DrawMode { with_replacement, without_replacement };

struct DrawSpec {
  std::size_t z_size = 0;
  std::vector<std::size_t> subset; // row indices of the target subset
  std::size_t m = 1;               // rows per draw
  DrawMode mode = DrawMode::with_replacement;
};

// Mean number of draws until the subset is first hit, over `trials`
// simulated sequences. Without-replacement draws use min(m, z_size) distinct
// rows per draw.
double stopping_time_simulate(const DrawSpec& spec, std::size_t trials,
                              std::uint64_t seed);

// Central finite differences of an arbitrary scalar function of the
// parameters, evaluated group by group. The baseline gradient oracle: it
// goes through forward evaluation only.
DenseGrads finite_difference(const ParamStore& params,
                             const std::function<double(const ParamStore&)>& fn,
                             double step);

// Finite differences of the per-row loss; comparison target for backward().
DenseGrads finite_difference_gradient(const ModelSpec& spec,
                                      const ParamStore& params, const Row& row,
                                      double target, double step);

} // namespace gce
