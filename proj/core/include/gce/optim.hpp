#pragma once

#include "gce/estimator.hpp"
#include "gce/params.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gce {

enum class OptimizerKind { sgd, adagrad, adam };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct OptimizerHyper {
  double lr = 0.0; // 0 picks the kind's default
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 0.0; // 0 picks the kind's default
};

// lr: sgd 1e-2, adagrad 1e-2, adam 1e-3. eps: adagrad 1e-10, adam 1e-8.
OptimizerHyper default_hyper(OptimizerKind kind);

// Mask-respecting first-order optimizer. apply_update touches parameters and
// internal state only for groups inside the gradient mask; everything else
// stays bit-identical, including adam's per-group step counter, so a group
// that sat out a batch looks exactly as if the batch never happened.
class Optimizer {
public:
  Optimizer(OptimizerKind kind, OptimizerHyper hyper, const ParamStore& params);

  void apply_update(ParamStore& params, const ScaledGradient& grad);

  OptimizerKind kind() const { return kind_; }
  const OptimizerHyper& hyper() const { return hyper_; }

  // State inspection, mostly for tests and dumps.
  std::span<const double> adagrad_accum(GroupId g) const;
  std::span<const double> adam_m(GroupId g) const;
  std::span<const double> adam_v(GroupId g) const;
  std::uint64_t adam_step(GroupId g) const;

private:
  OptimizerKind kind_;
  OptimizerHyper hyper_;
  std::vector<std::vector<double>> accum_; // adagrad
  std::vector<std::vector<double>> m_, v_; // adam moments
  std::vector<std::uint64_t> step_;        // adam per-group step count
};

} // namespace gce
