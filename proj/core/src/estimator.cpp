#include "gce/estimator.hpp"

#include "gce/error.hpp"

#include <string>

namespace gce {

EstimatorMode parse_estimator_mode(std::string_view name) {
  if (name == "classic") return EstimatorMode::classic;
  if (name == "gce") return EstimatorMode::gce;
  throw ConfigError("unknown estimator '" + std::string(name) +
                    "' (expected classic or gce)");
}

std::string_view to_string(EstimatorMode mode) {
  return mode == EstimatorMode::classic ? "classic" : "gce";
}

GradAccumulator::GradAccumulator(const ParamStore& params) : params_(&params) {
  sums_.resize(params.group_count());
  for (GroupId g = 0; g < params.group_count(); ++g)
    sums_[g].assign(params.group_size(g), 0.0);
  counts_.assign(params.group_count(), 0);
}

void GradAccumulator::accumulate(const GradMap& row_grads, const Row& row) {
  const ParamStore& params = *params_;
  for (const auto& [g, grad] : row_grads) {
    if (g >= sums_.size() || grad.size() != sums_[g].size())
      throw InternalError("gradient entry does not match store layout");
    if (params.is_symbol(g)) {
      // Symbol gradients may only come from the row's own symbols.
      bool owned = false;
      for (std::size_t f = 0; f < row.symbols.size(); ++f) {
        if (params.symbol_group(f, static_cast<std::size_t>(row.symbols[f])) ==
            g) {
          owned = true;
          break;
        }
      }
      if (!owned)
        throw InternalError("gradient for a symbol the row does not carry");
    }
    std::vector<double>& sum = sums_[g];
    for (std::size_t i = 0; i < grad.size(); ++i) sum[i] += grad[i];
  }
  for (std::size_t f = 0; f < row.symbols.size(); ++f) {
    GroupId g =
        params.symbol_group(f, static_cast<std::size_t>(row.symbols[f]));
    if (g != no_group) ++counts_[g];
  }
  ++batch_rows_;
}

ScaledGradient GradAccumulator::finalize(EstimatorMode mode) const {
  if (batch_rows_ == 0)
    throw EstimatorError("finalize on an empty batch");
  const ParamStore& params = *params_;
  ScaledGradient out;
  out.grads.resize(sums_.size());
  out.mask.assign(sums_.size(), 0);
  double inv_batch = 1.0 / static_cast<double>(batch_rows_);

  for (GroupId g = 0; g < sums_.size(); ++g) {
    bool symbol = params.is_symbol(g);
    if (mode == EstimatorMode::gce && symbol) {
      std::uint64_t c = counts_[g];
      if (c == 0) continue; // not observed: no gradient, no mask, no update
      out.grads[g].resize(sums_[g].size());
      double inv = 1.0 / static_cast<double>(c);
      for (std::size_t i = 0; i < sums_[g].size(); ++i)
        out.grads[g][i] = sums_[g][i] * inv;
    } else {
      out.grads[g].resize(sums_[g].size());
      for (std::size_t i = 0; i < sums_[g].size(); ++i)
        out.grads[g][i] = sums_[g][i] * inv_batch;
    }
    out.mask[g] = 1;
  }
  return out;
}

void GradAccumulator::reset() {
  for (std::vector<double>& s : sums_) s.assign(s.size(), 0.0);
  counts_.assign(counts_.size(), 0);
  batch_rows_ = 0;
}

} // namespace gce
