#pragma once

#include "gce/dataset.hpp"
#include "gce/params.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace gce {

enum class EstimatorMode {
  classic, // every group scaled by 1/batch_size, absent symbols become zeros
  gce,     // per-symbol groups scaled by 1/count, zero-count groups dropped
};

EstimatorMode parse_estimator_mode(std::string_view name);
std::string_view to_string(EstimatorMode mode);

// Batch gradient after finalize. Dense over group ids: grads[g] is empty for
// groups without a gradient. The mask says which groups the optimizer may
// touch; masked groups always carry a gradient vector of the group's size.
struct ScaledGradient {
  std::vector<std::vector<double>> grads;
  std::vector<std::uint8_t> mask;

  bool masked(GroupId g) const { return mask[g] != 0; }
};

// Accumulates raw per-row gradients over one batch, counting how many rows
// touched each per-symbol group. finalize() turns the sums into a batch
// update:
//
//   classic  every group is the batch mean (sum / batch size). Symbol groups
//            that no row touched get explicit zero vectors and stay in the
//            mask, so the optimizer still sees them.
//   gce      each symbol group is averaged over the rows that actually
//            carried it (sum / count); zero-count groups are excluded from
//            the mask and the optimizer never hears about them. Shared
//            groups are batch means as in classic.
class GradAccumulator {
public:
  explicit GradAccumulator(const ParamStore& params);

  // Adds one row's gradients. `row` supplies the symbols whose counters
  // advance; its gradient map must hold exactly the groups backward()
  // produces for it.
  void accumulate(const GradMap& row_grads, const Row& row);

  ScaledGradient finalize(EstimatorMode mode) const;

  void reset();

  std::size_t batch_rows() const { return batch_rows_; }
  std::uint64_t count(GroupId g) const { return counts_.at(g); }
  const std::vector<double>& sum(GroupId g) const { return sums_.at(g); }

private:
  const ParamStore* params_;
  std::vector<std::vector<double>> sums_; // per group, zero-filled
  std::vector<std::uint64_t> counts_;     // per group; used for symbol groups
  std::size_t batch_rows_ = 0;
};

} // namespace gce
