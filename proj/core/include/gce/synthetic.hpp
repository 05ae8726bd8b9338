#pragma once

#include "gce/dataset.hpp"
#include "gce/model.hpp"

#include <cstdint>
#include <vector>

namespace gce {

enum class SymbolDistribution {
  uniform,
  zipf, // rank r drawn with probability proportional to r^(-s)
};

struct SyntheticSpec {
  std::size_t num_features = 1;
  std::vector<std::size_t> cardinalities; // one entry, or one per feature
  SymbolDistribution dist = SymbolDistribution::uniform;
  double zipf_s = 1.5;
  std::size_t n = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  EncodedDataset dataset;
  ParamStore ground_truth; // scalar per symbol
  ModelSpec model;         // the product model the targets came from
};

// Regression table with known structure: symbols drawn per feature from the
// requested distribution, targets from a product model with per-symbol
// scalars drawn uniformly from [0.5, 2.5], plus Gaussian noise. Everything
// is a pure function of the spec, including its seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

} // namespace gce
