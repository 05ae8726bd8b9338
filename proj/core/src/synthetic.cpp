#include "gce/synthetic.hpp"

#include "gce/error.hpp"
#include "gce/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gce {

namespace {

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  while (s.size() < width) s.insert(s.begin(), '0');
  return s;
}

// Inverse-CDF sampler over ranks 1..card with mass proportional to r^(-s).
std::vector<double> zipf_cdf(std::size_t card, double s) {
  std::vector<double> cdf(card);
  double total = 0.0;
  for (std::size_t r = 0; r < card; ++r) {
    total += std::pow(static_cast<double>(r + 1), -s);
    cdf[r] = total;
  }
  for (double& c : cdf) c /= total;
  cdf.back() = 1.0;
  return cdf;
}

} // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_features == 0) throw ConfigError("need at least one feature");
  if (spec.n == 0) throw ConfigError("need at least one row");
  if (spec.noise_std < 0.0) throw ConfigError("noise level cannot be negative");
  if (spec.dist == SymbolDistribution::zipf && !(spec.zipf_s > 0.0))
    throw ConfigError("zipf exponent must be positive");

  std::vector<std::size_t> cards = spec.cardinalities;
  if (cards.size() == 1 && spec.num_features > 1)
    cards.assign(spec.num_features, cards[0]);
  if (cards.size() != spec.num_features)
    throw ConfigError("cardinalities must have one entry, or one per feature");
  for (std::size_t c : cards)
    if (c == 0) throw ConfigError("cardinality must be positive");

  std::vector<Feature> features;
  features.reserve(spec.num_features);
  for (std::size_t f = 0; f < spec.num_features; ++f) {
    Feature feat;
    feat.name = "f" + std::to_string(f);
    std::size_t width = std::to_string(cards[f] - 1).size();
    feat.alphabet.reserve(cards[f]);
    for (std::size_t s = 0; s < cards[f]; ++s)
      feat.alphabet.push_back("s" + padded(s, width));
    features.push_back(std::move(feat));
  }
  FeatureSchema schema(std::move(features));

  ModelSpec model;
  model.kind = ModelSpec::Kind::product;
  for (std::size_t f = 0; f < spec.num_features; ++f)
    model.product.factors.push_back(schema.feature(f).name);

  Rng rng(spec.seed);

  // Ground truth first, in flat symbol order, then the rows.
  ParamStore truth(schema);
  for (std::size_t f = 0; f < spec.num_features; ++f)
    for (std::size_t s = 0; s < cards[f]; ++s)
      truth.add_symbol(f, s, {rng.uniform(0.5, 2.5)});

  std::vector<std::vector<double>> cdfs;
  if (spec.dist == SymbolDistribution::zipf) {
    cdfs.reserve(spec.num_features);
    for (std::size_t f = 0; f < spec.num_features; ++f)
      cdfs.push_back(zipf_cdf(cards[f], spec.zipf_s));
  }

  std::vector<Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Row row;
    row.symbols.reserve(spec.num_features);
    for (std::size_t f = 0; f < spec.num_features; ++f) {
      std::size_t sym;
      if (spec.dist == SymbolDistribution::uniform) {
        sym = static_cast<std::size_t>(rng.below(cards[f]));
      } else {
        double u = rng.uniform01();
        sym = static_cast<std::size_t>(
            std::lower_bound(cdfs[f].begin(), cdfs[f].end(), u) -
            cdfs[f].begin());
      }
      row.symbols.push_back(static_cast<int>(sym));
    }
    row.target = forward(model, truth, row)[0];
    if (spec.noise_std > 0.0) row.target += rng.normal(0.0, spec.noise_std);
    rows.push_back(std::move(row));
  }

  return {EncodedDataset(schema, std::move(rows), Task::regression()),
          std::move(truth), std::move(model)};
}

} // namespace gce
