#include "gce/schema.hpp"

#include "gce/error.hpp"

namespace gce {

FeatureSchema::FeatureSchema(std::vector<Feature> features)
    : features_(std::move(features)) {
  if (features_.empty())
    throw SchemaError("schema needs at least one feature");
  offsets_.reserve(features_.size());
  symbol_by_name_.resize(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const Feature& feat = features_[f];
    if (feat.name.empty()) throw SchemaError("feature with empty name");
    if (feat.alphabet.empty())
      throw SchemaError("feature '" + feat.name + "' has an empty alphabet");
    if (!feature_by_name_.emplace(feat.name, f).second)
      throw SchemaError("duplicate feature name '" + feat.name + "'");
    offsets_.push_back(total_);
    for (std::size_t s = 0; s < feat.alphabet.size(); ++s) {
      if (!symbol_by_name_[f].emplace(feat.alphabet[s], s).second)
        throw SchemaError("feature '" + feat.name + "' repeats symbol '" +
                          feat.alphabet[s] + "'");
    }
    total_ += feat.alphabet.size();
  }
}

std::size_t FeatureSchema::flat_index(std::size_t f, std::size_t symbol) const {
  if (f >= features_.size() || symbol >= features_[f].alphabet.size())
    throw InternalError("flat_index out of range");
  return offsets_[f] + symbol;
}

std::pair<std::size_t, std::size_t>
FeatureSchema::unflatten(std::size_t flat) const {
  if (flat >= total_) throw InternalError("unflatten out of range");
  std::size_t f = features_.size() - 1;
  while (offsets_[f] > flat) --f;
  return {f, flat - offsets_[f]};
}

std::optional<std::size_t>
FeatureSchema::feature_index(std::string_view name) const {
  auto it = feature_by_name_.find(name);
  if (it == feature_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t>
FeatureSchema::symbol_index(std::size_t f, std::string_view symbol) const {
  if (f >= features_.size()) return std::nullopt;
  auto it = symbol_by_name_[f].find(symbol);
  if (it == symbol_by_name_[f].end()) return std::nullopt;
  return it->second;
}

} // namespace gce
