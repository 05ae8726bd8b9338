#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gce {

struct Feature {
  std::string name;
  std::vector<std::string> alphabet; // distinct symbol spellings, fixed order
};

// Ordered list of categorical features with per-feature alphabets. The
// concatenation of the alphabets defines a flat indexing 0..p-1 used for
// one-hot layouts and per-symbol bookkeeping: feature blocks in feature
// order, symbols within a block in alphabet order.
class FeatureSchema {
public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<Feature> features);

  std::size_t feature_count() const { return features_.size(); }
  const Feature& feature(std::size_t f) const { return features_.at(f); }
  const std::vector<Feature>& features() const { return features_; }

  // p: total symbol count across all features. Always >= 1.
  std::size_t total_symbols() const { return total_; }

  // Start of feature f's block in the flat indexing.
  std::size_t block_offset(std::size_t f) const { return offsets_.at(f); }

  std::size_t flat_index(std::size_t f, std::size_t symbol) const;
  std::pair<std::size_t, std::size_t> unflatten(std::size_t flat) const;

  std::optional<std::size_t> feature_index(std::string_view name) const;
  std::optional<std::size_t> symbol_index(std::size_t f,
                                          std::string_view symbol) const;

  bool operator==(const FeatureSchema& other) const {
    if (features_.size() != other.features_.size()) return false;
    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (features_[f].name != other.features_[f].name ||
          features_[f].alphabet != other.features_[f].alphabet)
        return false;
    }
    return true;
  }

private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  using NameMap =
      std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>;

  std::vector<Feature> features_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
  NameMap feature_by_name_;
  std::vector<NameMap> symbol_by_name_;
};

} // namespace gce
