#pragma once

#include "gce/schema.hpp"

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gce {

using GroupId = std::size_t;
inline constexpr GroupId no_group = std::numeric_limits<GroupId>::max();

// Identity of one parameter group: either a named shared group (touched by
// every row) or a per-symbol group owned by one (feature, symbol) pair.
class ParamKey {
public:
  enum class Kind { shared, symbol };

  static ParamKey shared(std::string name) {
    return ParamKey(Kind::shared, std::move(name), {});
  }
  static ParamKey symbol(std::string feature, std::string symbol) {
    return ParamKey(Kind::symbol, std::move(feature), std::move(symbol));
  }

  Kind kind() const { return kind_; }
  // Shared: the group name. Symbol: the feature name.
  const std::string& name() const { return name_; }
  const std::string& symbol_name() const { return symbol_; }

  bool operator==(const ParamKey&) const = default;
  std::string to_string() const;

private:
  ParamKey(Kind kind, std::string name, std::string symbol)
      : kind_(kind), name_(std::move(name)), symbol_(std::move(symbol)) {}

  Kind kind_;
  std::string name_;
  std::string symbol_;
};

// Flat store of parameter groups, addressed by dense GroupId in registration
// order. Symbol groups are additionally reachable through the schema's flat
// symbol indexing, which is what the training loop uses.
class ParamStore {
public:
  explicit ParamStore(FeatureSchema schema);

  GroupId add_shared(std::string name, std::vector<double> values);
  GroupId add_symbol(std::size_t feature, std::size_t symbol,
                     std::vector<double> values);

  std::size_t group_count() const { return values_.size(); }
  std::size_t total_params() const { return total_params_; }
  const FeatureSchema& schema() const { return schema_; }

  std::span<double> values(GroupId g) { return values_.at(g); }
  std::span<const double> values(GroupId g) const { return values_.at(g); }
  std::size_t group_size(GroupId g) const { return values_.at(g).size(); }
  const ParamKey& key(GroupId g) const { return keys_.at(g); }
  bool is_symbol(GroupId g) const {
    return keys_.at(g).kind() == ParamKey::Kind::symbol;
  }

  std::optional<GroupId> find(const ParamKey& key) const;
  std::optional<GroupId> shared_id(std::string_view name) const;

  // Group owning the given flat symbol index, or no_group if the model has
  // no parameters for that symbol.
  GroupId symbol_group(std::size_t flat) const { return by_flat_.at(flat); }
  GroupId symbol_group(std::size_t feature, std::size_t symbol) const {
    return by_flat_.at(schema_.flat_index(feature, symbol));
  }

  // One line per group: "shared <name> = v..." or
  // "symbol <feature> <symbol> = v...", full round-trip precision.
  void dump(std::ostream& out) const;

  bool same_layout(const ParamStore& other) const;

private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  FeatureSchema schema_;
  std::vector<ParamKey> keys_;
  std::vector<std::vector<double>> values_;
  std::vector<GroupId> by_flat_; // flat symbol index -> group
  std::unordered_map<std::string, GroupId, StringHash, std::equal_to<>>
      shared_by_name_;
  std::size_t total_params_ = 0;
};

// Per-row gradients, present only for the groups the row touches: every
// shared group plus the groups of the row's own symbols. A group that is
// missing here was not observed; that is different from a zero gradient.
class GradMap {
public:
  std::vector<double>& add(GroupId g, std::size_t size);
  const std::vector<double>* find(GroupId g) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

private:
  // Deque so references from add() survive later insertions; backward()
  // holds gradient rows for several groups at once while it fills them.
  std::deque<std::pair<GroupId, std::vector<double>>> entries_;
};

} // namespace gce
