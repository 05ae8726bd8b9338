#include "gce/params.hpp"

#include "gce/error.hpp"

#include <algorithm>
#include <ostream>

namespace gce {

std::string ParamKey::to_string() const {
  if (kind_ == Kind::shared) return "shared " + name_;
  return "symbol " + name_ + " " + symbol_;
}

ParamStore::ParamStore(FeatureSchema schema) : schema_(std::move(schema)) {
  by_flat_.assign(schema_.total_symbols(), no_group);
}

GroupId ParamStore::add_shared(std::string name, std::vector<double> values) {
  if (name.empty()) throw InternalError("shared group needs a name");
  if (values.empty()) throw InternalError("empty parameter group");
  if (shared_by_name_.contains(name))
    throw InternalError("duplicate shared group '" + name + "'");
  GroupId g = keys_.size();
  shared_by_name_.emplace(name, g);
  total_params_ += values.size();
  keys_.push_back(ParamKey::shared(std::move(name)));
  values_.push_back(std::move(values));
  return g;
}

GroupId ParamStore::add_symbol(std::size_t feature, std::size_t symbol,
                               std::vector<double> values) {
  if (values.empty()) throw InternalError("empty parameter group");
  std::size_t flat = schema_.flat_index(feature, symbol);
  if (by_flat_[flat] != no_group)
    throw InternalError("duplicate symbol group for flat index " +
                        std::to_string(flat));
  GroupId g = keys_.size();
  by_flat_[flat] = g;
  total_params_ += values.size();
  keys_.push_back(ParamKey::symbol(schema_.feature(feature).name,
                                   schema_.feature(feature).alphabet[symbol]));
  values_.push_back(std::move(values));
  return g;
}

std::optional<GroupId> ParamStore::find(const ParamKey& key) const {
  if (key.kind() == ParamKey::Kind::shared) return shared_id(key.name());
  auto f = schema_.feature_index(key.name());
  if (!f) return std::nullopt;
  auto s = schema_.symbol_index(*f, key.symbol_name());
  if (!s) return std::nullopt;
  GroupId g = by_flat_[schema_.flat_index(*f, *s)];
  if (g == no_group) return std::nullopt;
  return g;
}

std::optional<GroupId> ParamStore::shared_id(std::string_view name) const {
  auto it = shared_by_name_.find(name);
  if (it == shared_by_name_.end()) return std::nullopt;
  return it->second;
}

void ParamStore::dump(std::ostream& out) const {
  auto old = out.precision(17);
  for (GroupId g = 0; g < keys_.size(); ++g) {
    out << keys_[g].to_string() << " =";
    for (double v : values_[g]) out << ' ' << v;
    out << '\n';
  }
  out.precision(old);
}

bool ParamStore::same_layout(const ParamStore& other) const {
  if (keys_.size() != other.keys_.size()) return false;
  for (GroupId g = 0; g < keys_.size(); ++g) {
    if (!(keys_[g] == other.keys_[g])) return false;
    if (values_[g].size() != other.values_[g].size()) return false;
  }
  return true;
}

std::vector<double>& GradMap::add(GroupId g, std::size_t size) {
  for (auto& [id, grad] : entries_)
    if (id == g) return grad;
  entries_.emplace_back(g, std::vector<double>(size, 0.0));
  return entries_.back().second;
}

const std::vector<double>* GradMap::find(GroupId g) const {
  for (const auto& [id, grad] : entries_)
    if (id == g) return &grad;
  return nullptr;
}

} // namespace gce
