#include "gce/theory.hpp"

#include "gce/error.hpp"
#include "gce/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gce {

namespace {

double row_loss(const ModelSpec& spec, const ParamStore& params,
                const Row& row) {
  return loss_value(forward(spec, params, row), row.target, spec.task);
}

// Group-restricted score of each row in the group: the row's loss gradient
// in the group's parameters.
std::vector<std::vector<double>> group_scores(
    const ModelSpec& spec, const ParamStore& params, const EncodedDataset& data,
    const std::vector<std::size_t>& members, GroupId group) {
  std::vector<std::vector<double>> scores;
  scores.reserve(members.size());
  for (std::size_t r : members) {
    GradMap grads = backward(spec, params, data.row(r), data.row(r).target);
    const std::vector<double>* s = grads.find(group);
    if (!s)
      throw InternalError("group member row produced no gradient for it");
    scores.push_back(*s);
  }
  return scores;
}

GroupId resolve_symbol_group(const ParamStore& params, std::size_t feature,
                             std::size_t symbol) {
  GroupId g = params.symbol_group(feature, symbol);
  if (g == no_group)
    throw ConfigError("model has no parameters for that symbol");
  return g;
}

ExpectationResult finish_expectation(
    const std::vector<std::vector<double>>& scores,
    const std::vector<double>& sum, std::size_t used) {
  ExpectationResult out;
  std::size_t width = scores.front().size();
  out.exact.assign(width, 0.0);
  for (const std::vector<double>& s : scores)
    for (std::size_t i = 0; i < width; ++i) out.exact[i] += s[i];
  for (double& v : out.exact) v /= static_cast<double>(scores.size());

  out.draws_used = used;
  out.estimated.assign(width, 0.0);
  if (used > 0) {
    for (std::size_t i = 0; i < width; ++i)
      out.estimated[i] = sum[i] / static_cast<double>(used);
    for (std::size_t i = 0; i < width; ++i)
      out.max_abs_error =
          std::max(out.max_abs_error, std::abs(out.estimated[i] - out.exact[i]));
  } else {
    out.max_abs_error = std::numeric_limits<double>::infinity();
  }
  return out;
}

} // namespace

double categorical_loss(const ModelSpec& spec, const ParamStore& params,
                        const EncodedDataset& data) {
  if (data.size() == 0) throw ConfigError("empty dataset");
  SymbolGroups groups = symbol_groups(data);

  std::vector<double> losses;
  losses.reserve(data.size());
  for (const Row& row : data.rows()) losses.push_back(row_loss(spec, params, row));

  double total = 0.0;
  std::size_t nonempty = 0;
  for (const std::vector<std::size_t>& members : groups.by_symbol) {
    if (members.empty()) continue;
    ++nonempty;
    double group_sum = 0.0;
    for (std::size_t r : members) group_sum += losses[r];
    total += group_sum / static_cast<double>(members.size());
  }
  return total / static_cast<double>(nonempty);
}

DenseGrads full_categorical_gradient(const ModelSpec& spec,
                                     const ParamStore& params,
                                     const EncodedDataset& data) {
  if (data.size() == 0) throw ConfigError("empty dataset");
  SymbolGroups groups = symbol_groups(data);

  std::size_t nonempty = 0;
  for (const std::vector<std::size_t>& members : groups.by_symbol)
    if (!members.empty()) ++nonempty;

  DenseGrads total(params.group_count());
  for (GroupId g = 0; g < params.group_count(); ++g)
    total[g].assign(params.group_size(g), 0.0);

  // Rows enter once per group membership, weighted by that group's size.
  for (const std::vector<std::size_t>& members : groups.by_symbol) {
    if (members.empty()) continue;
    double w = 1.0 / (static_cast<double>(nonempty) *
                      static_cast<double>(members.size()));
    for (std::size_t r : members) {
      GradMap grads = backward(spec, params, data.row(r), data.row(r).target);
      for (const auto& [g, grad] : grads)
        for (std::size_t i = 0; i < grad.size(); ++i) total[g][i] += w * grad[i];
    }
  }
  return total;
}

ExpectationResult estimator_expectation_exhaustive(const ModelSpec& spec,
                                                   const ParamStore& params,
                                                   const EncodedDataset& data,
                                                   std::size_t feature,
                                                   std::size_t symbol,
                                                   std::size_t m) {
  if (m == 0) throw ConfigError("draw size m must be positive");
  std::size_t n = data.size();
  if (n == 0) throw ConfigError("empty dataset");

  double combos = std::pow(static_cast<double>(n), static_cast<double>(m));
  if (combos > 1e6)
    throw SizeError("n^m = " + std::to_string(combos) +
                    " ordered draws is too many to enumerate");

  GroupId group = resolve_symbol_group(params, feature, symbol);
  SymbolGroups groups = symbol_groups(data);
  const std::vector<std::size_t>& members =
      groups.by_symbol[data.schema().flat_index(feature, symbol)];
  if (members.empty()) throw ConfigError("symbol group is empty in this data");

  auto scores = group_scores(spec, params, data, members, group);
  std::vector<const std::vector<double>*> score_of(n, nullptr);
  for (std::size_t i = 0; i < members.size(); ++i)
    score_of[members[i]] = &scores[i];

  std::size_t width = scores.front().size();
  std::vector<double> sum(width, 0.0), draw_sum(width);
  std::size_t used = 0;

  // Odometer over all n^m ordered draws.
  std::vector<std::size_t> draw(m, 0);
  while (true) {
    draw_sum.assign(width, 0.0);
    std::size_t hits = 0;
    for (std::size_t r : draw) {
      if (const std::vector<double>* s = score_of[r]) {
        ++hits;
        for (std::size_t i = 0; i < width; ++i) draw_sum[i] += (*s)[i];
      }
    }
    if (hits > 0) {
      ++used;
      for (std::size_t i = 0; i < width; ++i)
        sum[i] += draw_sum[i] / static_cast<double>(hits);
    }
    std::size_t pos = 0;
    while (pos < m && ++draw[pos] == n) draw[pos++] = 0;
    if (pos == m) break;
  }
  return finish_expectation(scores, sum, used);
}

ExpectationResult estimator_expectation_monte_carlo(
    const ModelSpec& spec, const ParamStore& params, const EncodedDataset& data,
    std::size_t feature, std::size_t symbol, std::size_t m, std::size_t trials,
    std::uint64_t seed) {
  if (m == 0) throw ConfigError("draw size m must be positive");
  if (trials == 0) throw ConfigError("trials must be positive");
  std::size_t n = data.size();
  if (n == 0) throw ConfigError("empty dataset");

  GroupId group = resolve_symbol_group(params, feature, symbol);
  SymbolGroups groups = symbol_groups(data);
  const std::vector<std::size_t>& members =
      groups.by_symbol[data.schema().flat_index(feature, symbol)];
  if (members.empty()) throw ConfigError("symbol group is empty in this data");

  auto scores = group_scores(spec, params, data, members, group);
  std::vector<const std::vector<double>*> score_of(n, nullptr);
  for (std::size_t i = 0; i < members.size(); ++i)
    score_of[members[i]] = &scores[i];

  std::size_t width = scores.front().size();
  std::vector<double> sum(width, 0.0), draw_sum(width);
  std::size_t used = 0;
  Rng rng(seed);

  for (std::size_t t = 0; t < trials; ++t) {
    draw_sum.assign(width, 0.0);
    std::size_t hits = 0;
    for (std::size_t k = 0; k < m; ++k) {
      auto r = static_cast<std::size_t>(rng.below(n));
      if (const std::vector<double>* s = score_of[r]) {
        ++hits;
        for (std::size_t i = 0; i < width; ++i) draw_sum[i] += (*s)[i];
      }
    }
    if (hits > 0) {
      ++used;
      for (std::size_t i = 0; i < width; ++i)
        sum[i] += draw_sum[i] / static_cast<double>(hits);
    }
  }
  return finish_expectation(scores, sum, used);
}

double stopping_time_p1(std::size_t z_size, std::size_t t_size,
                        std::size_t m) {
  if (z_size == 0 || t_size == 0 || t_size > z_size)
    throw ConfigError("need 0 < subset size <= pool size");
  if (m == 0) throw ConfigError("draw size m must be positive");
  double miss = static_cast<double>(z_size - t_size) /
                static_cast<double>(z_size);
  return 1.0 - std::pow(miss, static_cast<double>(m));
}

double stopping_time_simulate(const DrawSpec& spec, std::size_t trials,
                              std::uint64_t seed) {
  if (trials == 0) throw ConfigError("trials must be positive");
  if (spec.z_size == 0) throw ConfigError("empty pool");
  if (spec.subset.empty()) throw ConfigError("empty subset never gets hit");
  if (spec.m == 0) throw ConfigError("draw size m must be positive");

  std::vector<char> in_subset(spec.z_size, 0);
  for (std::size_t r : spec.subset) {
    if (r >= spec.z_size) throw ConfigError("subset row outside the pool");
    in_subset[r] = 1;
  }

  Rng rng(seed);
  double total = 0.0;

  if (spec.mode == DrawMode::with_replacement) {
    for (std::size_t t = 0; t < trials; ++t) {
      std::uint64_t draws = 0;
      bool hit = false;
      while (!hit) {
        ++draws;
        for (std::size_t k = 0; k < spec.m; ++k)
          if (in_subset[rng.below(spec.z_size)]) hit = true;
      }
      total += static_cast<double>(draws);
    }
  } else {
    std::size_t m = std::min(spec.m, spec.z_size);
    std::vector<std::size_t> pool(spec.z_size);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t t = 0; t < trials; ++t) {
      std::uint64_t draws = 0;
      bool hit = false;
      while (!hit) {
        ++draws;
        // Partial Fisher-Yates: the first m entries become a uniform
        // m-subset regardless of the pool's current order.
        for (std::size_t i = 0; i < m; ++i) {
          std::size_t j =
              i + static_cast<std::size_t>(rng.below(spec.z_size - i));
          std::swap(pool[i], pool[j]);
          if (in_subset[pool[i]]) hit = true;
        }
      }
      total += static_cast<double>(draws);
    }
  }
  return total / static_cast<double>(trials);
}

DenseGrads finite_difference(const ParamStore& params,
                             const std::function<double(const ParamStore&)>& fn,
                             double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  ParamStore work = params;
  DenseGrads out(params.group_count());
  for (GroupId g = 0; g < params.group_count(); ++g) {
    out[g].resize(params.group_size(g));
    std::span<double> theta = work.values(g);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double saved = theta[i];
      theta[i] = saved + step;
      double hi = fn(work);
      theta[i] = saved - step;
      double lo = fn(work);
      theta[i] = saved;
      out[g][i] = (hi - lo) / (2.0 * step);
    }
  }
  return out;
}

DenseGrads finite_difference_gradient(const ModelSpec& spec,
                                      const ParamStore& params, const Row& row,
                                      double target, double step) {
  return finite_difference(
      params,
      [&](const ParamStore& p) {
        return loss_value(forward(spec, p, row), target, spec.task);
      },
      step);
}

} // namespace gce
