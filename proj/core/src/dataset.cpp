#include "gce/dataset.hpp"

#include "gce/error.hpp"
#include "gce/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gce {

EncodedDataset::EncodedDataset(FeatureSchema schema, std::vector<Row> rows,
                               Task task)
    : schema_(std::move(schema)), rows_(std::move(rows)), task_(task) {
  if (task_.kind == TaskKind::classification && task_.num_classes < 2)
    throw ConfigError("classification needs at least 2 classes");
  if (!rows_.empty()) covariate_count_ = rows_.front().covariates.size();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const Row& r = rows_[i];
    std::string at = "row " + std::to_string(i);
    if (r.symbols.size() != schema_.feature_count())
      throw DataError(at + ": expected " +
                      std::to_string(schema_.feature_count()) + " symbols");
    for (std::size_t f = 0; f < r.symbols.size(); ++f) {
      if (r.symbols[f] < 0 ||
          static_cast<std::size_t>(r.symbols[f]) >=
              schema_.feature(f).alphabet.size())
        throw DataError(at + ": symbol index out of range for feature '" +
                        schema_.feature(f).name + "'");
    }
    if (r.covariates.size() != covariate_count_)
      throw DataError(at + ": inconsistent covariate count");
    if (!std::isfinite(r.target)) throw DataError(at + ": non-finite target");
    if (task_.kind == TaskKind::classification) {
      double ip;
      if (std::modf(r.target, &ip) != 0.0 || r.target < 0.0 ||
          r.target >= static_cast<double>(task_.num_classes))
        throw DataError(at + ": class index must be an integer in [0, " +
                        std::to_string(task_.num_classes) + ")");
    }
  }
}

std::vector<double> one_hot(const Row& row, const FeatureSchema& schema) {
  if (row.symbols.size() != schema.feature_count())
    throw DataError("one_hot: row does not match schema");
  std::vector<double> x(schema.total_symbols(), 0.0);
  for (std::size_t f = 0; f < row.symbols.size(); ++f)
    x[schema.flat_index(f, static_cast<std::size_t>(row.symbols[f]))] = 1.0;
  return x;
}

SymbolGroups symbol_groups(const EncodedDataset& data) {
  SymbolGroups g;
  g.by_symbol.resize(data.schema().total_symbols());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Row& r = data.row(i);
    for (std::size_t f = 0; f < r.symbols.size(); ++f)
      g.by_symbol[data.schema().flat_index(
                      f, static_cast<std::size_t>(r.symbols[f]))]
          .push_back(i);
  }
  return g;
}

std::pair<EncodedDataset, EncodedDataset>
split_train_test(const EncodedDataset& data, double test_fraction,
                 std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test fraction must lie strictly between 0 and 1");
  if (data.size() < 2)
    throw ConfigError("need at least 2 rows to split");

  std::size_t n = data.size();
  auto want = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * test_fraction));
  std::size_t test_n = std::min(std::max<std::size_t>(want, 1), n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Row> test_rows, train_rows;
  test_rows.reserve(test_n);
  train_rows.reserve(n - test_n);
  for (std::size_t i = 0; i < n; ++i) {
    (i < test_n ? test_rows : train_rows).push_back(data.row(order[i]));
  }
  return {EncodedDataset(data.schema(), std::move(train_rows), data.task()),
          EncodedDataset(data.schema(), std::move(test_rows), data.task())};
}

std::vector<std::vector<std::size_t>>
make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
             BatchMode mode) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (n == 0) throw ConfigError("cannot batch an empty dataset");

  std::size_t count = (n + batch_size - 1) / batch_size;
  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(count);
  Rng rng(seed);

  if (mode == BatchMode::partition) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (std::size_t b = 0; b < count; ++b) {
      std::size_t lo = b * batch_size;
      std::size_t hi = std::min(lo + batch_size, n);
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(lo),
                           order.begin() + static_cast<std::ptrdiff_t>(hi));
    }
  } else {
    for (std::size_t b = 0; b < count; ++b) {
      std::vector<std::size_t> batch(batch_size);
      for (std::size_t i = 0; i < batch_size; ++i)
        batch[i] = static_cast<std::size_t>(rng.below(n));
      batches.push_back(std::move(batch));
    }
  }
  return batches;
}

} // namespace gce
