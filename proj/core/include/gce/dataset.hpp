#pragma once

#include "gce/schema.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace gce {

enum class TaskKind { regression, classification };

struct Task {
  TaskKind kind = TaskKind::regression;
  int num_classes = 0; // classification only

  static Task regression() { return {TaskKind::regression, 0}; }
  static Task classification(int num_classes) {
    return {TaskKind::classification, num_classes};
  }
};

struct Row {
  std::vector<int> symbols;       // one alphabet index per feature
  std::vector<double> covariates; // optional numeric columns
  double target = 0.0;            // value, or class index for classification
};

// Immutable encoded table. Construction validates every row against the
// schema and the task, so downstream code can index without checks.
class EncodedDataset {
public:
  EncodedDataset(FeatureSchema schema, std::vector<Row> rows, Task task);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  const Row& row(std::size_t i) const { return rows_.at(i); }
  std::size_t size() const { return rows_.size(); }
  const Task& task() const { return task_; }
  std::size_t covariate_count() const { return covariate_count_; }

private:
  FeatureSchema schema_;
  std::vector<Row> rows_;
  Task task_;
  std::size_t covariate_count_ = 0;
};

// Row indices grouped by flat symbol index. A group holds the rows in which
// that symbol occurs; groups of unused symbols are empty. For every feature
// the groups of its block partition the row set.
struct SymbolGroups {
  std::vector<std::vector<std::size_t>> by_symbol; // size = total_symbols()
};

// Dense one-hot encoding of the row's categorical part: length p, exactly
// one 1 per feature block.
std::vector<double> one_hot(const Row& row, const FeatureSchema& schema);

SymbolGroups symbol_groups(const EncodedDataset& data);

// Deterministic shuffled split. The test side gets round(n * test_fraction)
// rows, clamped to [1, n-1], so neither side is ever empty.
std::pair<EncodedDataset, EncodedDataset>
split_train_test(const EncodedDataset& data, double test_fraction,
                 std::uint64_t seed);

enum class BatchMode {
  partition,        // shuffle, then split into ceil(n / batch) chunks
  with_replacement, // every batch is batch_size independent uniform draws
};

// Batches of row indices for one pass over n rows. Partition mode keeps a
// short final batch instead of dropping rows.
std::vector<std::vector<std::size_t>>
make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
             BatchMode mode);

} // namespace gce
