#pragma once

#include "gce/dataset.hpp"
#include "gce/schema.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gce {

// Text description of how to read a CSV: which columns are categorical
// features, which column is the target, which numeric columns to carry
// along, and the task kind. Serialized as a line-oriented key = value file:
//
//   # sales data
//   features = Color, Store
//   target = Sales
//   covariates = Distance
//   task = regression            (or: classification, classes = 4)
//
// Keys may appear in any order; features and target are required.
struct DatasetSpec {
  std::vector<std::string> features;
  std::string target;
  std::vector<std::string> covariates;
  Task task = Task::regression();
};

DatasetSpec read_dataset_spec(const std::filesystem::path& file);
void write_dataset_spec(const std::filesystem::path& file,
                        const DatasetSpec& spec);

// Scans the CSV once and builds per-feature alphabets from the distinct
// values observed, sorted lexicographically (by byte order).
FeatureSchema infer_schema(const std::filesystem::path& csv,
                           const std::vector<std::string>& feature_columns);

// Encodes the CSV against a fixed schema. A value outside the schema's
// alphabet is an error, never a silent extension.
EncodedDataset load_csv(const std::filesystem::path& csv,
                        const FeatureSchema& schema, const std::string& target,
                        const std::vector<std::string>& covariates, Task task);

// Convenience: infer_schema + load_csv driven by a spec file.
EncodedDataset load_csv(const std::filesystem::path& csv,
                        const DatasetSpec& spec);

// Writes the dataset back out as a CSV with the given column names
// (feature columns, then covariates, then target).
void write_dataset_csv(const std::filesystem::path& csv,
                       const EncodedDataset& data,
                       const std::vector<std::string>& covariate_names,
                       const std::string& target_name);

namespace detail {
// RFC-4180-ish parse of a whole CSV document: handles quoted fields with
// embedded commas, escaped quotes and newlines. UTF-8 passes through
// untouched. Exposed for tests.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
} // namespace detail

} // namespace gce
