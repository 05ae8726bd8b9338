#include "gce/csv.hpp"

#include "gce/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace gce {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return std::move(out).str();
}

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    std::string item = trim(std::string_view(s).substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  std::string t = trim(s);
  double value = 0.0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size())
    throw DataError("cannot parse " + what + " value '" + s + "' as a number");
  return value;
}

// Column indices of requested header names; missing name is a schema error.
std::vector<std::size_t> header_indices(const std::vector<std::string>& header,
                                        const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const std::string& name : names) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SchemaError("column '" + name + "' not found in CSV header");
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  return idx;
}

void check_row_width(const std::vector<std::string>& record,
                     std::size_t width, std::size_t line_no) {
  if (record.size() != width)
    throw DataError("CSV record " + std::to_string(line_no) + " has " +
                    std::to_string(record.size()) + " fields, header has " +
                    std::to_string(width));
}

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\n\r") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

} // namespace

namespace detail {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false; // current record has content

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty() || !record.empty()) end_record();
        break;
      default:
        field += c;
        any = true;
        break;
    }
  }
  if (quoted) throw DataError("CSV ends inside a quoted field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

} // namespace detail

DatasetSpec read_dataset_spec(const std::filesystem::path& file) {
  std::string text = read_file(file);
  DatasetSpec spec;
  bool saw_task = false;
  int classes = 0;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError(file.string() + ":" + std::to_string(line_no) +
                      ": expected 'key = value'");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key == "features") {
      spec.features = split_list(value);
    } else if (key == "target") {
      spec.target = value;
    } else if (key == "covariates") {
      spec.covariates = split_list(value);
    } else if (key == "task") {
      saw_task = true;
      if (value == "regression") {
        spec.task = Task::regression();
      } else if (value == "classification") {
        spec.task.kind = TaskKind::classification;
      } else {
        throw DataError(file.string() + ": unknown task '" + value + "'");
      }
    } else if (key == "classes") {
      classes = static_cast<int>(parse_number(value, "classes"));
    } else {
      throw DataError(file.string() + ": unknown key '" + key + "'");
    }
  }
  if (spec.features.empty())
    throw DataError(file.string() + ": missing 'features'");
  if (spec.target.empty()) throw DataError(file.string() + ": missing 'target'");
  if (!saw_task) spec.task = Task::regression();
  if (spec.task.kind == TaskKind::classification) spec.task.num_classes = classes;
  return spec;
}

void write_dataset_spec(const std::filesystem::path& file,
                        const DatasetSpec& spec) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out << "features = ";
  for (std::size_t i = 0; i < spec.features.size(); ++i)
    out << (i ? ", " : "") << spec.features[i];
  out << "\ntarget = " << spec.target << "\ncovariates = ";
  for (std::size_t i = 0; i < spec.covariates.size(); ++i)
    out << (i ? ", " : "") << spec.covariates[i];
  out << "\ntask = "
      << (spec.task.kind == TaskKind::regression ? "regression"
                                                 : "classification")
      << "\n";
  if (spec.task.kind == TaskKind::classification)
    out << "classes = " << spec.task.num_classes << "\n";
}

FeatureSchema infer_schema(const std::filesystem::path& csv,
                           const std::vector<std::string>& feature_columns) {
  if (feature_columns.empty())
    throw ConfigError("infer_schema: no feature columns given");
  auto records = detail::parse_csv(read_file(csv));
  if (records.empty()) throw DataError("'" + csv.string() + "' is empty");
  if (records.size() < 2)
    throw DataError("'" + csv.string() + "' has a header but no rows");

  auto cols = header_indices(records[0], feature_columns);
  std::vector<std::set<std::string>> values(cols.size());
  for (std::size_t r = 1; r < records.size(); ++r) {
    check_row_width(records[r], records[0].size(), r + 1);
    for (std::size_t f = 0; f < cols.size(); ++f)
      values[f].insert(records[r][cols[f]]);
  }

  std::vector<Feature> features;
  features.reserve(cols.size());
  for (std::size_t f = 0; f < cols.size(); ++f)
    features.push_back({feature_columns[f],
                        {values[f].begin(), values[f].end()}});
  return FeatureSchema(std::move(features));
}

EncodedDataset load_csv(const std::filesystem::path& csv,
                        const FeatureSchema& schema, const std::string& target,
                        const std::vector<std::string>& covariates, Task task) {
  auto records = detail::parse_csv(read_file(csv));
  if (records.empty()) throw DataError("'" + csv.string() + "' is empty");

  std::vector<std::string> feature_names;
  feature_names.reserve(schema.feature_count());
  for (const Feature& f : schema.features()) feature_names.push_back(f.name);
  auto feat_cols = header_indices(records[0], feature_names);
  auto cov_cols = header_indices(records[0], covariates);
  auto target_col = header_indices(records[0], {target}).front();

  std::vector<Row> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    check_row_width(records[r], records[0].size(), r + 1);
    Row row;
    row.symbols.reserve(feat_cols.size());
    for (std::size_t f = 0; f < feat_cols.size(); ++f) {
      const std::string& value = records[r][feat_cols[f]];
      auto s = schema.symbol_index(f, value);
      if (!s)
        throw DataError("record " + std::to_string(r + 1) + ": symbol '" +
                        value + "' is not in the alphabet of feature '" +
                        schema.feature(f).name + "'");
      row.symbols.push_back(static_cast<int>(*s));
    }
    row.covariates.reserve(cov_cols.size());
    for (std::size_t c : cov_cols)
      row.covariates.push_back(parse_number(records[r][c], "covariate"));
    row.target = parse_number(records[r][target_col], "target");
    rows.push_back(std::move(row));
  }

  if (task.kind == TaskKind::classification && task.num_classes == 0) {
    // Infer class count when the spec file omitted it.
    double hi = 0.0;
    for (const Row& row : rows) hi = std::max(hi, row.target);
    task.num_classes = static_cast<int>(hi) + 1;
  }
  return EncodedDataset(schema, std::move(rows), task);
}

EncodedDataset load_csv(const std::filesystem::path& csv,
                        const DatasetSpec& spec) {
  FeatureSchema schema = infer_schema(csv, spec.features);
  return load_csv(csv, schema, spec.target, spec.covariates, spec.task);
}

void write_dataset_csv(const std::filesystem::path& csv,
                       const EncodedDataset& data,
                       const std::vector<std::string>& covariate_names,
                       const std::string& target_name) {
  if (covariate_names.size() != data.covariate_count())
    throw ConfigError("write_dataset_csv: covariate name count mismatch");
  std::ofstream out(csv, std::ios::binary);
  if (!out) throw DataError("cannot write '" + csv.string() + "'");
  out.precision(17);

  for (std::size_t f = 0; f < data.schema().feature_count(); ++f) {
    if (f) out << ',';
    write_field(out, data.schema().feature(f).name);
  }
  for (const std::string& name : covariate_names) {
    out << ',';
    write_field(out, name);
  }
  out << ',';
  write_field(out, target_name);
  out << '\n';

  for (const Row& row : data.rows()) {
    for (std::size_t f = 0; f < row.symbols.size(); ++f) {
      if (f) out << ',';
      write_field(out, data.schema().feature(f).alphabet[static_cast<std::size_t>(
                           row.symbols[f])]);
    }
    for (double c : row.covariates) out << ',' << c;
    out << ',' << row.target << '\n';
  }
}

} // namespace gce
