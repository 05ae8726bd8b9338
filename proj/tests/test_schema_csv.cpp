#include <doctest.h>

#include <gce/csv.hpp>
#include <gce/dataset.hpp>
#include <gce/error.hpp>
#include <gce/schema.hpp>

#include <filesystem>
#include <fstream>
#include <string>

using namespace gce;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "gce_csv_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_file(const std::string& name,
                                 const std::string& text) {
  auto path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

} // namespace

TEST_CASE("schema flat indexing walks feature blocks in order") {
  FeatureSchema schema({{"Color", {"blue", "pink"}},
                        {"City", {"Paris", "Rome", "Berlin"}}});
  CHECK(schema.feature_count() == 2);
  CHECK(schema.total_symbols() == 5);
  CHECK(schema.block_offset(0) == 0);
  CHECK(schema.block_offset(1) == 2);
  CHECK(schema.flat_index(0, 1) == 1);
  CHECK(schema.flat_index(1, 0) == 2);
  CHECK(schema.flat_index(1, 2) == 4);
  CHECK(schema.unflatten(3) == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(schema.feature_index("City") == 1);
  CHECK(!schema.feature_index("Shape").has_value());
  CHECK(schema.symbol_index(1, "Rome") == 1);
  CHECK(!schema.symbol_index(0, "Rome").has_value());
}

TEST_CASE("schema rejects bad shapes") {
  using Features = std::vector<Feature>;
  CHECK_THROWS_AS(FeatureSchema(Features{{"A", {}}}), SchemaError);
  CHECK_THROWS_AS(FeatureSchema(Features{{"A", {"x"}}, {"A", {"y"}}}),
                  SchemaError);
  CHECK_THROWS_AS(FeatureSchema(Features{{"A", {"x", "x"}}}), SchemaError);
}

TEST_CASE("one-hot keeps the declared alphabet order") {
  // Explicit schema order, not lexicographic: Paris before Berlin.
  FeatureSchema schema({{"Color", {"blue", "pink"}},
                        {"City", {"Paris", "Rome", "Berlin"}}});
  Row row{{0, 0}, {}, 0.0}; // blue, Paris
  CHECK(one_hot(row, schema) ==
        std::vector<double>{1, 0, 1, 0, 0});
  Row row2{{1, 2}, {}, 0.0}; // pink, Berlin
  CHECK(one_hot(row2, schema) ==
        std::vector<double>{0, 1, 0, 0, 1});
}

TEST_CASE("dataset spec file round-trips") {
  DatasetSpec spec;
  spec.features = {"Color", "City"};
  spec.target = "Sales";
  spec.covariates = {"Distance", "Age"};
  spec.task = Task::classification(4);

  auto path = scratch_dir() / "roundtrip.spec";
  write_dataset_spec(path, spec);
  DatasetSpec back = read_dataset_spec(path);
  CHECK(back.features == spec.features);
  CHECK(back.target == spec.target);
  CHECK(back.covariates == spec.covariates);
  CHECK(back.task.kind == TaskKind::classification);
  CHECK(back.task.num_classes == 4);
}

TEST_CASE("spec reader tolerates comments and blank lines") {
  auto path = write_file("commented.spec",
                         "# a comment\n\nfeatures = Color , City\n"
                         "target = y\ntask = regression\n");
  DatasetSpec spec = read_dataset_spec(path);
  CHECK(spec.features == std::vector<std::string>{"Color", "City"});
  CHECK(spec.target == "y");
  CHECK(spec.covariates.empty());
}

TEST_CASE("spec reader rejects junk") {
  auto bad = write_file("bad.spec", "features = A\ntarget = y\nwat = 1\n");
  CHECK_THROWS_AS(read_dataset_spec(bad), DataError);
  auto missing = write_file("missing.spec", "features = A\n");
  CHECK_THROWS_AS(read_dataset_spec(missing), DataError);
}

TEST_CASE("csv parser handles quoting") {
  auto rows = detail::parse_csv("a,b\n\"x,y\",\"he said \"\"hi\"\"\"\n"
                                "\"line\nbreak\",plain\r\nlast,row\n");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"a", "b"});
  CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\""});
  CHECK(rows[2] == std::vector<std::string>{"line\nbreak", "plain"});
  CHECK(rows[3] == std::vector<std::string>{"last", "row"});
}

TEST_CASE("csv parser rejects an unterminated quote") {
  CHECK_THROWS_AS(detail::parse_csv("a,\"oops\n"), DataError);
}

TEST_CASE("schema inference sorts alphabets lexicographically") {
  auto path = write_file("infer.csv",
                         "City,y\nRome,1\nBerlin,2\nParis,3\nRome,4\n");
  FeatureSchema schema = infer_schema(path, {"City"});
  REQUIRE(schema.feature_count() == 1);
  CHECK(schema.feature(0).alphabet ==
        std::vector<std::string>{"Berlin", "Paris", "Rome"});
}

TEST_CASE("load_csv encodes against the schema and spec") {
  auto csv = write_file("sales.csv",
                        "Color,City,Distance,Sales\n"
                        "blue,Paris,1.5,14\n"
                        "pink,Rome,2.5,12\n");
  DatasetSpec spec;
  spec.features = {"Color", "City"};
  spec.target = "Sales";
  spec.covariates = {"Distance"};
  EncodedDataset data = load_csv(csv, spec);
  REQUIRE(data.size() == 2);
  CHECK(data.covariate_count() == 1);
  CHECK(data.row(0).covariates[0] == 1.5);
  CHECK(data.row(0).target == 14.0);
  // Inference is lexicographic: Paris < Rome.
  CHECK(data.schema().feature(1).alphabet ==
        std::vector<std::string>{"Paris", "Rome"});
  CHECK(data.row(1).symbols == std::vector<int>{1, 1});
}

TEST_CASE("load_csv refuses symbols outside a fixed schema") {
  auto csv = write_file("offalpha.csv", "Color,y\nblue,1\ngreen,2\n");
  FeatureSchema schema({{"Color", {"blue", "pink"}}});
  try {
    load_csv(csv, schema, "y", {}, Task::regression());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    // The message should point at the offending record.
    CHECK(std::string(e.what()).find("green") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects missing columns and bad numbers") {
  auto csv = write_file("short.csv", "Color,y\nblue,notanumber\n");
  DatasetSpec spec;
  spec.features = {"Color"};
  spec.target = "y";
  CHECK_THROWS_AS(load_csv(csv, spec), DataError);

  auto csv2 = write_file("nocol.csv", "Color,y\nblue,1\n");
  DatasetSpec spec2;
  spec2.features = {"Shape"};
  spec2.target = "y";
  CHECK_THROWS_AS(load_csv(csv2, spec2), SchemaError);
}

TEST_CASE("classification class count is inferred when absent") {
  auto csv = write_file("cls.csv", "Color,y\nblue,0\npink,2\nblue,1\n");
  DatasetSpec spec;
  spec.features = {"Color"};
  spec.target = "y";
  spec.task = Task::classification(0);
  EncodedDataset data = load_csv(csv, spec);
  CHECK(data.task().num_classes == 3);
}

TEST_CASE("dataset csv writer round-trips through the loader") {
  FeatureSchema schema({{"Color", {"blue", "pink"}}});
  std::vector<Row> rows = {{{0}, {1.25}, 3.5}, {{1}, {-2.0}, 4.5}};
  EncodedDataset data(schema, rows, Task::regression());

  auto csv = scratch_dir() / "written.csv";
  write_dataset_csv(csv, data, {"Distance"}, "y");

  DatasetSpec spec;
  spec.features = {"Color"};
  spec.target = "y";
  spec.covariates = {"Distance"};
  EncodedDataset back = load_csv(csv, spec);
  REQUIRE(back.size() == 2);
  CHECK(back.row(0).symbols == data.row(0).symbols);
  CHECK(back.row(1).covariates == data.row(1).covariates);
  CHECK(back.row(1).target == 4.5);
}
