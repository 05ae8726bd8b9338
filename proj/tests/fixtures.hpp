#pragma once

#include <gce/dataset.hpp>
#include <gce/model.hpp>
#include <gce/params.hpp>
#include <gce/schema.hpp>

#include <utility>
#include <vector>

namespace fx {

// Five rows, two features, product model with hand-set scalars. All derived
// quantities below were worked out by hand and are frozen in the tests.
//
//   row   Color  City    target   prediction   squared error
//    0    blue   Paris     14      2*3 =  6        64
//    1    pink   Rome      12      1*4 =  4        64
//    2    pink   Rome      13      1*4 =  4        81
//    3    blue   Berlin    17      2*5 = 10        49
//    4    pink   Paris      8      1*3 =  3        25
//
// Groups by flat index: blue {0,3}, pink {1,2,4}, Paris {0,4}, Rome {1,2},
// Berlin {3}.
struct Worked {
  gce::EncodedDataset data;
  gce::ModelSpec spec;
  gce::ParamStore params;
};

inline Worked worked() {
  gce::FeatureSchema schema({{"Color", {"blue", "pink"}},
                             {"City", {"Paris", "Rome", "Berlin"}}});
  std::vector<gce::Row> rows = {
      {{0, 0}, {}, 14.0}, {{1, 1}, {}, 12.0}, {{1, 1}, {}, 13.0},
      {{0, 2}, {}, 17.0}, {{1, 0}, {}, 8.0},
  };
  gce::EncodedDataset data(schema, std::move(rows), gce::Task::regression());

  gce::ModelSpec spec =
      gce::ModelSpec::make_product({{"Color", "City"}, {}, false});
  gce::ParamStore params = gce::init_params(spec, data.schema(), 0);
  auto set = [&](std::size_t f, std::size_t s, double v) {
    params.values(params.symbol_group(f, s))[0] = v;
  };
  set(0, 0, 2.0);
  set(0, 1, 1.0);
  set(1, 0, 3.0);
  set(1, 1, 4.0);
  set(1, 2, 5.0);
  return {std::move(data), std::move(spec), std::move(params)};
}

// One feature, q symbols, each symbol exactly `per` times: every group has
// the same size, so count scaling and size scaling differ by the factor q.
inline Worked balanced(std::size_t q, std::size_t per) {
  std::vector<std::string> alphabet;
  for (std::size_t s = 0; s < q; ++s)
    alphabet.push_back("s" + std::to_string(s));
  gce::FeatureSchema schema({{"F", alphabet}});

  std::vector<gce::Row> rows;
  for (std::size_t s = 0; s < q; ++s)
    for (std::size_t k = 0; k < per; ++k)
      rows.push_back({{static_cast<int>(s)},
                      {},
                      static_cast<double>(3 + 2 * s + (k % 2))});
  gce::EncodedDataset data(schema, std::move(rows), gce::Task::regression());

  gce::ModelSpec spec = gce::ModelSpec::make_product({{"F"}, {}, false});
  gce::ParamStore params = gce::init_params(spec, data.schema(), 0);
  return {std::move(data), std::move(spec), std::move(params)};
}

} // namespace fx
