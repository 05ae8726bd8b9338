#pragma once

#include "gce/dataset.hpp"
#include "gce/params.hpp"
#include "gce/schema.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gce {

// Multiplicative scalar-per-symbol model:
//   prediction = (prod over factor features of theta[feature, symbol])
//                * covariate (optional) + intercept (optional)
// Regression only.
struct ProductSpec {
  std::vector<std::string> factors;     // feature names, one scalar per symbol
  std::optional<std::size_t> covariate; // index into Row::covariates
  bool intercept = false;
};

// Dense ReLU stack on the one-hot(+covariates) input with a linear head.
// The first-layer weight matrix is stored as one column per input position:
// columns of one-hot positions are per-symbol parameter groups, covariate
// columns and everything downstream are shared groups.
struct MlpSpec {
  std::vector<std::size_t> hidden = {4, 8, 4};
  std::size_t covariates = 0; // how many covariate inputs to consume
};

// Linear projection to `width`, then `blocks` residual blocks
// (linear, ReLU, linear, add skip), final ReLU, linear head. First-layer
// columns are per-symbol exactly as in MlpSpec.
struct ResNetSpec {
  std::size_t width = 8;
  std::size_t blocks = 2;
  std::size_t covariates = 0;
};

struct ModelSpec {
  enum class Kind { product, mlp, resnet };

  Kind kind = Kind::product;
  Task task = Task::regression();
  ProductSpec product;
  MlpSpec mlp;
  ResNetSpec resnet;

  static ModelSpec make_product(ProductSpec p) {
    ModelSpec s;
    s.kind = Kind::product;
    s.product = std::move(p);
    return s;
  }
  static ModelSpec make_mlp(MlpSpec p, Task task = Task::regression()) {
    ModelSpec s;
    s.kind = Kind::mlp;
    s.task = task;
    s.mlp = std::move(p);
    return s;
  }
  static ModelSpec make_resnet(ResNetSpec p, Task task = Task::regression()) {
    ModelSpec s;
    s.kind = Kind::resnet;
    s.task = task;
    s.resnet = std::move(p);
    return s;
  }
};

// Registers every parameter group of the model and fills in initial values:
// product scalars 1, intercept 0, net weights uniform(-1/sqrt(fan_in),
// +1/sqrt(fan_in)), net biases 0. Same (spec, schema, seed) gives identical
// stores.
ParamStore init_params(const ModelSpec& spec, const FeatureSchema& schema,
                       std::uint64_t seed);

// Scalar prediction for regression (size 1), logits for classification.
std::vector<double> forward(const ModelSpec& spec, const ParamStore& params,
                            const Row& row);

// Per-observation loss: squared error for regression, softmax cross-entropy
// for classification.
double loss_value(const std::vector<double>& prediction, double target,
                  const Task& task);

// Gradient of loss_value(forward(row), target) in the row's groups. The map
// holds exactly the shared groups plus the groups of the row's own symbols;
// any other per-symbol group is untouched by this row and does not appear.
GradMap backward(const ModelSpec& spec, const ParamStore& params,
                 const Row& row, double target);

} // namespace gce
