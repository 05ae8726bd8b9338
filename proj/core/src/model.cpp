#include "gce/model.hpp"

#include "gce/error.hpp"
#include "gce/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gce {

namespace {

std::size_t head_size(const Task& task) {
  return task.kind == TaskKind::regression
             ? 1
             : static_cast<std::size_t>(task.num_classes);
}

// Resolved factor feature indices for a product spec.
std::vector<std::size_t> factor_indices(const ProductSpec& spec,
                                        const FeatureSchema& schema) {
  if (spec.factors.empty())
    throw ConfigError("product model needs at least one factor feature");
  std::vector<std::size_t> idx;
  idx.reserve(spec.factors.size());
  for (const std::string& name : spec.factors) {
    auto f = schema.feature_index(name);
    if (!f)
      throw ConfigError("product factor '" + name + "' is not in the schema");
    if (std::find(idx.begin(), idx.end(), *f) != idx.end())
      throw ConfigError("product factor '" + name + "' appears twice");
    idx.push_back(*f);
  }
  return idx;
}

std::vector<double> draw_uniform(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

// z = W x + b with W stored out-major: W[o * in + i].
void affine(std::span<const double> W, std::span<const double> b,
            std::span<const double> x, std::vector<double>& z) {
  std::size_t out = b.size(), in = x.size();
  z.assign(b.begin(), b.end());
  for (std::size_t o = 0; o < out; ++o) {
    double acc = 0.0;
    const double* w = W.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
    z[o] += acc;
  }
}

void relu(const std::vector<double>& z, std::vector<double>& a) {
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_backward(const std::vector<double>& z, std::vector<double>& dz) {
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] <= 0.0) dz[i] = 0.0;
}

// dx = W^T dz; dW += dz x^T; db += dz.
void affine_backward(std::span<const double> W, std::span<const double> x,
                     const std::vector<double>& dz, std::vector<double>& dW,
                     std::vector<double>& db, std::vector<double>* dx) {
  std::size_t out = dz.size(), in = x.size();
  for (std::size_t o = 0; o < out; ++o) {
    double d = dz[o];
    db[o] += d;
    double* g = dW.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) g[i] += d * x[i];
  }
  if (dx) {
    dx->assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double d = dz[o];
      const double* w = W.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) (*dx)[i] += w[i] * d;
    }
  }
}

std::span<const double> shared_span(const ParamStore& params,
                                    std::string_view name) {
  auto g = params.shared_id(name);
  if (!g) throw InternalError("missing shared group '" + std::string(name) + "'");
  return params.values(*g);
}

GroupId shared_group(const ParamStore& params, std::string_view name) {
  auto g = params.shared_id(name);
  if (!g) throw InternalError("missing shared group '" + std::string(name) + "'");
  return *g;
}

void check_covariates(const Row& row, std::size_t needed) {
  if (row.covariates.size() < needed)
    throw DataError("row has " + std::to_string(row.covariates.size()) +
                    " covariates, model consumes " + std::to_string(needed));
}

// ---- product model ----------------------------------------------------

struct ProductTrace {
  std::vector<GroupId> groups; // factor group per factor
  std::vector<double> factors; // their scalar values
  double covariate = 1.0;
  double prediction = 0.0;
};

ProductTrace product_forward(const ModelSpec& spec, const ParamStore& params,
                             const Row& row) {
  auto idx = factor_indices(spec.product, params.schema());
  ProductTrace t;
  t.groups.reserve(idx.size());
  t.factors.reserve(idx.size());
  double prod = 1.0;
  for (std::size_t f : idx) {
    GroupId g = params.symbol_group(f, static_cast<std::size_t>(row.symbols.at(f)));
    if (g == no_group) throw InternalError("product factor group missing");
    double v = params.values(g)[0];
    t.groups.push_back(g);
    t.factors.push_back(v);
    prod *= v;
  }
  if (spec.product.covariate) {
    check_covariates(row, *spec.product.covariate + 1);
    t.covariate = row.covariates[*spec.product.covariate];
  }
  t.prediction = prod * t.covariate;
  if (spec.product.intercept) t.prediction += shared_span(params, "b")[0];
  return t;
}

// ---- nets ---------------------------------------------------------------

// Both net kinds share the first layer: one column per one-hot position,
// plus optional covariate columns (stored as one length-h column per
// covariate, concatenated) and a bias.
void first_layer_forward(const ParamStore& params, const Row& row,
                         std::size_t covariates, std::string_view cov_name,
                         std::string_view bias_name, std::vector<double>& z) {
  std::span<const double> b = shared_span(params, bias_name);
  z.assign(b.begin(), b.end());
  for (std::size_t f = 0; f < row.symbols.size(); ++f) {
    GroupId g = params.symbol_group(f, static_cast<std::size_t>(row.symbols[f]));
    if (g == no_group) throw InternalError("first-layer column missing");
    std::span<const double> col = params.values(g);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += col[i];
  }
  if (covariates > 0) {
    check_covariates(row, covariates);
    std::span<const double> W = shared_span(params, cov_name);
    for (std::size_t j = 0; j < covariates; ++j) {
      double c = row.covariates[j];
      const double* col = W.data() + j * z.size();
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += col[i] * c;
    }
  }
}

void first_layer_backward(const ParamStore& params, const Row& row,
                          std::size_t covariates, std::string_view cov_name,
                          std::string_view bias_name,
                          const std::vector<double>& dz, GradMap& grads) {
  for (std::size_t f = 0; f < row.symbols.size(); ++f) {
    GroupId g = params.symbol_group(f, static_cast<std::size_t>(row.symbols[f]));
    std::vector<double>& gcol = grads.add(g, dz.size());
    for (std::size_t i = 0; i < dz.size(); ++i) gcol[i] += dz[i];
  }
  if (covariates > 0) {
    GroupId wg = shared_group(params, cov_name);
    std::vector<double>& gW = grads.add(wg, params.group_size(wg));
    for (std::size_t j = 0; j < covariates; ++j) {
      double c = row.covariates[j];
      double* col = gW.data() + j * dz.size();
      for (std::size_t i = 0; i < dz.size(); ++i) col[i] += dz[i] * c;
    }
  }
  GroupId bg = shared_group(params, bias_name);
  std::vector<double>& gb = grads.add(bg, dz.size());
  for (std::size_t i = 0; i < dz.size(); ++i) gb[i] += dz[i];
}

struct MlpTrace {
  std::vector<double> z1;                 // first pre-activation
  std::vector<std::vector<double>> zs;    // later pre-activations
  std::vector<std::vector<double>> as;    // activations fed to each layer
  std::vector<double> out;
};

MlpTrace mlp_forward(const ModelSpec& spec, const ParamStore& params,
                     const Row& row) {
  const MlpSpec& m = spec.mlp;
  if (m.hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
  MlpTrace t;
  first_layer_forward(params, row, m.covariates, "W1_cov", "b1", t.z1);

  std::vector<double> a;
  relu(t.z1, a);
  t.as.push_back(a);
  for (std::size_t l = 1; l < m.hidden.size(); ++l) {
    std::string idx = std::to_string(l + 1);
    std::vector<double> z;
    affine(shared_span(params, "W" + idx), shared_span(params, "b" + idx),
           t.as.back(), z);
    t.zs.push_back(z);
    relu(z, a);
    t.as.push_back(a);
  }
  affine(shared_span(params, "head_W"), shared_span(params, "head_b"),
         t.as.back(), t.out);
  return t;
}

void mlp_backward(const ModelSpec& spec, const ParamStore& params,
                  const Row& row, const MlpTrace& t,
                  const std::vector<double>& dout, GradMap& grads) {
  const MlpSpec& m = spec.mlp;
  GroupId hw = shared_group(params, "head_W");
  GroupId hb = shared_group(params, "head_b");
  std::vector<double> da;
  affine_backward(params.values(hw), t.as.back(), dout,
                  grads.add(hw, params.group_size(hw)),
                  grads.add(hb, params.group_size(hb)), &da);

  for (std::size_t l = m.hidden.size(); l-- > 1;) {
    const std::vector<double>& z = t.zs[l - 1];
    std::vector<double> dz = da;
    relu_backward(z, dz);
    std::string idx = std::to_string(l + 1);
    GroupId wg = shared_group(params, "W" + idx);
    GroupId bg = shared_group(params, "b" + idx);
    affine_backward(params.values(wg), t.as[l - 1], dz,
                    grads.add(wg, params.group_size(wg)),
                    grads.add(bg, params.group_size(bg)), &da);
  }

  std::vector<double> dz1 = da;
  relu_backward(t.z1, dz1);
  first_layer_backward(params, row, m.covariates, "W1_cov", "b1", dz1, grads);
}

struct ResNetTrace {
  std::vector<double> h0;                    // projection output
  std::vector<std::vector<double>> u, a, h;  // per block: pre-act, act, output
  std::vector<double> r;                     // relu(h back)
  std::vector<double> out;
};

ResNetTrace resnet_forward(const ModelSpec& spec, const ParamStore& params,
                           const Row& row) {
  const ResNetSpec& m = spec.resnet;
  if (m.width == 0 || m.blocks == 0)
    throw ConfigError("resnet needs positive width and block count");
  ResNetTrace t;
  first_layer_forward(params, row, m.covariates, "proj_cov", "proj_b", t.h0);

  const std::vector<double>* h = &t.h0;
  for (std::size_t bidx = 1; bidx <= m.blocks; ++bidx) {
    std::string tag = "block" + std::to_string(bidx);
    std::vector<double> u;
    affine(shared_span(params, tag + "_W1"), shared_span(params, tag + "_b1"),
           *h, u);
    std::vector<double> a;
    relu(u, a);
    std::vector<double> o;
    affine(shared_span(params, tag + "_W2"), shared_span(params, tag + "_b2"),
           a, o);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += (*h)[i];
    t.u.push_back(std::move(u));
    t.a.push_back(std::move(a));
    t.h.push_back(std::move(o));
    h = &t.h.back();
  }
  relu(*h, t.r);
  affine(shared_span(params, "head_W"), shared_span(params, "head_b"), t.r,
         t.out);
  return t;
}

void resnet_backward(const ModelSpec& spec, const ParamStore& params,
                     const Row& row, const ResNetTrace& t,
                     const std::vector<double>& dout, GradMap& grads) {
  const ResNetSpec& m = spec.resnet;
  GroupId hw = shared_group(params, "head_W");
  GroupId hb = shared_group(params, "head_b");
  std::vector<double> dh;
  affine_backward(params.values(hw), t.r, dout,
                  grads.add(hw, params.group_size(hw)),
                  grads.add(hb, params.group_size(hb)), &dh);
  relu_backward(t.h.back(), dh);

  for (std::size_t bidx = m.blocks; bidx-- > 0;) {
    const std::vector<double>& input = bidx == 0 ? t.h0 : t.h[bidx - 1];
    std::string tag = "block" + std::to_string(bidx + 1);
    GroupId w2 = shared_group(params, tag + "_W2");
    GroupId b2 = shared_group(params, tag + "_b2");
    GroupId w1 = shared_group(params, tag + "_W1");
    GroupId b1 = shared_group(params, tag + "_b1");

    std::vector<double> da;
    affine_backward(params.values(w2), t.a[bidx], dh,
                    grads.add(w2, params.group_size(w2)),
                    grads.add(b2, params.group_size(b2)), &da);
    relu_backward(t.u[bidx], da);
    std::vector<double> dinput;
    affine_backward(params.values(w1), input, da,
                    grads.add(w1, params.group_size(w1)),
                    grads.add(b1, params.group_size(b1)), &dinput);
    // skip connection: the incoming gradient reaches the block input both
    // directly and through the block body
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dinput[i];
  }
  first_layer_backward(params, row, m.covariates, "proj_cov", "proj_b", dh,
                       grads);
}

std::vector<double> loss_grad_prediction(const std::vector<double>& pred,
                                         double target, const Task& task) {
  if (task.kind == TaskKind::regression) {
    if (pred.size() != 1) throw InternalError("regression prediction size");
    return {2.0 * (pred[0] - target)};
  }
  // softmax cross-entropy
  double hi = *std::max_element(pred.begin(), pred.end());
  double sum = 0.0;
  std::vector<double> g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    g[i] = std::exp(pred[i] - hi);
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  auto cls = static_cast<std::size_t>(target);
  g[cls] -= 1.0;
  return g;
}

} // namespace

ParamStore init_params(const ModelSpec& spec, const FeatureSchema& schema,
                       std::uint64_t seed) {
  ParamStore params(schema);
  Rng rng(seed);

  if (spec.kind == ModelSpec::Kind::product) {
    if (spec.task.kind != TaskKind::regression)
      throw ConfigError("product model supports regression only");
    for (std::size_t f : factor_indices(spec.product, schema)) {
      for (std::size_t s = 0; s < schema.feature(f).alphabet.size(); ++s)
        params.add_symbol(f, s, {1.0});
    }
    if (spec.product.intercept) params.add_shared("b", {0.0});
    return params;
  }

  if (spec.task.kind == TaskKind::classification && spec.task.num_classes < 2)
    throw ConfigError("classification needs at least 2 classes");

  std::size_t ncov =
      spec.kind == ModelSpec::Kind::mlp ? spec.mlp.covariates : spec.resnet.covariates;
  std::size_t width = spec.kind == ModelSpec::Kind::mlp
                          ? (spec.mlp.hidden.empty() ? 0 : spec.mlp.hidden[0])
                          : spec.resnet.width;
  if (width == 0) throw ConfigError("net needs a positive first-layer width");

  // First layer: fan-in counts the full one-hot width plus covariates.
  double s1 = 1.0 / std::sqrt(static_cast<double>(schema.total_symbols() + ncov));
  for (std::size_t f = 0; f < schema.feature_count(); ++f)
    for (std::size_t s = 0; s < schema.feature(f).alphabet.size(); ++s)
      params.add_symbol(f, s, draw_uniform(rng, width, s1));

  auto add_matrix = [&](const std::string& name, std::size_t out,
                        std::size_t in) {
    params.add_shared(name, draw_uniform(rng, out * in,
                                         1.0 / std::sqrt(static_cast<double>(in))));
  };
  auto add_bias = [&](const std::string& name, std::size_t n) {
    params.add_shared(name, std::vector<double>(n, 0.0));
  };

  if (spec.kind == ModelSpec::Kind::mlp) {
    if (spec.mlp.hidden.empty())
      throw ConfigError("mlp needs at least one hidden layer");
    for (std::size_t h : spec.mlp.hidden)
      if (h == 0) throw ConfigError("mlp hidden sizes must be positive");
    if (ncov > 0)
      params.add_shared("W1_cov", draw_uniform(rng, width * ncov, s1));
    add_bias("b1", width);
    for (std::size_t l = 1; l < spec.mlp.hidden.size(); ++l) {
      std::string idx = std::to_string(l + 1);
      add_matrix("W" + idx, spec.mlp.hidden[l], spec.mlp.hidden[l - 1]);
      add_bias("b" + idx, spec.mlp.hidden[l]);
    }
    add_matrix("head_W", head_size(spec.task), spec.mlp.hidden.back());
    add_bias("head_b", head_size(spec.task));
    return params;
  }

  if (spec.resnet.blocks == 0)
    throw ConfigError("resnet needs at least one block");
  if (ncov > 0)
    params.add_shared("proj_cov", draw_uniform(rng, width * ncov, s1));
  add_bias("proj_b", width);
  for (std::size_t b = 1; b <= spec.resnet.blocks; ++b) {
    std::string tag = "block" + std::to_string(b);
    add_matrix(tag + "_W1", width, width);
    add_bias(tag + "_b1", width);
    add_matrix(tag + "_W2", width, width);
    add_bias(tag + "_b2", width);
  }
  add_matrix("head_W", head_size(spec.task), width);
  add_bias("head_b", head_size(spec.task));
  return params;
}

std::vector<double> forward(const ModelSpec& spec, const ParamStore& params,
                            const Row& row) {
  switch (spec.kind) {
    case ModelSpec::Kind::product:
      return {product_forward(spec, params, row).prediction};
    case ModelSpec::Kind::mlp:
      return mlp_forward(spec, params, row).out;
    case ModelSpec::Kind::resnet:
      return resnet_forward(spec, params, row).out;
  }
  throw InternalError("unknown model kind");
}

double loss_value(const std::vector<double>& prediction, double target,
                  const Task& task) {
  if (task.kind == TaskKind::regression) {
    if (prediction.size() != 1)
      throw InternalError("regression prediction must be scalar");
    double d = prediction[0] - target;
    return d * d;
  }
  if (prediction.size() != static_cast<std::size_t>(task.num_classes))
    throw InternalError("logits size does not match class count");
  double ip;
  if (std::modf(target, &ip) != 0.0 || target < 0.0 ||
      target >= static_cast<double>(task.num_classes))
    throw DataError("class index must be an integer in [0, classes)");
  double hi = *std::max_element(prediction.begin(), prediction.end());
  double sum = 0.0;
  for (double l : prediction) sum += std::exp(l - hi);
  return hi + std::log(sum) - prediction[static_cast<std::size_t>(target)];
}

GradMap backward(const ModelSpec& spec, const ParamStore& params,
                 const Row& row, double target) {
  GradMap grads;
  if (spec.kind == ModelSpec::Kind::product) {
    ProductTrace t = product_forward(spec, params, row);
    double dpred = 2.0 * (t.prediction - target);
    for (std::size_t i = 0; i < t.groups.size(); ++i) {
      double others = 1.0;
      for (std::size_t j = 0; j < t.factors.size(); ++j)
        if (j != i) others *= t.factors[j];
      grads.add(t.groups[i], 1)[0] += dpred * others * t.covariate;
    }
    if (spec.product.intercept) {
      GroupId b = shared_group(params, "b");
      grads.add(b, 1)[0] += dpred;
    }
    return grads;
  }

  if (spec.task.kind == TaskKind::classification) {
    double ip;
    if (std::modf(target, &ip) != 0.0 || target < 0.0 ||
        target >= static_cast<double>(spec.task.num_classes))
      throw DataError("class index must be an integer in [0, classes)");
  }

  if (spec.kind == ModelSpec::Kind::mlp) {
    MlpTrace t = mlp_forward(spec, params, row);
    auto dout = loss_grad_prediction(t.out, target, spec.task);
    mlp_backward(spec, params, row, t, dout, grads);
    return grads;
  }
  ResNetTrace t = resnet_forward(spec, params, row);
  auto dout = loss_grad_prediction(t.out, target, spec.task);
  resnet_backward(spec, params, row, t, dout, grads);
  return grads;
}

} // namespace gce
