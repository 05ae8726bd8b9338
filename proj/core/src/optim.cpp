#include "gce/optim.hpp"

#include "gce/error.hpp"

#include <cmath>
#include <string>

namespace gce {

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adagrad") return OptimizerKind::adagrad;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) +
                    "' (expected sgd, adagrad or adam)");
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::adagrad: return "adagrad";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

OptimizerHyper default_hyper(OptimizerKind kind) {
  OptimizerHyper h;
  switch (kind) {
    case OptimizerKind::sgd:
      h.lr = 1e-2;
      break;
    case OptimizerKind::adagrad:
      h.lr = 1e-2;
      h.eps = 1e-10;
      break;
    case OptimizerKind::adam:
      h.lr = 1e-3;
      h.eps = 1e-8;
      break;
  }
  return h;
}

Optimizer::Optimizer(OptimizerKind kind, OptimizerHyper hyper,
                     const ParamStore& params)
    : kind_(kind), hyper_(hyper) {
  OptimizerHyper defaults = default_hyper(kind);
  if (hyper_.lr == 0.0) hyper_.lr = defaults.lr;
  if (hyper_.eps == 0.0) hyper_.eps = defaults.eps;
  if (!(hyper_.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (kind == OptimizerKind::adam &&
      !(hyper_.beta1 >= 0.0 && hyper_.beta1 < 1.0 && hyper_.beta2 >= 0.0 &&
        hyper_.beta2 < 1.0))
    throw ConfigError("adam betas must lie in [0, 1)");

  std::size_t n = params.group_count();
  if (kind == OptimizerKind::adagrad) {
    accum_.resize(n);
    for (GroupId g = 0; g < n; ++g) accum_[g].assign(params.group_size(g), 0.0);
  } else if (kind == OptimizerKind::adam) {
    m_.resize(n);
    v_.resize(n);
    step_.assign(n, 0);
    for (GroupId g = 0; g < n; ++g) {
      m_[g].assign(params.group_size(g), 0.0);
      v_[g].assign(params.group_size(g), 0.0);
    }
  }
}

void Optimizer::apply_update(ParamStore& params, const ScaledGradient& grad) {
  if (grad.grads.size() != params.group_count())
    throw InternalError("gradient does not match parameter layout");

  for (GroupId g = 0; g < grad.grads.size(); ++g) {
    if (!grad.masked(g)) continue;
    const std::vector<double>& gr = grad.grads[g];
    std::span<double> theta = params.values(g);
    if (gr.size() != theta.size())
      throw InternalError("masked group without a full gradient vector");

    switch (kind_) {
      case OptimizerKind::sgd:
        for (std::size_t i = 0; i < theta.size(); ++i)
          theta[i] -= hyper_.lr * gr[i];
        break;
      case OptimizerKind::adagrad: {
        std::vector<double>& acc = accum_[g];
        for (std::size_t i = 0; i < theta.size(); ++i) {
          acc[i] += gr[i] * gr[i];
          theta[i] -= hyper_.lr * gr[i] / (std::sqrt(acc[i]) + hyper_.eps);
        }
        break;
      }
      case OptimizerKind::adam: {
        std::vector<double>& m = m_[g];
        std::vector<double>& v = v_[g];
        // The step counter is per group: it advances only when the group is
        // masked in, so bias correction matches the updates the group has
        // actually received.
        double t = static_cast<double>(++step_[g]);
        double c1 = 1.0 - std::pow(hyper_.beta1, t);
        double c2 = 1.0 - std::pow(hyper_.beta2, t);
        for (std::size_t i = 0; i < theta.size(); ++i) {
          m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * gr[i];
          v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * gr[i] * gr[i];
          double mhat = m[i] / c1;
          double vhat = v[i] / c2;
          theta[i] -= hyper_.lr * mhat / (std::sqrt(vhat) + hyper_.eps);
        }
        break;
      }
    }
  }
}

std::span<const double> Optimizer::adagrad_accum(GroupId g) const {
  if (kind_ != OptimizerKind::adagrad)
    throw InternalError("adagrad state on a non-adagrad optimizer");
  return accum_.at(g);
}

std::span<const double> Optimizer::adam_m(GroupId g) const {
  if (kind_ != OptimizerKind::adam)
    throw InternalError("adam state on a non-adam optimizer");
  return m_.at(g);
}

std::span<const double> Optimizer::adam_v(GroupId g) const {
  if (kind_ != OptimizerKind::adam)
    throw InternalError("adam state on a non-adam optimizer");
  return v_.at(g);
}

std::uint64_t Optimizer::adam_step(GroupId g) const {
  if (kind_ != OptimizerKind::adam)
    throw InternalError("adam state on a non-adam optimizer");
  return step_.at(g);
}

} // namespace gce
