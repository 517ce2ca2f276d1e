#include "negograph/optim.hpp"

#include <algorithm>
#include <cmath>

namespace negograph::nd {

Adam::Adam(const ParameterStore& store, AdamConfig config) : config_(config) {
  for (const auto& p : store) {
    m_.emplace_back(p.value.rows(), p.value.cols());
    v_.emplace_back(p.value.rows(), p.value.cols());
  }
}

void Adam::step(ParameterStore& store) {
  if (store.size() != m_.size()) throw ShapeError("adam: parameter count changed");
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  std::size_t k = 0;
  for (auto& p : store) {
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    ++k;
    if (!m.same_shape(p.value) || !p.grad.same_shape(p.value)) {
      throw ShapeError("adam: shape mismatch for " + p.name);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p.value[i] -= lr * (mhat / (std::sqrt(vhat) + config_.epsilon) + wd * p.value[i]);
    }
  }
}

GradCheckResult grad_check(const Objective& f, ParameterStore& store, double step,
                           std::size_t max_per_param, double abs_floor) {
  store.zero_grad();
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  auto eval = [&]() {
    Tape tape;
    return f(tape).scalar();
  };

  GradCheckResult result;
  for (auto& p : store) {
    const std::size_t n = p.value.size();
    const std::size_t stride = (max_per_param == 0 || n <= max_per_param) ? 1 : n / max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double fp = eval();
      p.value[i] = saved - step;
      const double fm = eval();
      p.value[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      if (!std::isfinite(numeric)) throw NumericError("grad_check: non-finite difference");
      const double analytic = p.grad[i];
      double err = 0.0;
      if (!(std::abs(analytic) < abs_floor && std::abs(numeric) < abs_floor)) {
        err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(numeric));
      }
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace negograph::nd
