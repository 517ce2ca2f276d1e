#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "negograph/autodiff.hpp"

namespace negograph::nd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled weight decay (applied to the parameter, not the gradient).
  double weight_decay = 1e-3;
};

/// Bias-corrected Adam with decoupled L2. Moments are held per parameter in
/// store iteration order.
class Adam {
 public:
  Adam() = default;
  Adam(const ParameterStore& store, AdamConfig config);

  void step(ParameterStore& store);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_step_count(std::uint64_t s) { step_ = s; }

 private:
  AdamConfig config_{};
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t step_ = 0;
};

/// Scalar objective built on a fresh tape from the current parameter values.
using Objective = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients against central differences over every
/// scalar of every parameter in `store` (or at most `max_per_param` of them,
/// evenly strided). Error is |analytic - numeric| / max(1e-8, |numeric|).
/// A positive `abs_floor` treats pairs whose magnitudes are both below it as
/// exact agreement; the default of 0 keeps the plain formula.
GradCheckResult grad_check(const Objective& f, ParameterStore& store, double step = 1e-5,
                           std::size_t max_per_param = 0, double abs_floor = 0.0);

}  // namespace negograph::nd
