#include "negograph/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace negograph {

using nd::Tensor;
using nd::Var;

namespace {

void check_sizes(std::size_t a, std::size_t b, std::size_t c, const char* op) {
  if (a != b || a != c) {
    throw nd::ShapeError(std::string(op) + ": size mismatch (" + std::to_string(a) + ", " +
                         std::to_string(b) + ", " + std::to_string(c) + ")");
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

Var loss_strategy(Var probs, std::span<const double> target, std::span<const double> delta) {
  const std::size_t n = probs.cols();
  check_sizes(n, target.size(), delta.size(), "loss_strategy");
  if (probs.rows() != 1) throw nd::ShapeError("loss_strategy: probs must be a row vector");
  nd::Tape& tape = *probs.tape;
  Tensor pos_w(1, n), neg_w(1, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (target[j] > 0.5) {
      pos_w(0, j) = -delta[j];
    } else {
      neg_w(0, j) = -1.0;
    }
  }
  const Var p = nd::clamp(probs, kProbClamp, 1.0 - kProbClamp);
  const Var log_p = nd::log(p);
  const Var log_q = nd::log(nd::add_scalar(nd::scale(p, -1.0), 1.0));
  return nd::add(nd::sum_all(nd::mul(log_p, tape.constant(std::move(pos_w)))),
                 nd::sum_all(nd::mul(log_q, tape.constant(std::move(neg_w)))));
}

double loss_strategy(std::span<const double> probs, std::span<const double> target,
                     std::span<const double> delta) {
  check_sizes(probs.size(), target.size(), delta.size(), "loss_strategy");
  double loss = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = clamp_prob(probs[j]);
    loss += target[j] > 0.5 ? -delta[j] * std::log(p) : -std::log(1.0 - p);
  }
  return loss;
}

Var loss_dialogue_act(Var logits, std::size_t target, std::span<const double> rho) {
  if (logits.rows() != 1 || logits.cols() != rho.size() || target >= rho.size()) {
    throw nd::ShapeError("loss_dialogue_act: logits/weights/target mismatch");
  }
  return nd::scale(nd::pick(nd::log_softmax_rows(logits), 0, target), -rho[target]);
}

double loss_dialogue_act(std::span<const double> logits, std::size_t target,
                         std::span<const double> rho) {
  if (logits.size() != rho.size() || target >= rho.size()) {
    throw nd::ShapeError("loss_dialogue_act: logits/weights/target mismatch");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return -rho[target] * (logits[target] - m - std::log(z));
}

Var loss_outcome(Var logits, int target_class) {
  if (target_class < 1 || target_class > static_cast<int>(logits.cols())) {
    throw std::out_of_range("loss_outcome: class " + std::to_string(target_class));
  }
  return nd::scale(nd::pick(nd::log_softmax_rows(logits), 0, std::size_t(target_class - 1)), -1.0);
}

double loss_outcome(std::span<const double> logits, int target_class) {
  if (target_class < 1 || target_class > static_cast<int>(logits.size())) {
    throw std::out_of_range("loss_outcome: class " + std::to_string(target_class));
  }
  const std::vector<double> ones(logits.size(), 1.0);
  return loss_dialogue_act(logits, std::size_t(target_class - 1), ones);
}

double loss_generation(std::span<const double> target_token_probs) {
  double loss = 0.0;
  for (double p : target_token_probs) loss -= std::log(clamp_prob(p));
  return loss;
}

double loss_joint(const LossParts& parts, const LossWeights& w) {
  return parts.nlg + w.alpha * parts.strategy + w.beta * parts.act + w.gamma * parts.outcome;
}

Var loss_joint(Var nlg, Var strategy, Var act, Var outcome, const LossWeights& w) {
  return nd::add(nd::add(nlg, nd::scale(strategy, w.alpha)),
                 nd::add(nd::scale(act, w.beta), nd::scale(outcome, w.gamma)));
}

}  // namespace negograph
