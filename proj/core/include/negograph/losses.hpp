#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "negograph/autodiff.hpp"

namespace negograph {

inline constexpr double kProbClamp = 1e-12;

struct LossWeights {
  double alpha = 1.0;
  double beta = 10.0;
  double gamma = 10.0;
};

/// -sum_{j: y=1} delta_j log p_j - sum_{k: y=0} log(1 - p_k), with p clamped
/// to [1e-12, 1 - 1e-12]. `probs` is 1 x L.
nd::Var loss_strategy(nd::Var probs, std::span<const double> target,
                      std::span<const double> delta);
double loss_strategy(std::span<const double> probs, std::span<const double> target,
                     std::span<const double> delta);

/// -rho_target * log softmax(logits)[target]. `logits` is 1 x C.
nd::Var loss_dialogue_act(nd::Var logits, std::size_t target, std::span<const double> rho);
double loss_dialogue_act(std::span<const double> logits, std::size_t target,
                         std::span<const double> rho);

/// One-hot cross entropy over the 5 outcome classes; `target_class` in 1..5.
nd::Var loss_outcome(nd::Var logits, int target_class);
double loss_outcome(std::span<const double> logits, int target_class);

/// Sum of per-token negative log likelihoods.
double loss_generation(std::span<const double> target_token_probs);

struct LossParts {
  double nlg = 0.0;
  double strategy = 0.0;
  double act = 0.0;
  double outcome = 0.0;
};

/// L_NLG + alpha L_ST + beta L_DA + gamma L_R
double loss_joint(const LossParts& parts, const LossWeights& w);
nd::Var loss_joint(nd::Var nlg, nd::Var strategy, nd::Var act, nd::Var outcome,
                   const LossWeights& w);

}  // namespace negograph
