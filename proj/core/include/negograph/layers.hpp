#pragma once

#include <string>

#include "negograph/autodiff.hpp"

namespace negograph::nd {

/// y = x W + b, parameters registered as `<name>.w` and `<name>.b`.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
         Xoshiro256& rng, bool bias = true);

  struct Bound {
    Var w;
    Var b;
    bool has_bias = false;
  };
  Bound bind(Tape& tape) const;
  Var apply(const Bound& bound, Var x) const;
  Var operator()(Tape& tape, Var x) const { return apply(bind(tape), x); }

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
  std::size_t in_ = 0, out_ = 0;
};

/// Gated recurrent unit, PyTorch gate layout:
///   r = sigmoid(x W_ir + b_ir + h W_hr + b_hr)
///   z = sigmoid(x W_iz + b_iz + h W_hz + b_hz)
///   n = tanh(x W_in + b_in + r * (h W_hn + b_hn))
///   h' = (1 - z) * n + z * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterStore& store, const std::string& name, std::size_t input_dim,
          std::size_t hidden_dim, Xoshiro256& rng);

  struct Bound {
    Var w_ir, w_iz, w_in, w_hr, w_hz, w_hn;
    Var b_ir, b_iz, b_in, b_hr, b_hz, b_hn;
  };
  Bound bind(Tape& tape) const;
  /// x: 1 x input_dim, h: 1 x hidden_dim.
  Var step(const Bound& p, Var x, Var h) const;

  std::size_t input_dim() const { return input_; }
  std::size_t hidden_dim() const { return hidden_; }

 private:
  struct Params {
    Parameter *w_ir, *w_iz, *w_in, *w_hr, *w_hz, *w_hn;
    Parameter *b_ir, *b_iz, *b_in, *b_hr, *b_hz, *b_hn;
  };
  Params p_{};
  std::size_t input_ = 0, hidden_ = 0;
};

}  // namespace negograph::nd
