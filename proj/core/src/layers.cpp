#include "negograph/layers.hpp"

#include <cmath>

namespace negograph::nd {

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in,
               std::size_t out, Xoshiro256& rng, bool bias)
    : in_(in), out_(out) {
  w_ = &store.add_glorot(name + ".w", in, out, rng);
  if (bias) b_ = &store.add(name + ".b", 1, out);
}

Linear::Bound Linear::bind(Tape& tape) const {
  Bound b;
  b.w = tape.param(*w_);
  if (b_ != nullptr) {
    b.b = tape.param(*b_);
    b.has_bias = true;
  }
  return b;
}

Var Linear::apply(const Bound& bound, Var x) const {
  Var y = matmul(x, bound.w);
  return bound.has_bias ? add_row(y, bound.b) : y;
}

GruCell::GruCell(ParameterStore& store, const std::string& name, std::size_t input_dim,
                 std::size_t hidden_dim, Xoshiro256& rng)
    : input_(input_dim), hidden_(hidden_dim) {
  // Uniform(-1/sqrt(H), 1/sqrt(H)) like the usual recurrent initialization.
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  auto uni = [&](const std::string& n, std::size_t r, std::size_t c) {
    Parameter& p = store.add(name + "." + n, r, c);
    for (double& v : p.value.values()) v = (2.0 * rng.uniform() - 1.0) * k;
    return &p;
  };
  p_.w_ir = uni("w_ir", input_dim, hidden_dim);
  p_.w_iz = uni("w_iz", input_dim, hidden_dim);
  p_.w_in = uni("w_in", input_dim, hidden_dim);
  p_.w_hr = uni("w_hr", hidden_dim, hidden_dim);
  p_.w_hz = uni("w_hz", hidden_dim, hidden_dim);
  p_.w_hn = uni("w_hn", hidden_dim, hidden_dim);
  p_.b_ir = uni("b_ir", 1, hidden_dim);
  p_.b_iz = uni("b_iz", 1, hidden_dim);
  p_.b_in = uni("b_in", 1, hidden_dim);
  p_.b_hr = uni("b_hr", 1, hidden_dim);
  p_.b_hz = uni("b_hz", 1, hidden_dim);
  p_.b_hn = uni("b_hn", 1, hidden_dim);
}

GruCell::Bound GruCell::bind(Tape& tape) const {
  return Bound{tape.param(*p_.w_ir), tape.param(*p_.w_iz), tape.param(*p_.w_in),
               tape.param(*p_.w_hr), tape.param(*p_.w_hz), tape.param(*p_.w_hn),
               tape.param(*p_.b_ir), tape.param(*p_.b_iz), tape.param(*p_.b_in),
               tape.param(*p_.b_hr), tape.param(*p_.b_hz), tape.param(*p_.b_hn)};
}

Var GruCell::step(const Bound& p, Var x, Var h) const {
  if (x.cols() != input_ || h.cols() != hidden_) {
    throw ShapeError("gru_cell: input " + x.value().shape_string() + ", hidden " +
                     h.value().shape_string() + " vs cell " + std::to_string(input_) + "->" +
                     std::to_string(hidden_));
  }
  Var r = sigmoid(add(add_row(matmul(x, p.w_ir), p.b_ir), add_row(matmul(h, p.w_hr), p.b_hr)));
  Var z = sigmoid(add(add_row(matmul(x, p.w_iz), p.b_iz), add_row(matmul(h, p.w_hz), p.b_hz)));
  Var n = tanh(add(add_row(matmul(x, p.w_in), p.b_in), mul(r, add_row(matmul(h, p.w_hn), p.b_hn))));
  // (1 - z) * n + z * h  ==  n + z * (h - n)
  return add(n, mul(z, sub(h, n)));
}

}  // namespace negograph::nd
