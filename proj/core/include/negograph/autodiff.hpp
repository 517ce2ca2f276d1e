#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "negograph/rng.hpp"
#include "negograph/tensor.hpp"

namespace negograph::nd {

/// A named learnable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

/// Owns parameters with stable addresses; iteration order is insertion order
/// so checkpoints and optimizer state line up across runs.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols);
  /// Glorot-uniform initialization drawn from `rng`.
  Parameter& add_glorot(const std::string& name, std::size_t rows, std::size_t cols,
                        Xoshiro256& rng);
  Parameter& add_normal(const std::string& name, std::size_t rows, std::size_t cols,
                        double stddev, Xoshiro256& rng);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
};

/// Reverse-mode tape. Single-threaded; one tape per forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(Parameter& p);

  /// Records an op result. `backward` receives the output gradient and must
  /// accumulate into input gradients via `grad_of`.
  Var record(Tensor value, bool requires_grad, BackwardFn backward, const char* op);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of node `id`, allocated on first use.
  Tensor& grad_of(std::size_t id);
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

  /// Seeds d(loss)/d(loss) = 1 and propagates to all parameters.
  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
};

// ---- operator set ---------------------------------------------------------

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// a (n x d) + row (1 x d) broadcast over rows.
Var add_row(Var a, Var row);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// a (n x d) * col (n x 1) broadcast over columns.
Var mul_col(Var a, Var col);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var transpose(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
/// Row gather; doubles as embedding lookup. Gradients scatter-add.
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var mean_rows(Var a);
/// Column-wise max over rows. Gradient goes to the first argmax.
Var max_rows(Var a);
/// out(i, :) = max over {j : mask(i, j) != 0} of x(j, :).
Var masked_row_max(Var x, const Tensor& mask);
/// out(i, j) = col(i, 0) + row(0, j).
Var outer_sum(Var col, Var row);
Var sum_all(Var a);
Var pick(Var a, std::size_t r, std::size_t c);

Var sigmoid(Var a);
Var tanh(Var a);
Var elu(Var a);
Var leaky_relu(Var a, double slope);
Var log(Var a);
/// Clamps into [lo, hi]; gradient passes only where the input was inside.
Var clamp(Var a, double lo, double hi);

/// Row-wise softmax. With a mask, entries where mask == 0 get probability 0;
/// a row with no unmasked entry is a contract violation.
Var softmax_rows(Var a);
Var softmax_rows(Var a, const Tensor& mask);
Var log_softmax_rows(Var a);

/// Inverted dropout. Identity when rate == 0 or when not training.
Var dropout(Var a, double rate, bool training, Xoshiro256& rng);

}  // namespace negograph::nd
