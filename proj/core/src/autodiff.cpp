#include "negograph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace negograph::nd {

// ---- parameters -----------------------------------------------------------

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  if (index_.count(name) != 0) throw std::invalid_argument("duplicate parameter: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{name, Tensor(rows, cols), Tensor(rows, cols)});
  return params_.back();
}

Parameter& ParameterStore::add_glorot(const std::string& name, std::size_t rows,
                                      std::size_t cols, Xoshiro256& rng) {
  Parameter& p = add(name, rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : p.value.values()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return p;
}

Parameter& ParameterStore::add_normal(const std::string& name, std::size_t rows,
                                      std::size_t cols, double stddev, Xoshiro256& rng) {
  Parameter& p = add(name, rows, cols);
  for (double& v : p.value.values()) v = rng.normal() * stddev;
  return p;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

// ---- tape -----------------------------------------------------------------

const Tensor& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.size() != 1) throw ShapeError("scalar() on " + v.shape_string() + " tensor");
  return v[0];
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(Parameter& p) {
  nodes_.push_back(Node{p.value, {}, true, nullptr, &p});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward, const char* op) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  nodes_.push_back(Node{std::move(value), {}, requires_grad,
                        requires_grad ? std::move(backward) : nullptr, nullptr});
  return Var{this, nodes_.size() - 1};
}

Tensor& Tape::grad_of(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: variable from another tape");
  if (nodes_[loss.id].value.size() != 1) throw ShapeError("backward: loss must be 1x1");
  grad_of(loss.id)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.param != nullptr) {
      auto dst = n.param->grad.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

// ---- helpers --------------------------------------------------------------

namespace {

void require(bool cond, const char* op, const std::string& detail) {
  if (!cond) throw ShapeError(std::string(op) + ": " + detail);
}

Tape& tape_of(Var a) { return *a.tape; }

bool rg(Var v) { return v.tape->requires_grad(v.id); }

template <typename F>
Var unary(Var a, const char* op, F&& f, std::function<double(double x, double y)> dydx) {
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id;
  Tape& t = tape_of(a);
  const std::size_t out_id = t.node_count();
  return t.record(std::move(y), rg(a),
                  [ia, out_id, dydx](Tape& tp, const Tensor& g) {
                    const Tensor& xv = tp.value(ia);
                    const Tensor& yv = tp.value(out_id);
                    Tensor& ga = tp.grad_of(ia);
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dydx(xv[i], yv[i]);
                  },
                  op);
}

}  // namespace

// ---- linear algebra -------------------------------------------------------

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.cols() == bv.rows(), "matmul", av.shape_string() + " * " + bv.shape_string());
  Tensor out(av.rows(), bv.cols());
  matmul_accumulate(av, bv, out);
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(b),
                           [ia, ib](Tape& t, const Tensor& g) {
                             if (t.requires_grad(ia)) matmul_nt_accumulate(g, t.value(ib), t.grad_of(ia));
                             if (t.requires_grad(ib)) matmul_tn_accumulate(t.value(ia), g, t.grad_of(ib));
                           },
                           "matmul");
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.same_shape(bv), "add", av.shape_string() + " + " + bv.shape_string());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(b),
                           [ia, ib](Tape& t, const Tensor& g) {
                             for (std::size_t id : {ia, ib}) {
                               if (!t.requires_grad(id)) continue;
                               Tensor& gi = t.grad_of(id);
                               for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
                             }
                           },
                           "add");
}

Var add_row(Var a, Var row) {
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  require(rv.rows() == 1 && rv.cols() == av.cols(), "add_row",
          av.shape_string() + " + " + rv.shape_string());
  Tensor out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) += rv(0, j);
  const std::size_t ia = a.id, ir = row.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(row),
                           [ia, ir](Tape& t, const Tensor& g) {
                             if (t.requires_grad(ia)) {
                               Tensor& ga = t.grad_of(ia);
                               for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                             }
                             if (t.requires_grad(ir)) {
                               Tensor& gr = t.grad_of(ir);
                               for (std::size_t i = 0; i < g.rows(); ++i)
                                 for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
                             }
                           },
                           "add_row");
}

Var sub(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.same_shape(bv), "sub", av.shape_string() + " - " + bv.shape_string());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(b),
                           [ia, ib](Tape& t, const Tensor& g) {
                             if (t.requires_grad(ia)) {
                               Tensor& ga = t.grad_of(ia);
                               for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                             }
                             if (t.requires_grad(ib)) {
                               Tensor& gb = t.grad_of(ib);
                               for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                             }
                           },
                           "sub");
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.same_shape(bv), "mul", av.shape_string() + " * " + bv.shape_string());
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(b),
                           [ia, ib](Tape& t, const Tensor& g) {
                             if (t.requires_grad(ia)) {
                               Tensor& ga = t.grad_of(ia);
                               const Tensor& bv2 = t.value(ib);
                               for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
                             }
                             if (t.requires_grad(ib)) {
                               Tensor& gb = t.grad_of(ib);
                               const Tensor& av2 = t.value(ia);
                               for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
                             }
                           },
                           "mul");
}

Var mul_col(Var a, Var col) {
  const Tensor& av = a.value();
  const Tensor& cv = col.value();
  require(cv.cols() == 1 && cv.rows() == av.rows(), "mul_col",
          av.shape_string() + " * " + cv.shape_string());
  Tensor out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) *= cv(i, 0);
  const std::size_t ia = a.id, ic = col.id;
  return tape_of(a).record(std::move(out), rg(a) || rg(col),
                           [ia, ic](Tape& t, const Tensor& g) {
                             const Tensor& av2 = t.value(ia);
                             const Tensor& cv2 = t.value(ic);
                             if (t.requires_grad(ia)) {
                               Tensor& ga = t.grad_of(ia);
                               for (std::size_t i = 0; i < g.rows(); ++i)
                                 for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) * cv2(i, 0);
                             }
                             if (t.requires_grad(ic)) {
                               Tensor& gc = t.grad_of(ic);
                               for (std::size_t i = 0; i < g.rows(); ++i)
                                 for (std::size_t j = 0; j < g.cols(); ++j) gc(i, 0) += g(i, j) * av2(i, j);
                             }
                           },
                           "mul_col");
}

Var scale(Var a, double s) {
  const Tensor& av = a.value();
  Tensor out = av;
  for (double& v : out.values()) v *= s;
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia, s](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
                           },
                           "scale");
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v += s;
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                           },
                           "add_scalar");
}

Var transpose(Var a) {
  const std::size_t ia = a.id;
  return tape_of(a).record(transpose(a.value()), rg(a),
                           [ia](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
                           },
                           "transpose");
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  bool any_grad = false;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols", "row mismatch " + p.value().shape_string());
    cols += p.cols();
    any_grad = any_grad || rg(p);
    ids.push_back(p.id);
    widths.push_back(p.cols());
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, off + j) = v(i, j);
    off += v.cols();
  }
  return tape_of(parts[0]).record(std::move(out), any_grad,
                                  [ids, widths](Tape& t, const Tensor& g) {
                                    std::size_t o = 0;
                                    for (std::size_t k = 0; k < ids.size(); ++k) {
                                      if (t.requires_grad(ids[k])) {
                                        Tensor& gk = t.grad_of(ids[k]);
                                        for (std::size_t i = 0; i < g.rows(); ++i)
                                          for (std::size_t j = 0; j < widths[k]; ++j) gk(i, j) += g(i, o + j);
                                      }
                                      o += widths[k];
                                    }
                                  },
                                  "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  bool any_grad = false;
  std::vector<std::size_t> ids, heights;
  for (const Var& p : parts) {
    require(p.cols() == cols, "concat_rows", "column mismatch " + p.value().shape_string());
    rows += p.rows();
    any_grad = any_grad || rg(p);
    ids.push_back(p.id);
    heights.push_back(p.rows());
  }
  Tensor out(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.values().begin(), v.values().end(), out.values().begin() + off * cols);
    off += v.rows();
  }
  return tape_of(parts[0]).record(std::move(out), any_grad,
                                  [ids, heights, cols](Tape& t, const Tensor& g) {
                                    std::size_t o = 0;
                                    for (std::size_t k = 0; k < ids.size(); ++k) {
                                      if (t.requires_grad(ids[k])) {
                                        Tensor& gk = t.grad_of(ids[k]);
                                        for (std::size_t i = 0; i < heights[k] * cols; ++i) gk[i] += g[o * cols + i];
                                      }
                                      o += heights[k];
                                    }
                                  },
                                  "concat_rows");
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& av = a.value();
  Tensor out(rows.size(), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < av.rows(), "gather_rows",
            "row " + std::to_string(rows[i]) + " out of range for " + av.shape_string());
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(rows[i], j);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia, idx](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < idx.size(); ++i)
                               for (std::size_t j = 0; j < g.cols(); ++j) ga(idx[i], j) += g(i, j);
                           },
                           "gather_rows");
}

Var mean_rows(Var a) {
  const Tensor& av = a.value();
  require(av.rows() > 0, "mean_rows", "empty input");
  Tensor out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  const double inv = 1.0 / static_cast<double>(av.rows());
  for (double& v : out.values()) v *= inv;
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia, inv](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < ga.rows(); ++i)
                               for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) * inv;
                           },
                           "mean_rows");
}

Var max_rows(Var a) {
  const Tensor& av = a.value();
  require(av.rows() > 0, "max_rows", "empty input");
  Tensor out(1, av.cols());
  std::vector<std::size_t> arg(av.cols(), 0);
  for (std::size_t j = 0; j < av.cols(); ++j) {
    double best = av(0, j);
    for (std::size_t i = 1; i < av.rows(); ++i) {
      if (av(i, j) > best) {
        best = av(i, j);
        arg[j] = i;
      }
    }
    out(0, j) = best;
  }
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia, arg](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t j = 0; j < arg.size(); ++j) ga(arg[j], j) += g(0, j);
                           },
                           "max_rows");
}

Var masked_row_max(Var x, const Tensor& mask) {
  const Tensor& xv = x.value();
  require(mask.rows() == mask.cols() && mask.cols() == xv.rows(), "masked_row_max",
          "mask " + mask.shape_string() + " vs input " + xv.shape_string());
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out(n, d);
  std::vector<std::size_t> arg(n * d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask(i, j) == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) {
        if (!any || xv(j, k) > out(i, k)) {
          out(i, k) = xv(j, k);
          arg[i * d + k] = j;
        }
      }
      any = true;
    }
    require(any, "masked_row_max", "row " + std::to_string(i) + " fully masked");
  }
  const std::size_t ix = x.id;
  return tape_of(x).record(std::move(out), rg(x),
                           [ix, arg, d](Tape& t, const Tensor& g) {
                             Tensor& gx = t.grad_of(ix);
                             for (std::size_t i = 0; i < g.rows(); ++i)
                               for (std::size_t k = 0; k < d; ++k) gx(arg[i * d + k], k) += g(i, k);
                           },
                           "masked_row_max");
}

Var outer_sum(Var col, Var row) {
  const Tensor& cv = col.value();
  const Tensor& rv = row.value();
  require(cv.cols() == 1 && rv.rows() == 1, "outer_sum",
          cv.shape_string() + " (+) " + rv.shape_string());
  Tensor out(cv.rows(), rv.cols());
  for (std::size_t i = 0; i < cv.rows(); ++i)
    for (std::size_t j = 0; j < rv.cols(); ++j) out(i, j) = cv(i, 0) + rv(0, j);
  const std::size_t ic = col.id, ir = row.id;
  return tape_of(col).record(std::move(out), rg(col) || rg(row),
                             [ic, ir](Tape& t, const Tensor& g) {
                               if (t.requires_grad(ic)) {
                                 Tensor& gc = t.grad_of(ic);
                                 for (std::size_t i = 0; i < g.rows(); ++i)
                                   for (std::size_t j = 0; j < g.cols(); ++j) gc(i, 0) += g(i, j);
                               }
                               if (t.requires_grad(ir)) {
                                 Tensor& gr = t.grad_of(ir);
                                 for (std::size_t i = 0; i < g.rows(); ++i)
                                   for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
                               }
                             },
                             "outer_sum");
}

Var sum_all(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id;
  return tape_of(a).record(Tensor(1, 1, s), rg(a),
                           [ia](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (double& v : ga.values()) v += g[0];
                           },
                           "sum_all");
}

Var pick(Var a, std::size_t r, std::size_t c) {
  const Tensor& av = a.value();
  require(r < av.rows() && c < av.cols(), "pick", "index out of range for " + av.shape_string());
  const std::size_t ia = a.id;
  return tape_of(a).record(Tensor(1, 1, av(r, c)), rg(a),
                           [ia, r, c](Tape& t, const Tensor& g) { t.grad_of(ia)(r, c) += g[0]; },
                           "pick");
}

// ---- elementwise nonlinearities ------------------------------------------

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid",
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var elu(Var a) {
  return unary(a, "elu", [](double x) { return x > 0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary(a, "leaky_relu", [slope](double x) { return x > 0 ? x : slope * x; },
               [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Var log(Var a) {
  for (double v : a.value().values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  }
  return unary(a, "log", [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

// ---- softmax --------------------------------------------------------------

namespace {

Var softmax_impl(Var a, const Tensor* mask) {
  const Tensor& av = a.value();
  if (mask != nullptr) {
    require(mask->same_shape(av), "softmax_rows",
            "mask " + mask->shape_string() + " vs " + av.shape_string());
  }
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < av.cols(); ++j) {
      if (mask != nullptr && (*mask)(i, j) == 0.0) continue;
      m = std::max(m, av(i, j));
    }
    require(std::isfinite(m), "softmax_rows", "row " + std::to_string(i) + " fully masked");
    double z = 0.0;
    for (std::size_t j = 0; j < av.cols(); ++j) {
      if (mask != nullptr && (*mask)(i, j) == 0.0) continue;
      out(i, j) = std::exp(av(i, j) - m);
      z += out(i, j);
    }
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) /= z;
  }
  const std::size_t ia = a.id;
  Tape& t = tape_of(a);
  const std::size_t out_id = t.node_count();
  return t.record(std::move(out), rg(a),
                  [ia, out_id](Tape& tp, const Tensor& g) {
                    const Tensor& y = tp.value(out_id);
                    Tensor& ga = tp.grad_of(ia);
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      double dot = 0.0;
                      for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
                      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
                    }
                  },
                  "softmax_rows");
}

}  // namespace

Var softmax_rows(Var a) { return softmax_impl(a, nullptr); }
Var softmax_rows(Var a, const Tensor& mask) { return softmax_impl(a, &mask); }

Var log_softmax_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < av.cols(); ++j) m = std::max(m, av(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < av.cols(); ++j) z += std::exp(av(i, j) - m);
    const double lse = m + std::log(z);
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j) - lse;
  }
  const std::size_t ia = a.id;
  Tape& t = tape_of(a);
  const std::size_t out_id = t.node_count();
  return t.record(std::move(out), rg(a),
                  [ia, out_id](Tape& tp, const Tensor& g) {
                    const Tensor& y = tp.value(out_id);
                    Tensor& ga = tp.grad_of(ia);
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                      double gs = 0.0;
                      for (std::size_t j = 0; j < y.cols(); ++j) gs += g(i, j);
                      for (std::size_t j = 0; j < y.cols(); ++j) ga(i, j) += g(i, j) - std::exp(y(i, j)) * gs;
                    }
                  },
                  "log_softmax_rows");
}

Var dropout(Var a, double rate, bool training, Xoshiro256& rng) {
  if (!training || rate <= 0.0) return a;
  if (rate >= 1.0) throw std::invalid_argument("dropout rate must be < 1");
  const Tensor& av = a.value();
  Tensor keep(av.rows(), av.cols());
  const double inv = 1.0 / (1.0 - rate);
  for (double& k : keep.values()) k = rng.uniform() < rate ? 0.0 : inv;
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= keep[i];
  const std::size_t ia = a.id;
  return tape_of(a).record(std::move(out), rg(a),
                           [ia, keep = std::move(keep)](Tape& t, const Tensor& g) {
                             Tensor& ga = t.grad_of(ia);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * keep[i];
                           },
                           "dropout");
}

}  // namespace negograph::nd
