#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "dllab/core/error.hpp"
#include "dllab/diff/matrix.hpp"
#include "dllab/diff/spectral_geometry.hpp"

namespace dllab::diff {

template <class S>
struct Parameter {
  std::string name;
  Matrix<S> value;
  Matrix<S> grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Owns named trainable parameters with stable addresses.
template <class S>
class ParameterSet {
 public:
  Parameter<S>& add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    if (find(name) != nullptr) throw UsageError("duplicate parameter name " + name);
    auto p = std::make_unique<Parameter<S>>();
    p->name = std::move(name);
    p->value.setZero(rows, cols);
    p->grad.setZero(rows, cols);
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter<S>* find(const std::string& name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }

  std::size_t size() const noexcept { return params_.size(); }
  Parameter<S>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<S>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<S>>> params_;
};

/// Reverse-mode recorder over a closed set of batched operations: dense
/// affine maps, GELU, sums, spectral convolution, mean pooling, column
/// concatenation, row repetition, coefficient/basis contraction and
/// squared-error reduction. Parameter gradients accumulate into
/// Parameter::grad; callers zero them between steps.
template <class S>
class Tape {
 public:
  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    const Tape* owner = nullptr;
  };

  Var constant(Matrix<S> value) { return push(Op::constant, std::move(value), {}, false); }

  /// Leaf whose gradient is available through grad() after backward().
  Var variable(Matrix<S> value) { return push(Op::variable, std::move(value), {}, true); }

  const Matrix<S>& value(Var v) const { return node(v).value; }

  const Matrix<S>& grad(Var v) const {
    const Node& n = node(v);
    if (n.grad.size() == 0) throw UsageError("no gradient recorded for this value");
    return n.grad;
  }

  /// y = x W + b with W (in x out) and optional b (1 x out).
  Var affine(Var x, Parameter<S>& w, Parameter<S>* b) {
    const Matrix<S>& xv = value(x);
    if (xv.cols() != w.value.rows()) throw UsageError("affine: input width mismatch for " + w.name);
    Matrix<S> y = xv * w.value;
    if (b != nullptr) y.rowwise() += b->value.row(0);
    Var out = push(Op::affine, std::move(y), {x.id}, true);
    nodes_[out.id].p0 = &w;
    nodes_[out.id].p1 = b;
    return out;
  }

  Var gelu(Var x) {
    const Matrix<S>& xv = value(x);
    Matrix<S> y(xv.rows(), xv.cols());
    auto xa = xv.array();
    const auto t = (kGeluC * (xa + S(0.044715) * xa.cube())).tanh();
    y.array() = S(0.5) * xa * (S(1) + t);
    return push(Op::gelu, std::move(y), {x.id}, needs(x));
  }

  Var add(Var a, Var b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
      throw UsageError("add: shape mismatch");
    }
    return push(Op::add, value(a) + value(b), {a.id, b.id}, needs(a) || needs(b));
  }

  /// Fourier-space complex channel mixing. x: (batch*points) x Cin. Weights
  /// re/im: (modes*Cin) x Cout, mode k occupying rows [k*Cin, (k+1)*Cin).
  Var spectral_conv(Var x, const SpectralGeometry<S>& geo, int batch, Parameter<S>& wr,
                    Parameter<S>& wi) {
    const Matrix<S>& xv = value(x);
    const int p = geo.points();
    const int m = geo.mode_count();
    const auto cin = xv.cols();
    const auto cout = wr.value.cols();
    if (xv.rows() != static_cast<Eigen::Index>(batch) * p) throw UsageError("spectral_conv: row count mismatch");
    if (wr.value.rows() != m * cin) throw UsageError("spectral_conv: weight shape mismatch for " + wr.name);
    Matrix<S> hr(m * batch, cin), hi(m * batch, cin);
    for (int b = 0; b < batch; ++b) geo.analyze(xv.middleRows(b * p, p), b, batch, hr, hi);
    Matrix<S> yr(m * batch, cout), yi(m * batch, cout);
    for (int k = 0; k < m; ++k) {
      const auto wrk = wr.value.middleRows(k * cin, cin);
      const auto wik = wi.value.middleRows(k * cin, cin);
      const auto hrk = hr.middleRows(k * batch, batch);
      const auto hik = hi.middleRows(k * batch, batch);
      yr.middleRows(k * batch, batch).noalias() = hrk * wrk - hik * wik;
      yi.middleRows(k * batch, batch).noalias() = hrk * wik + hik * wrk;
    }
    Matrix<S> y(static_cast<Eigen::Index>(batch) * p, cout);
    for (int b = 0; b < batch; ++b) geo.synthesize(yr, yi, b, batch, y.middleRows(b * p, p));
    Var out = push(Op::spectral, std::move(y), {x.id}, true);
    Node& n = nodes_[out.id];
    n.p0 = &wr;
    n.p1 = &wi;
    n.geo = &geo;
    n.batch = batch;
    n.aux0 = std::move(hr);
    n.aux1 = std::move(hi);
    return out;
  }

  /// (batch*points) x C -> batch x C.
  Var mean_pool(Var x, int batch) {
    const Matrix<S>& xv = value(x);
    const auto p = xv.rows() / batch;
    if (p * batch != xv.rows()) throw UsageError("mean_pool: rows not divisible by batch");
    Matrix<S> y(batch, xv.cols());
    for (int b = 0; b < batch; ++b) y.row(b) = xv.middleRows(b * p, p).colwise().mean();
    Var out = push(Op::mean_pool, std::move(y), {x.id}, needs(x));
    nodes_[out.id].batch = batch;
    return out;
  }

  Var concat(Var a, Var b) {
    const Matrix<S>& av = value(a);
    const Matrix<S>& bv = value(b);
    if (av.rows() != bv.rows()) throw UsageError("concat: row mismatch");
    Matrix<S> y(av.rows(), av.cols() + bv.cols());
    y.leftCols(av.cols()) = av;
    y.rightCols(bv.cols()) = bv;
    return push(Op::concat, std::move(y), {a.id, b.id}, needs(a) || needs(b));
  }

  /// Row b of x becomes rows [b*times, (b+1)*times) of the result.
  Var repeat_rows(Var x, int times) {
    const Matrix<S>& xv = value(x);
    Matrix<S> y(xv.rows() * times, xv.cols());
    for (Eigen::Index b = 0; b < xv.rows(); ++b) {
      for (int d = 0; d < times; ++d) y.row(b * times + d) = xv.row(b);
    }
    Var out = push(Op::repeat_rows, std::move(y), {x.id}, needs(x));
    nodes_[out.id].batch = times;
    return out;
  }

  /// Pointwise sum_k coeffs[b,k] * basis[b*P + p, k]: (batch x r), (batch*P x r) -> (batch*P x 1).
  Var combine(Var coeffs, Var basis, int batch) {
    const Matrix<S>& cv = value(coeffs);
    const Matrix<S>& bv = value(basis);
    if (cv.rows() != batch || cv.cols() != bv.cols()) throw UsageError("combine: coefficient/basis rank mismatch");
    const auto p = bv.rows() / batch;
    Matrix<S> y(bv.rows(), 1);
    for (int b = 0; b < batch; ++b) y.middleRows(b * p, p).noalias() = bv.middleRows(b * p, p) * cv.row(b).transpose();
    Var out = push(Op::combine, std::move(y), {coeffs.id, basis.id}, needs(coeffs) || needs(basis));
    nodes_[out.id].batch = batch;
    return out;
  }

  /// scale * sum((pred - target)^2), a 1x1 value.
  Var squared_error(Var pred, const Matrix<S>& target, S scale) {
    const Matrix<S>& pv = value(pred);
    if (pv.rows() != target.rows() || pv.cols() != target.cols()) throw UsageError("squared_error: shape mismatch");
    Matrix<S> y(1, 1);
    y(0, 0) = scale * (pv - target).squaredNorm();
    Var out = push(Op::sq_error, std::move(y), {pred.id}, needs(pred));
    nodes_[out.id].aux0 = target;
    nodes_[out.id].scalar = scale;
    return out;
  }

  /// Reverse sweep from a scalar recorded on this tape.
  void backward(Var loss) {
    if (loss.owner != this || loss.id >= nodes_.size()) {
      throw UsageError("backward through a value not recorded on this tape");
    }
    Node& root = nodes_[loss.id];
    if (root.value.size() != 1) throw UsageError("backward requires a scalar loss");
    if (!root.needs_grad) throw UsageError("loss does not depend on any tracked value");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    root.grad.setOnes(1, 1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0 || !n.needs_grad) continue;
      propagate(n);
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op { constant, variable, affine, gelu, add, spectral, mean_pool, concat, repeat_rows, combine, sq_error };

  struct Node {
    Op op;
    std::size_t in0 = npos;
    std::size_t in1 = npos;
    bool needs_grad = false;
    Matrix<S> value;
    Matrix<S> grad;
    Parameter<S>* p0 = nullptr;
    Parameter<S>* p1 = nullptr;
    const SpectralGeometry<S>* geo = nullptr;
    int batch = 0;
    S scalar{};
    Matrix<S> aux0;
    Matrix<S> aux1;
  };

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  static constexpr S kGeluC = S(0.7978845608028654);

  const Node& node(Var v) const {
    if (v.owner != this || v.id >= nodes_.size()) throw UsageError("value is not recorded on this tape");
    return nodes_[v.id];
  }

  bool needs(Var v) const { return node(v).needs_grad; }

  Var push(Op op, Matrix<S> value, std::initializer_list<std::size_t> inputs, bool needs_grad) {
    Node n;
    n.op = op;
    auto it = inputs.begin();
    if (it != inputs.end()) n.in0 = *it++;
    if (it != inputs.end()) n.in1 = *it;
    n.needs_grad = needs_grad;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1, this};
  }

  Matrix<S>& grad_of(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool tracks(std::size_t id) const { return id != npos && nodes_[id].needs_grad; }

  void propagate(Node& n) {
    const Matrix<S>& g = n.grad;
    switch (n.op) {
      case Op::constant:
      case Op::variable:
        break;
      case Op::affine: {
        const Matrix<S>& x = nodes_[n.in0].value;
        n.p0->grad.noalias() += x.transpose() * g;
        if (n.p1 != nullptr) n.p1->grad.row(0) += g.colwise().sum();
        if (tracks(n.in0)) grad_of(n.in0).noalias() += g * n.p0->value.transpose();
        break;
      }
      case Op::gelu: {
        if (!tracks(n.in0)) break;
        const auto xa = nodes_[n.in0].value.array();
        const auto t = (kGeluC * (xa + S(0.044715) * xa.cube())).tanh().eval();
        const auto d = S(0.5) * (S(1) + t) +
                       S(0.5) * xa * (S(1) - t.square()) * kGeluC * (S(1) + S(3 * 0.044715) * xa.square());
        grad_of(n.in0).array() += g.array() * d;
        break;
      }
      case Op::add:
        if (tracks(n.in0)) grad_of(n.in0) += g;
        if (tracks(n.in1)) grad_of(n.in1) += g;
        break;
      case Op::spectral:
        propagate_spectral(n);
        break;
      case Op::mean_pool: {
        if (!tracks(n.in0)) break;
        Matrix<S>& dx = grad_of(n.in0);
        const auto p = dx.rows() / n.batch;
        for (int b = 0; b < n.batch; ++b) {
          dx.middleRows(b * p, p).rowwise() += g.row(b) / static_cast<S>(p);
        }
        break;
      }
      case Op::concat: {
        const auto ca = nodes_[n.in0].value.cols();
        if (tracks(n.in0)) grad_of(n.in0) += g.leftCols(ca);
        if (tracks(n.in1)) grad_of(n.in1) += g.rightCols(g.cols() - ca);
        break;
      }
      case Op::repeat_rows: {
        if (!tracks(n.in0)) break;
        Matrix<S>& dx = grad_of(n.in0);
        for (Eigen::Index b = 0; b < dx.rows(); ++b) {
          dx.row(b) += g.middleRows(b * n.batch, n.batch).colwise().sum();
        }
        break;
      }
      case Op::combine: {
        const Matrix<S>& cv = nodes_[n.in0].value;
        const Matrix<S>& bv = nodes_[n.in1].value;
        const auto p = bv.rows() / n.batch;
        const bool dc = tracks(n.in0);
        const bool db = tracks(n.in1);
        for (int b = 0; b < n.batch; ++b) {
          const auto gb = g.middleRows(b * p, p);
          if (dc) grad_of(n.in0).row(b).noalias() += (bv.middleRows(b * p, p).transpose() * gb).transpose();
          if (db) grad_of(n.in1).middleRows(b * p, p).noalias() += gb * cv.row(b);
        }
        break;
      }
      case Op::sq_error: {
        if (!tracks(n.in0)) break;
        const S scale = S(2) * n.scalar * g(0, 0);
        grad_of(n.in0) += scale * (nodes_[n.in0].value - n.aux0);
        break;
      }
    }
  }

  void propagate_spectral(Node& n) {
    const SpectralGeometry<S>& geo = *n.geo;
    const int batch = n.batch;
    const int p = geo.points();
    const int m = geo.mode_count();
    const Matrix<S>& wr = n.p0->value;
    const Matrix<S>& wi = n.p1->value;
    const auto cin = wr.rows() / m;
    const auto cout = wr.cols();
    Matrix<S> dyr(m * batch, cout), dyi(m * batch, cout);
    for (int b = 0; b < batch; ++b) geo.synthesize_adjoint(n.grad.middleRows(b * p, p), b, batch, dyr, dyi);
    const bool dx = tracks(n.in0);
    Matrix<S> dhr, dhi;
    if (dx) {
      dhr.resize(m * batch, cin);
      dhi.resize(m * batch, cin);
    }
    for (int k = 0; k < m; ++k) {
      const auto hrk = n.aux0.middleRows(k * batch, batch);
      const auto hik = n.aux1.middleRows(k * batch, batch);
      const auto dyrk = dyr.middleRows(k * batch, batch);
      const auto dyik = dyi.middleRows(k * batch, batch);
      n.p0->grad.middleRows(k * cin, cin).noalias() += hrk.transpose() * dyrk + hik.transpose() * dyik;
      n.p1->grad.middleRows(k * cin, cin).noalias() += hrk.transpose() * dyik - hik.transpose() * dyrk;
      if (dx) {
        const auto wrk = wr.middleRows(k * cin, cin);
        const auto wik = wi.middleRows(k * cin, cin);
        dhr.middleRows(k * batch, batch).noalias() = dyrk * wrk.transpose() + dyik * wik.transpose();
        dhi.middleRows(k * batch, batch).noalias() = dyik * wrk.transpose() - dyrk * wik.transpose();
      }
    }
    if (dx) {
      Matrix<S>& gx = grad_of(n.in0);
      for (int b = 0; b < batch; ++b) geo.analyze_adjoint(dhr, dhi, b, batch, gx.middleRows(b * p, p));
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace dllab::diff
