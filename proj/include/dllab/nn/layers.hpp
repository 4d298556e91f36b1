#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dllab/core/rng.hpp"
#include "dllab/diff/tape.hpp"

namespace dllab::nn {

using diff::Matrix;
using diff::Parameter;
using diff::ParameterSet;
using diff::Tape;

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
template <class S>
void init_affine(Parameter<S>& w, Parameter<S>* b, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.value.rows()));
  for (Eigen::Index i = 0; i < w.value.size(); ++i) w.value.data()[i] = static_cast<S>(bound * (2 * rng.uniform() - 1));
  if (b != nullptr) {
    for (Eigen::Index i = 0; i < b->value.size(); ++i) b->value.data()[i] = static_cast<S>(bound * (2 * rng.uniform() - 1));
  }
}

/// A dense layer registered in a ParameterSet.
template <class S>
struct Dense {
  Parameter<S>* w = nullptr;
  Parameter<S>* b = nullptr;

  Dense() = default;
  Dense(ParameterSet<S>& params, const std::string& name, int in, int out) {
    w = &params.add(name + ".w", in, out);
    b = &params.add(name + ".b", 1, out);
  }

  void init(Rng& rng) { init_affine(*w, b, rng); }

  typename Tape<S>::Var operator()(Tape<S>& tape, typename Tape<S>::Var x) const { return tape.affine(x, *w, b); }
};

/// Fully connected network with GELU between layers.
template <class S>
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet<S>& params, const std::string& name, int in, std::vector<int> hidden, int out) {
    int prev = in;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      layers_.emplace_back(params, name + ".h" + std::to_string(i), prev, hidden[i]);
      prev = hidden[i];
    }
    layers_.emplace_back(params, name + ".out", prev, out);
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l.init(rng);
  }

  typename Tape<S>::Var operator()(Tape<S>& tape, typename Tape<S>::Var x) const {
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) x = tape.gelu(layers_[i](tape, x));
    return layers_.back()(tape, x);
  }

 private:
  std::vector<Dense<S>> layers_;
};

/// Fixed sinusoidal embedding of tau in [0, 1]: sin and cos at `dim/2`
/// geometrically spaced frequencies from 1 to 1000.
template <class S>
Matrix<S> time_embedding(const std::vector<double>& tau, int dim) {
  const int half = dim / 2;
  Matrix<S> out(static_cast<Eigen::Index>(tau.size()), dim);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    for (int f = 0; f < half; ++f) {
      const double freq = std::exp(std::log(1000.0) * f / std::max(1, half - 1));
      out(static_cast<Eigen::Index>(i), f) = static_cast<S>(std::sin(freq * tau[i]));
      out(static_cast<Eigen::Index>(i), half + f) = static_cast<S>(std::cos(freq * tau[i]));
    }
  }
  return out;
}

}  // namespace dllab::nn
