#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dllab/nn/layers.hpp"

namespace dllab::nn {

struct FnoConfig {
  int dim = 1;
  int in_channels = 1;
  int width = 64;
  int modes = 32;
  int layers = 4;
  int projection = 128;
  int out_channels = 1;
};

/// Retained modes per axis for an n-point axis: min(cap, floor(n/3)).
inline int fno_modes(int cap, int n) { return std::min(cap, n / 3); }

/// Fourier neural operator: lift the input plus grid coordinates to `width`
/// channels, apply spectral layers h <- gelu(K h + W h) (no activation after
/// the last), then project pointwise through one hidden layer.
template <class S>
class Fno {
 public:
  using Var = typename Tape<S>::Var;

  Fno() = default;
  Fno(ParameterSet<S>& params, const std::string& name, const FnoConfig& cfg) : cfg_(cfg) {
    if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("FNO supports 1D and 2D grids");
    const int mode_count = cfg.dim == 1 ? cfg.modes : cfg.modes * (2 * cfg.modes - 1);
    lift_ = Dense<S>(params, name + ".lift", cfg.in_channels + cfg.dim, cfg.width);
    for (int l = 0; l < cfg.layers; ++l) {
      const std::string layer = name + ".layer" + std::to_string(l);
      spectral_re_.push_back(&params.add(layer + ".spec_re", mode_count * cfg.width, cfg.width));
      spectral_im_.push_back(&params.add(layer + ".spec_im", mode_count * cfg.width, cfg.width));
      pointwise_.emplace_back(params, layer + ".pointwise", cfg.width, cfg.width);
    }
    proj1_ = Dense<S>(params, name + ".proj1", cfg.width, cfg.projection);
    proj2_ = Dense<S>(params, name + ".proj2", cfg.projection, cfg.out_channels);
  }

  const FnoConfig& config() const noexcept { return cfg_; }

  void init(Rng& rng) {
    lift_.init(rng);
    const double scale = 1.0 / (static_cast<double>(cfg_.width) * cfg_.width);
    for (std::size_t l = 0; l < spectral_re_.size(); ++l) {
      for (auto* p : {spectral_re_[l], spectral_im_[l]}) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = static_cast<S>(scale * rng.uniform());
      }
      pointwise_[l].init(rng);
    }
    proj1_.init(rng);
    proj2_.init(rng);
  }

  /// x: (batch * points) x in_channels on `grid` (per-axis sizes).
  Var operator()(Tape<S>& tape, Var x, int batch, const std::vector<int>& grid) const {
    return proj2_(tape, tape.gelu(proj1_(tape, hidden(tape, x, batch, grid))));
  }

  /// Final spectral-layer features, (batch * points) x width.
  Var hidden(Tape<S>& tape, Var x, int batch, const std::vector<int>& grid) const {
    const auto& geo = geometry(grid);
    const Var coords = tape.constant(coordinates(grid, batch));
    Var h = lift_(tape, tape.concat(x, coords));
    for (std::size_t l = 0; l < spectral_re_.size(); ++l) {
      h = tape.add(tape.spectral_conv(h, geo, batch, *spectral_re_[l], *spectral_im_[l]), pointwise_[l](tape, h));
      if (l + 1 < spectral_re_.size()) h = tape.gelu(h);
    }
    return h;
  }

  const diff::SpectralGeometry<S>& geometry(const std::vector<int>& grid) const {
    if (static_cast<int>(grid.size()) != cfg_.dim) throw UsageError("FNO grid rank mismatch");
    auto it = geometries_.find(grid);
    if (it == geometries_.end()) {
      it = geometries_.emplace(grid, std::make_shared<diff::SpectralGeometry<S>>(grid, cfg_.modes)).first;
    }
    return *it->second;
  }

 private:
  static Matrix<S> coordinates(const std::vector<int>& grid, int batch) {
    const int p = grid.size() == 1 ? grid[0] : grid[0] * grid[1];
    Matrix<S> c(static_cast<Eigen::Index>(batch) * p, static_cast<Eigen::Index>(grid.size()));
    for (int b = 0; b < batch; ++b) {
      for (int i = 0; i < p; ++i) {
        const auto row = static_cast<Eigen::Index>(b) * p + i;
        if (grid.size() == 1) {
          c(row, 0) = static_cast<S>(static_cast<double>(i) / grid[0]);
        } else {
          c(row, 0) = static_cast<S>(static_cast<double>(i / grid[1]) / grid[0]);
          c(row, 1) = static_cast<S>(static_cast<double>(i % grid[1]) / grid[1]);
        }
      }
    }
    return c;
  }

  FnoConfig cfg_;
  Dense<S> lift_, proj1_, proj2_;
  std::vector<Parameter<S>*> spectral_re_, spectral_im_;
  std::vector<Dense<S>> pointwise_;
  mutable std::map<std::vector<int>, std::shared_ptr<diff::SpectralGeometry<S>>> geometries_;
};

}  // namespace dllab::nn
