#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dllab/core/error.hpp"
#include "dllab/io/checkpoint.hpp"
#include "dllab/model/dll.hpp"
#include "dllab/model/encoder.hpp"
#include "dllab/pipeline/config.hpp"

namespace dllab::pipeline {

template <class S>
constexpr std::uint32_t scalar_bytes() {
  return sizeof(S) == 4 ? 4u : 8u;
}

template <class S>
std::vector<io::Checkpoint::Blob> capture(const diff::ParameterSet<S>& params, const std::vector<diff::Matrix<S>>& ema) {
  if (ema.size() != params.size()) throw UsageError("EMA shadow does not match parameters");
  std::vector<io::Checkpoint::Blob> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    io::Checkpoint::Blob b{p.name, static_cast<std::uint64_t>(p.value.rows()), static_cast<std::uint64_t>(p.value.cols()), {}, {}};
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        b.raw.push_back(static_cast<double>(p.value(r, c)));
        b.ema.push_back(static_cast<double>(ema[i](r, c)));
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

/// Copies checkpoint values into a freshly built parameter set; names and
/// shapes must agree exactly.
template <class S>
void restore(diff::ParameterSet<S>& params, const io::Checkpoint& ckpt, bool use_ema) {
  if (ckpt.scalar_bytes != scalar_bytes<S>()) throw UsageError("checkpoint precision does not match the model");
  if (ckpt.params.size() != params.size()) throw DigestError("checkpoint parameter count does not match the architecture");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const auto& b = ckpt.params[i];
    if (b.name != p.name || b.rows != static_cast<std::uint64_t>(p.value.rows()) ||
        b.cols != static_cast<std::uint64_t>(p.value.cols())) {
      throw DigestError("checkpoint parameter " + b.name + " does not match " + p.name);
    }
    const auto& src = use_ema ? b.ema : b.raw;
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) p.value(r, c) = static_cast<S>(src[static_cast<std::size_t>(r * p.value.cols() + c)]);
    }
  }
}

model::EncoderConfig encoder_config(const RunConfig& cfg, int dim);
model::DllConfig dll_config(const RunConfig& cfg, int dim, int rank);
nn::FnoConfig fno_config(const RunConfig& cfg, int dim);

std::vector<std::int64_t> encoder_arch(const model::EncoderConfig& c, const std::vector<int>& grid);
std::vector<std::int64_t> dll_arch(const model::DllConfig& c, const std::vector<int>& grid);
std::vector<std::int64_t> fno_arch(const nn::FnoConfig& c, const std::vector<int>& grid);

model::EncoderConfig encoder_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid);
model::DllConfig dll_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid);
nn::FnoConfig fno_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid);

void require_kind(const io::Checkpoint& c, io::ModelKind kind);

template <class S>
std::unique_ptr<model::OperatorEncoder<S>> load_encoder(const io::Checkpoint& c, bool use_ema = true) {
  require_kind(c, io::ModelKind::encoder);
  std::vector<int> grid;
  const auto cfg = encoder_from_arch(c.arch, grid);
  auto m = std::make_unique<model::OperatorEncoder<S>>(cfg, grid);
  restore(m->params(), c, use_ema);
  return m;
}

template <class S>
std::unique_ptr<model::DllHead<S>> load_dll(const io::Checkpoint& c, model::LatentScaling& scaling, bool use_ema = true) {
  require_kind(c, io::ModelKind::dll);
  std::vector<int> grid;
  const auto cfg = dll_from_arch(c.arch, grid);
  auto m = std::make_unique<model::DllHead<S>>(cfg, grid);
  restore(m->params(), c, use_ema);
  const auto r = static_cast<std::size_t>(cfg.rank);
  if (c.extra.size() != 2 * r) throw IoError("DLL checkpoint lacks latent scaling");
  scaling.mean = Eigen::Map<const Eigen::RowVectorXd>(c.extra.data(), cfg.rank);
  scaling.scale = Eigen::Map<const Eigen::RowVectorXd>(c.extra.data() + r, cfg.rank);
  return m;
}

template <class S>
std::unique_ptr<model::FnoBaseline<S>> load_fno(const io::Checkpoint& c, bool use_ema = true) {
  require_kind(c, io::ModelKind::fno);
  std::vector<int> grid;
  const auto cfg = fno_from_arch(c.arch, grid);
  auto m = std::make_unique<model::FnoBaseline<S>>(cfg, grid);
  restore(m->params(), c, use_ema);
  return m;
}

}  // namespace dllab::pipeline
