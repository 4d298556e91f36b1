#include "dllab/pipeline/models.hpp"

namespace dllab::pipeline {

namespace {

int positive_int(const RunConfig& cfg, const std::string& key) {
  const long v = cfg.integer(key);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return static_cast<int>(v);
}

std::vector<std::int64_t> with_grid(std::vector<std::int64_t> fields, const std::vector<int>& grid) {
  for (int g : grid) fields.push_back(g);
  return fields;
}

/// Splits arch into `n` leading fields and a grid whose rank is field 0.
std::vector<std::int64_t> split_arch(const std::vector<std::int64_t>& arch, std::size_t n, std::vector<int>& grid) {
  if (arch.size() < n || arch[0] < 1 || arch[0] > 2 || arch.size() != n + static_cast<std::size_t>(arch[0])) {
    throw IoError("checkpoint architecture record is malformed");
  }
  grid.assign(arch.begin() + static_cast<long>(n), arch.end());
  return {arch.begin(), arch.begin() + static_cast<long>(n)};
}

}  // namespace

model::EncoderConfig encoder_config(const RunConfig& cfg, int dim) {
  model::EncoderConfig c;
  c.dim = dim;
  c.rank = positive_int(cfg, "encoder.rank");
  c.width = positive_int(cfg, "encoder.width");
  c.modes = positive_int(cfg, "encoder.modes");
  c.layers = positive_int(cfg, "encoder.layers");
  c.projection = positive_int(cfg, "encoder.projection");
  c.nf_features = positive_int(cfg, "encoder.nf_features");
  return c;
}

model::DllConfig dll_config(const RunConfig& cfg, int dim, int rank) {
  model::DllConfig c;
  c.dim = dim;
  c.rank = rank;
  c.cond_width = positive_int(cfg, "dll.cond_width");
  c.cond_modes = positive_int(cfg, "dll.cond_modes");
  c.cond_layers = positive_int(cfg, "dll.cond_layers");
  c.cond_projection = positive_int(cfg, "dll.cond_projection");
  c.cond_features = positive_int(cfg, "dll.cond_features");
  c.cond_dim = positive_int(cfg, "dll.cond_dim");
  c.hidden = positive_int(cfg, "dll.hidden");
  c.hidden_layers = positive_int(cfg, "dll.hidden_layers");
  c.time_dim = positive_int(cfg, "dll.time_dim");
  c.draws = positive_int(cfg, "dll.draws");
  return c;
}

nn::FnoConfig fno_config(const RunConfig& cfg, int dim) {
  nn::FnoConfig c;
  c.dim = dim;
  c.width = positive_int(cfg, "fno.width");
  c.modes = positive_int(cfg, "fno.modes");
  c.layers = positive_int(cfg, "fno.layers");
  c.projection = positive_int(cfg, "fno.projection");
  return c;
}

std::vector<std::int64_t> encoder_arch(const model::EncoderConfig& c, const std::vector<int>& grid) {
  return with_grid({c.dim, c.rank, c.width, c.modes, c.layers, c.projection, c.nf_features}, grid);
}

std::vector<std::int64_t> dll_arch(const model::DllConfig& c, const std::vector<int>& grid) {
  return with_grid({c.dim, c.rank, c.cond_width, c.cond_modes, c.cond_layers, c.cond_projection, c.cond_features,
                    c.cond_dim, c.hidden, c.hidden_layers, c.time_dim, c.draws},
                   grid);
}

std::vector<std::int64_t> fno_arch(const nn::FnoConfig& c, const std::vector<int>& grid) {
  return with_grid({c.dim, c.width, c.modes, c.layers, c.projection}, grid);
}

model::EncoderConfig encoder_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid) {
  const auto f = split_arch(arch, 7, grid);
  model::EncoderConfig c;
  c.dim = static_cast<int>(f[0]);
  c.rank = static_cast<int>(f[1]);
  c.width = static_cast<int>(f[2]);
  c.modes = static_cast<int>(f[3]);
  c.layers = static_cast<int>(f[4]);
  c.projection = static_cast<int>(f[5]);
  c.nf_features = static_cast<int>(f[6]);
  return c;
}

model::DllConfig dll_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid) {
  const auto f = split_arch(arch, 12, grid);
  model::DllConfig c;
  c.dim = static_cast<int>(f[0]);
  c.rank = static_cast<int>(f[1]);
  c.cond_width = static_cast<int>(f[2]);
  c.cond_modes = static_cast<int>(f[3]);
  c.cond_layers = static_cast<int>(f[4]);
  c.cond_projection = static_cast<int>(f[5]);
  c.cond_features = static_cast<int>(f[6]);
  c.cond_dim = static_cast<int>(f[7]);
  c.hidden = static_cast<int>(f[8]);
  c.hidden_layers = static_cast<int>(f[9]);
  c.time_dim = static_cast<int>(f[10]);
  c.draws = static_cast<int>(f[11]);
  return c;
}

nn::FnoConfig fno_from_arch(const std::vector<std::int64_t>& arch, std::vector<int>& grid) {
  const auto f = split_arch(arch, 5, grid);
  nn::FnoConfig c;
  c.dim = static_cast<int>(f[0]);
  c.width = static_cast<int>(f[1]);
  c.modes = static_cast<int>(f[2]);
  c.layers = static_cast<int>(f[3]);
  c.projection = static_cast<int>(f[4]);
  return c;
}

void require_kind(const io::Checkpoint& c, io::ModelKind kind) {
  if (c.kind != kind) {
    throw UsageError("expected a " + io::model_kind_name(kind) + " checkpoint, got " + io::model_kind_name(c.kind));
  }
}

}  // namespace dllab::pipeline
