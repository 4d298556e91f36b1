#include "dllab/pipeline/generate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"
#include "dllab/darcy/darcy.hpp"
#include "dllab/spectral/burgers.hpp"
#include "dllab/spectral/initial_condition.hpp"
#include "dllab/spectral/kolmogorov.hpp"
#include "dllab/spectral/ks.hpp"

namespace dllab::pipeline {

namespace {

std::uint64_t key(Split split, std::size_t i, std::size_t j = 0) {
  return (static_cast<std::uint64_t>(split) << 56) ^ (static_cast<std::uint64_t>(i) << 20) ^ j;
}

std::size_t count_for(const RunConfig& cfg, Split split) {
  const long n = cfg.integer(split == Split::train ? "data.train" : "data.test");
  if (n < 1) throw ConfigError("data.train and data.test must be >= 1");
  return static_cast<std::size_t>(n);
}

std::size_t positive(const RunConfig& cfg, const std::string& key) {
  const long v = cfg.integer(key);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

spectral::InitialConditionSpec ic_spec(const RunConfig& cfg, const std::string& section) {
  spectral::InitialConditionSpec s;
  s.decay_exponent = cfg.real(section + ".ic_decay");
  s.amplitude = cfg.real(section + ".ic_amplitude");
  return s;
}

io::Dataset empty_dataset(const RunConfig& cfg, std::vector<std::size_t> grid, std::vector<double> lengths,
                          io::Layout layout, std::size_t count, std::size_t per_input) {
  io::Dataset d;
  d.system = cfg.system();
  d.layout = layout;
  d.grid = std::move(grid);
  d.lengths = std::move(lengths);
  d.config_digest = data_config_digest(cfg);
  d.count = count;
  d.per_input = per_input;
  d.inputs.assign(count * d.points(), 0.0);
  d.outputs.assign(count * per_input * d.points(), 0.0);
  return d;
}

void copy_into(std::span<double> dst, std::span<const double> src) { std::copy(src.begin(), src.end(), dst.begin()); }

io::Dataset burgers(const RunConfig& cfg, Split split) {
  spectral::BurgersConfig bc;
  bc.n = positive(cfg, "burgers.n");
  bc.nu = cfg.real("burgers.nu");
  bc.macro_dt = cfg.real("burgers.macro_dt");
  bc.substep = cfg.real("burgers.substep");
  bc.noise.sigma = cfg.real("burgers.sigma");
  bc.noise.weights = {cfg.real("burgers.w1"), cfg.real("burgers.w2"), cfg.real("burgers.w3")};
  spectral::BurgersSolver solver(bc);
  const auto ic = ic_spec(cfg, "burgers");
  const std::uint64_t seed = cfg.seed("run.seed");
  const std::size_t count = count_for(cfg, split);
  const std::size_t per = split == Split::train ? 1 : positive(cfg, "data.realizations");
  io::Dataset d = empty_dataset(cfg, {bc.n}, {2 * std::numbers::pi}, io::Layout::pairs, count, per);
  std::ostringstream meta;
  meta << "initial condition: zero mean, decay " << ic.decay_exponent << ", max-abs " << ic.amplitude
       << "; substeps per output " << solver.substeps_per_macro();
  d.meta = meta.str();
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, Stream::data, key(split, i));
    const Field a = spectral::sample_initial_condition(solver.grid(), ic, rng);
    copy_into(d.input(i), a.data());
    for (std::size_t j = 0; j < per; ++j) {
      Rng noise(seed, Stream::noise, key(split, i, j));
      copy_into(d.output(i, j), solver.step(a, noise).data());
    }
  }
  return d;
}

io::Dataset darcy(const RunConfig& cfg, Split split) {
  const std::size_t n = positive(cfg, "darcy.n");
  darcy::PermeabilitySpec ps;
  ps.high = cfg.real("darcy.high");
  ps.low = cfg.real("darcy.low");
  ps.decay = cfg.real("darcy.decay");
  darcy::SourceSpec ss;
  ss.lambda = cfg.real("darcy.lambda");
  ss.lognormal = {cfg.real("darcy.sigma_ln"), cfg.real("darcy.ell_ln"), cfg.real("darcy.jitter")};
  ss.gaussian = {cfg.real("darcy.sigma_gp"), cfg.real("darcy.ell_gp"), cfg.real("darcy.jitter")};
  darcy::CgConfig cg;
  cg.tolerance = cfg.real("darcy.cg_tol");
  cg.max_iterations = positive(cfg, "darcy.cg_max_iter");
  const std::uint64_t seed = cfg.seed("run.seed");
  const std::size_t count = count_for(cfg, split);
  const std::size_t per = split == Split::train ? 1 : positive(cfg, "data.realizations");
  io::Dataset d = empty_dataset(cfg, {n, n}, {1.0, 1.0}, io::Layout::pairs, count, per);
  std::size_t unconverged = 0, max_iter = 0;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, Stream::data, key(split, i));
    const Field a = darcy::sample_permeability(n, ps, rng);
    copy_into(d.input(i), a.data());
    for (std::size_t j = 0; j < per; ++j) {
      Rng noise(seed, Stream::noise, key(split, i, j));
      const Field f = darcy::sample_source(n, ss, noise);
      const auto res = darcy::solve_darcy(a, f, cg);
      unconverged += res.converged ? 0 : 1;
      max_iter = std::max(max_iter, res.iterations);
      copy_into(d.output(i, j), res.solution.data());
    }
  }
  std::ostringstream meta;
  meta << "permeability: DCT-II GRF decay " << ps.decay << ", positive -> " << ps.high << ", else " << ps.low
       << "; CG max iterations used " << max_iter << ", unconverged solves " << unconverged;
  d.meta = meta.str();
  return d;
}

template <class Solver>
io::Dataset trajectories(const RunConfig& cfg, Split split, Solver& solver, const std::string& section,
                         std::vector<double> lengths) {
  const auto ic = ic_spec(cfg, section);
  const std::uint64_t seed = cfg.seed("run.seed");
  const std::size_t count = count_for(cfg, split);
  const std::size_t steps = positive(cfg, split == Split::train ? "data.segment" : "data.horizon");
  const long warmup = cfg.integer("data.warmup");
  if (warmup < 0) throw ConfigError("data.warmup must be >= 0");
  io::Dataset d = empty_dataset(cfg, solver.grid().shape(), std::move(lengths), io::Layout::trajectories, count, steps);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, Stream::data, key(split, i));
    Field u = spectral::sample_initial_condition(solver.grid(), ic, rng);
    for (long w = 0; w < warmup; ++w) u = solver.step(u);
    copy_into(d.input(i), u.data());
    for (std::size_t t = 0; t < steps; ++t) {
      u = solver.step(u);
      copy_into(d.output(i, t), u.data());
    }
  }
  return d;
}

io::Dataset ks(const RunConfig& cfg, Split split) {
  spectral::KsConfig kc;
  kc.n = positive(cfg, "ks.n");
  kc.length = cfg.real("ks.length");
  kc.substep = cfg.real("ks.substep");
  kc.substeps = positive(cfg, "ks.substeps");
  kc.order = static_cast<int>(cfg.integer("ks.order"));
  spectral::KsSolver solver(kc);
  io::Dataset d = trajectories(cfg, split, solver, "ks", {kc.length});
  d.meta = "warmup " + cfg.str("data.warmup") + " steps; ETDRK" + std::to_string(kc.order);
  return d;
}

io::Dataset kolmogorov(const RunConfig& cfg, Split split) {
  spectral::KolmogorovConfig kc;
  kc.n = positive(cfg, "kolmogorov.n");
  kc.nu = cfg.real("kolmogorov.nu");
  kc.drag = cfg.real("kolmogorov.drag");
  kc.forcing_wavenumber = static_cast<int>(cfg.integer("kolmogorov.forcing_wavenumber"));
  kc.forcing_amplitude = cfg.real("kolmogorov.forcing_amplitude");
  kc.substep = cfg.real("kolmogorov.substep");
  kc.substeps = positive(cfg, "kolmogorov.substeps");
  spectral::KolmogorovSolver solver(kc);
  io::Dataset d = trajectories(cfg, split, solver, "kolmogorov", {2 * std::numbers::pi, 2 * std::numbers::pi});
  std::ostringstream meta;
  meta << "forcing " << kc.forcing_amplitude << " sin(" << kc.forcing_wavenumber << " y), drag " << kc.drag
       << ", warmup " << cfg.str("data.warmup") << " steps";
  d.meta = meta.str();
  return d;
}

// u = sum_{k<=terms} c_k(a) cos(kx) with c_k(a) = (2/n) sum_x a(x) sin(kx).
io::Dataset synthetic(const RunConfig& cfg, Split split) {
  const std::size_t n = positive(cfg, "synthetic.n");
  const std::size_t terms = positive(cfg, "synthetic.terms");
  spectral::PeriodicGrid grid{1, n, 2 * std::numbers::pi};
  const auto ic = ic_spec(cfg, "synthetic");
  const std::uint64_t seed = cfg.seed("run.seed");
  const std::size_t count = count_for(cfg, split);
  const std::size_t per = split == Split::train ? 1 : positive(cfg, "data.realizations");
  io::Dataset d = empty_dataset(cfg, {n}, {grid.length}, io::Layout::pairs, count, per);
  d.meta = "u = sum_{k<=" + std::to_string(terms) + "} c_k(a) cos(kx), c_k = (2/n) sum a sin(kx)";
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, Stream::data, key(split, i));
    const Field a = spectral::sample_initial_condition(grid, ic, rng);
    copy_into(d.input(i), a.data());
    std::vector<double> u(n, 0.0);
    for (std::size_t k = 1; k <= terms; ++k) {
      double c = 0.0;
      for (std::size_t p = 0; p < n; ++p) c += a[p] * std::sin(static_cast<double>(k) * grid.coordinate(p));
      c *= 2.0 / static_cast<double>(n);
      for (std::size_t p = 0; p < n; ++p) u[p] += c * std::cos(static_cast<double>(k) * grid.coordinate(p));
    }
    for (std::size_t j = 0; j < per; ++j) copy_into(d.output(i, j), u);
  }
  return d;
}

}  // namespace

std::uint64_t data_config_digest(const RunConfig& cfg) {
  return Digest()
      .update(cfg.str("run.system"))
      .update_value(cfg.seed("run.seed"))
      .update(cfg.canonical(cfg.data_sections()))
      .value();
}

io::Dataset generate_split(const RunConfig& cfg, Split split) {
  switch (cfg.system()) {
    case io::SystemId::sburgers: return burgers(cfg, split);
    case io::SystemId::sdarcy: return darcy(cfg, split);
    case io::SystemId::ks: return ks(cfg, split);
    case io::SystemId::kolmogorov: return kolmogorov(cfg, split);
    case io::SystemId::synthetic: return synthetic(cfg, split);
    case io::SystemId::ensemble: break;
  }
  throw ConfigError("system '" + cfg.str("run.system") + "' cannot be generated");
}

GeneratedData generate(const RunConfig& cfg) {
  GeneratedData g{generate_split(cfg, Split::train), generate_split(cfg, Split::test)};
  g.train.norm = io::compute_normalization(g.train);
  g.test.norm = g.train.norm;
  return g;
}

std::string describe(const io::Dataset& d) {
  const std::size_t p = d.points();
  double min_sd = 1e300, max_sd = 0.0, mean_sd = 0.0;
  if (d.per_input > 1) {
    for (std::size_t i = 0; i < d.count; ++i) {
      for (std::size_t x = 0; x < p; ++x) {
        double s = 0.0, sq = 0.0;
        for (std::size_t j = 0; j < d.per_input; ++j) s += d.output(i, j)[x];
        const double mu = s / static_cast<double>(d.per_input);
        for (std::size_t j = 0; j < d.per_input; ++j) sq += (d.output(i, j)[x] - mu) * (d.output(i, j)[x] - mu);
        const double sd = std::sqrt(sq / static_cast<double>(d.per_input));
        min_sd = std::min(min_sd, sd);
        max_sd = std::max(max_sd, sd);
        mean_sd += sd / static_cast<double>(p * d.count);
      }
    }
  }
  std::ostringstream out;
  out << io::system_name(d.system) << ' ' << (d.layout == io::Layout::pairs ? "pairs" : "trajectories") << " grid ";
  for (std::size_t k = 0; k < d.grid.size(); ++k) out << (k ? "x" : "") << d.grid[k];
  out << " inputs " << d.count << " outputs/input " << d.per_input;
  if (d.per_input > 1) {
    out << (d.layout == io::Layout::pairs ? " realization" : " along-trajectory") << " std min " << min_sd
        << " mean " << mean_sd << " max " << max_sd;
  }
  out << " digest " << to_hex(io::dataset_digest(d));
  return out.str();
}

}  // namespace dllab::pipeline
