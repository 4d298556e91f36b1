#include "oracle_suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "dllab/darcy/darcy.hpp"
#include "dllab/kl/kl.hpp"
#include "dllab/metrics/metrics.hpp"
#include "dllab/model/dll.hpp"
#include "dllab/model/encoder.hpp"
#include "dllab/model/flow.hpp"
#include "dllab/spectral/etdrk.hpp"
#include "dllab/spectral/initial_condition.hpp"
#include "dllab/spectral/kolmogorov.hpp"
#include "dllab/spectral/ks.hpp"
#include "gradcheck.hpp"

namespace dllab::oracles {

namespace {

constexpr double kPi = std::numbers::pi;
using testing::fill_normal;
using testing::gradient_error;
using Var = diff::Tape<double>::Var;
using diff::Matrix;
using diff::ParameterSet;
using diff::Tape;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

model::FieldMatrix random_fields(int rows, int points, Rng& rng) {
  model::FieldMatrix m(rows, points);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

model::EncoderConfig tiny_encoder(int dim) {
  model::EncoderConfig c;
  c.dim = dim;
  c.rank = 3;
  c.width = 4;
  c.modes = 3;
  c.layers = 2;
  c.projection = 5;
  c.nf_features = 4;
  return c;
}

model::DllConfig tiny_dll() {
  model::DllConfig c;
  c.dim = 1;
  c.rank = 3;
  c.cond_width = 4;
  c.cond_modes = 3;
  c.cond_layers = 1;
  c.cond_projection = 5;
  c.cond_features = 3;
  c.cond_dim = 3;
  c.hidden = 6;
  c.hidden_layers = 2;
  c.time_dim = 4;
  c.draws = 2;
  return c;
}

/// Worst relative gradient error over the primitive ops and the three model
/// losses for one seed.
double gradient_errors(std::uint64_t seed) {
  double worst = 0.0;
  Rng rng(seed, Stream::init);
  {
    ParameterSet<double> ps;
    auto& w1 = ps.add("w1", 5, 7);
    auto& b1 = ps.add("b1", 1, 7);
    auto& w2 = ps.add("w2", 7, 3);
    for (auto* p : {&w1, &b1, &w2}) fill_normal(p->value, rng, 0.5);
    Matrix<double> x(4, 5), target(4, 3);
    fill_normal(x, rng);
    fill_normal(target, rng);
    worst = std::max(worst, gradient_error(ps, {x}, [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
      const Var h = t.gelu(t.affine(in[0], *p.find("w1"), p.find("b1")));
      return t.squared_error(t.affine(h, *p.find("w2"), nullptr), target, 0.25);
    }));
  }
  for (const std::vector<int>& grid : {std::vector<int>{16}, std::vector<int>{8, 8}}) {
    diff::SpectralGeometry<double> geo(grid, 3);
    ParameterSet<double> ps;
    auto& wr = ps.add("wr", geo.mode_count() * 2, 2);
    auto& wi = ps.add("wi", geo.mode_count() * 2, 2);
    fill_normal(wr.value, rng, 0.3);
    fill_normal(wi.value, rng, 0.3);
    Matrix<double> x(2 * geo.points(), 2), target(2 * geo.points(), 2);
    fill_normal(x, rng);
    fill_normal(target, rng);
    worst = std::max(worst, gradient_error(ps, {x}, [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
      return t.squared_error(t.spectral_conv(in[0], geo, 2, *p.find("wr"), *p.find("wi")), target, 0.5);
    }));
  }
  {
    const int batch = 2, points = 5, r = 3;
    ParameterSet<double> ps;
    auto& w = ps.add("w", 4, r);
    auto& wv = ps.add("wv", r + 2, 2);
    fill_normal(w.value, rng, 0.5);
    fill_normal(wv.value, rng, 0.5);
    Matrix<double> feats(batch * points, 4), basis(batch * points, r), extra(batch * 2, 2), t1(batch * points, 1),
        t2(batch * 2, 2);
    for (auto* m : {&feats, &basis, &extra, &t1, &t2}) fill_normal(*m, rng);
    worst = std::max(worst, gradient_error(ps, {feats, basis, extra},
                                           [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
      const Var coeffs = t.affine(t.mean_pool(t.gelu(in[0]), batch), *p.find("w"), nullptr);
      const Var rec = t.combine(coeffs, in[1], batch);
      const Var v = t.affine(t.concat(t.repeat_rows(coeffs, 2), in[2]), *p.find("wv"), nullptr);
      return t.add(t.squared_error(rec, t1, 1.0 / points), t.squared_error(t.add(v, in[2]), t2, 0.5));
    }));
  }
  Rng data(seed, Stream::data);
  {
    const std::vector<int> grid{10};
    model::OperatorEncoder<double> enc(tiny_encoder(1), grid);
    enc.init(rng);
    const auto a = random_fields(2, 10, data), u = random_fields(2, 10, data);
    const auto am = model::gather_fields<double>(a, {0, 1}), um = model::gather_fields<double>(u, {0, 1});
    worst = std::max(worst, gradient_error(enc.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
      return enc.loss(t, am, um, 2, grid);
    }));
  }
  {
    const std::vector<int> grid{10};
    model::DllHead<double> head(tiny_dll(), grid);
    head.init(rng);
    const auto a = random_fields(2, 10, data);
    const Eigen::MatrixXd z = random_fields(2, 3, data);
    const auto am = model::gather_fields<double>(a, {0, 1});
    worst = std::max(worst, gradient_error(head.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
      Rng noise(seed, Stream::noise);
      return head.loss(t, am, z, 2, noise, grid);
    }));
  }
  {
    const std::vector<int> grid{4, 4};
    nn::FnoConfig fc;
    fc.dim = 2;
    fc.width = 3;
    fc.modes = 2;
    fc.layers = 2;
    fc.projection = 4;
    model::FnoBaseline<double> fno(fc, grid);
    fno.init(rng);
    const auto a = random_fields(2, 16, data), u = random_fields(2, 16, data);
    const auto am = model::gather_fields<double>(a, {0, 1}), um = model::gather_fields<double>(u, {0, 1});
    worst = std::max(worst, gradient_error(fno.params(), {}, [&](Tape<double>& t, ParameterSet<double>&, auto&) {
      return fno.loss(t, am, um, 2, grid);
    }));
  }
  return worst;
}

// u' = lambda u + cos(t), u(0) = 1.
double integrate_forced(int order, double h) {
  std::vector<spectral::Complex> symbol{-2.0};
  spectral::EtdrkStepper stepper(spectral::build_etdrk_table(symbol, h, order),
                                 [](std::span<const spectral::Complex>, double t, std::span<spectral::Complex> out) {
                                   out[0] = std::cos(t);
                                 });
  std::vector<spectral::Complex> u{1.0};
  const auto steps = std::llround(4.0 / h);
  for (long long s = 0; s < steps; ++s) stepper.step(u, static_cast<double>(s) * h);
  return u[0].real();
}

double convergence_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(hs.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double etdrk_slope(int order) {
  const std::vector<double> hs{1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
  const double reference = integrate_forced(order, hs.back() / 64.0);
  std::vector<double> errs;
  for (double h : hs) errs.push_back(std::abs(integrate_forced(order, h) - reference));
  return convergence_slope(hs, errs);
}

double manufactured_error(std::size_t n) {
  const double h = darcy::spacing(n);
  Field a({n, n}, 1.0), f({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) f(i, j) = 2 * kPi * kPi * std::sin(kPi * i * h) * std::sin(kPi * j * h);
  }
  darcy::CgConfig cfg;
  cfg.tolerance = 1e-10;
  const auto res = darcy::solve_darcy(a, f, cfg);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(res.solution(i, j) - std::sin(kPi * i * h) * std::sin(kPi * j * h)));
  }
  return err;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Naive references for the metric suite.
double naive_mean_dist(const metrics::Cloud& a, const metrics::Cloud& b) {
  double acc = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double s = 0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
      acc += std::sqrt(s);
    }
  }
  return acc / static_cast<double>(a.rows() * b.rows());
}

double naive_ed(const metrics::Cloud& x, const metrics::Cloud& y) {
  return 2 * naive_mean_dist(x, y) - naive_mean_dist(x, x) - naive_mean_dist(y, y);
}

double naive_crps(const metrics::Cloud& x, const Eigen::RowVectorXd& y) {
  double total = 0;
  const double k = static_cast<double>(x.rows());
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    double a = 0, b = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      a += std::abs(x(i, p) - y(p));
      for (Eigen::Index j = 0; j < x.rows(); ++j) b += std::abs(x(i, p) - x(j, p));
    }
    total += a / k - 0.5 * b / (k * k);
  }
  return total / static_cast<double>(x.cols());
}

double order_statistic(const std::vector<double>& v, std::size_t rank) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t below = 0;
    for (std::size_t j = 0; j < v.size(); ++j) below += (v[j] < v[i] || (v[j] == v[i] && j < i)) ? 1 : 0;
    if (below == rank) return v[i];
  }
  return 0.0;
}

double naive_swd(const metrics::Cloud& x, const metrics::Cloud& y, int directions, Rng rng) {
  double acc = 0;
  for (int d = 0; d < directions; ++d) {
    std::vector<double> dir(static_cast<std::size_t>(x.cols()));
    double norm = 0;
    for (auto& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    std::vector<double> px(static_cast<std::size_t>(x.rows())), py(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        px[static_cast<std::size_t>(i)] += x(i, c) * dir[static_cast<std::size_t>(c)] / norm;
        py[static_cast<std::size_t>(i)] += y(i, c) * dir[static_cast<std::size_t>(c)] / norm;
      }
    }
    double w = 0;
    for (std::size_t r = 0; r < px.size(); ++r) w += std::abs(order_statistic(px, r) - order_statistic(py, r));
    acc += w / static_cast<double>(px.size());
  }
  return acc / directions;
}

std::pair<std::vector<double>, std::vector<double>> naive_moments(const metrics::Cloud& x) {
  std::vector<double> mean(static_cast<std::size_t>(x.cols())), sd(mean.size());
  for (Eigen::Index p = 0; p < x.cols(); ++p) {
    double s = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) s += x(i, p);
    const double mu = s / static_cast<double>(x.rows());
    double v = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) v += (x(i, p) - mu) * (x(i, p) - mu);
    mean[static_cast<std::size_t>(p)] = mu;
    sd[static_cast<std::size_t>(p)] = std::sqrt(v / static_cast<double>(x.rows()));
  }
  return {mean, sd};
}

double naive_nrmse(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  const double n = static_cast<double>(a.size());
  return std::sqrt(num / n) / (std::sqrt(den / n) + metrics::kNrmseGuard);
}

double naive_ssr(const metrics::Cloud& x, const Eigen::RowVectorXd& y) {
  const auto [mean, sd] = naive_moments(x);
  double var = 0, se = 0;
  for (std::size_t p = 0; p < mean.size(); ++p) {
    var += sd[p] * sd[p];
    se += (mean[p] - y(static_cast<Eigen::Index>(p))) * (mean[p] - y(static_cast<Eigen::Index>(p)));
  }
  const double n = static_cast<double>(mean.size());
  return std::sqrt(var / n) / (std::sqrt(se / n) + 1e-8);
}

metrics::Cloud gaussian_cloud(int k, int d, double shift, Rng& rng) {
  metrics::Cloud c(k, d);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) c(i, j) = rng.normal() + (j == 0 ? shift : 0.0);
  }
  return c;
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double folded_mean(double m, double s) {
  return s * std::sqrt(2.0 / kPi) * std::exp(-m * m / (2 * s * s)) + m * (1 - 2 * phi_cdf(-m / s));
}

}  // namespace

SuiteResult timed(const std::string& name, double limit_seconds, const std::function<void(SuiteResult&)>& body) {
  SuiteResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > limit_seconds) {
    r.pass = false;
    r.detail += fmt("; over the %.0f s budget", limit_seconds);
  }
  return r;
}

std::string status_line(const SuiteResult& r) {
  std::ostringstream os;
  os << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  [" << r.detail << "; " << fmt("%.1f s", r.seconds) << "]";
  return os.str();
}

SuiteResult gradient_suite() {
  return timed("gradient correctness", 60, [](SuiteResult& r) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) worst = std::max(worst, gradient_errors(seed));
    r.pass = worst < 1e-6;
    r.detail = fmt("max relative FD error %.2e over 20 seeds (< 1e-6)", worst);
  });
}

SuiteResult solver_order_suite() {
  return timed("solver orders", 120, [](SuiteResult& r) {
    const double s2 = etdrk_slope(2), s4 = etdrk_slope(4);
    // heat propagator on a 1D grid
    const double nu = 0.1, h = 0.05;
    double heat = 0.0;
    for (int order : {2, 4}) {
      std::vector<spectral::Complex> symbol(17);
      for (std::size_t k = 0; k < symbol.size(); ++k) symbol[k] = -nu * static_cast<double>(k * k);
      spectral::EtdrkStepper st(spectral::build_etdrk_table(symbol, h, order),
                                [](std::span<const spectral::Complex>, double, std::span<spectral::Complex> out) {
                                  std::fill(out.begin(), out.end(), spectral::Complex{});
                                });
      std::vector<spectral::Complex> u(symbol.size());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = spectral::Complex(1.0 + k, 0.5 * k);
      const auto u0 = u;
      st.step(u, 0.0);
      for (std::size_t k = 0; k < u.size(); ++k) {
        heat = std::max(heat, std::abs(u[k] - u0[k] * std::exp(-nu * static_cast<double>(k * k) * h)) / std::abs(u0[k]));
      }
    }
    // KS mean drift per substep
    spectral::KsConfig kc;
    kc.n = 128;
    kc.substeps = 1;
    spectral::KsSolver ks(kc);
    Rng rng(3, Stream::data);
    Field u = spectral::sample_initial_condition(ks.grid(), {2.0, 1.0, 0.3}, rng);
    double drift = 0.0;
    auto mean = [](const Field& f) {
      double s = 0;
      for (double x : f.values()) s += x;
      return s / static_cast<double>(f.size());
    };
    for (int s = 0; s < 200; ++s) {
      const double before = mean(u);
      u = ks.step(u);
      drift = std::max(drift, std::abs(mean(u) - before));
    }
    // Kolmogorov shear mode decays at exp(-(nu k^2 + drag) t)
    spectral::KolmogorovConfig qc;
    qc.n = 32;
    qc.forcing_amplitude = 0.0;
    spectral::KolmogorovSolver kol(qc);
    Field w(kol.grid().shape());
    for (std::size_t i = 0; i < 32; ++i) {
      for (std::size_t j = 0; j < 32; ++j) w(i, j) = 0.5 * std::sin(4 * kol.grid().coordinate(j));
    }
    const Field w0 = w;
    double shear = 0.0;
    const double rate = qc.nu * 16 + qc.drag, dt = qc.substep * static_cast<double>(qc.substeps);
    for (int s = 1; s <= 4; ++s) {
      w = kol.step(w);
      for (std::size_t i = 0; i < w.size(); ++i) shear = std::max(shear, std::abs(w[i] - std::exp(-rate * dt * s) * w0[i]));
    }
    r.pass = s2 > 1.7 && s2 < 2.3 && s4 > 3.7 && s4 < 4.3 && heat <= 1e-12 && drift <= 1e-10 && shear <= 1e-8;
    r.detail = fmt("ETDRK2 slope %.3f, ETDRK4 slope %.3f, heat error %.1e, KS mean drift %.1e", s2, s4, heat, drift) +
               fmt(", shear error %.1e", shear);
  });
}

SuiteResult darcy_suite() {
  return timed("darcy oracle", 60, [](SuiteResult& r) {
    const std::size_t n = 16;
    Rng rng(4, Stream::data);
    const Field a = darcy::sample_permeability(n, {}, rng);
    Field f({n, n});
    for (auto& x : f.values()) x = rng.normal();
    const darcy::DarcyOperator op(a);
    const Eigen::MatrixXd dense = op.dense();
    const auto rhs_v = op.interior(f);
    const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_v.data(), static_cast<Eigen::Index>(rhs_v.size()));
    const Eigen::VectorXd direct = dense.llt().solve(rhs);
    darcy::CgConfig cfg;
    cfg.tolerance = 1e-10;
    const auto cg = darcy::solve_darcy(a, f, cfg);
    const auto cg_v = op.interior(cg.solution);
    const Eigen::VectorXd cgx = Eigen::Map<const Eigen::VectorXd>(cg_v.data(), static_cast<Eigen::Index>(cg_v.size()));
    const double rel = (cgx - direct).norm() / direct.norm();
    const double asym = (dense - dense.transpose()).cwiseAbs().maxCoeff();
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff();
    std::vector<double> hs, errs;
    for (std::size_t m : {17, 33, 65}) {
      hs.push_back(darcy::spacing(m));
      errs.push_back(manufactured_error(m));
    }
    const double slope = convergence_slope(hs, errs);
    Field pos({n, n});
    for (auto& x : pos.values()) x = std::abs(rng.normal());
    const auto sol = darcy::solve_darcy(a, pos, cfg);
    double minimum = 0.0;
    for (double x : sol.solution.values()) minimum = std::min(minimum, x);
    r.pass = rel < 1e-5 && std::abs(slope - 2.0) <= 0.2 && asym < 1e-12 && min_eig > 0.0 && minimum >= -1e-12;
    r.detail = fmt("CG vs dense %.1e, manufactured slope %.3f, min eigenvalue %.3g, min solution %.1e", rel, slope,
                   min_eig, minimum);
  });
}

SuiteResult kl_subspace_suite() {
  return timed("KL optimality (subspace search)", 120, [](SuiteResult& r) {
    const Eigen::Index p = 6, m = 300;
    double margin = 1e300;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(100 + seed, Stream::data);
      const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian_matrix(p, p, rng)).householderQ();
      Eigen::MatrixXd s(m, p);
      for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd u = Eigen::VectorXd::Constant(p, 0.5);
        for (Eigen::Index k = 0; k < p; ++k) u += std::pow(0.6, static_cast<double>(k)) * rng.normal() * q.col(k);
        s.row(i) = u.transpose();
      }
      const auto kl = kl::empirical_kl(s, 1.0);
      for (Eigen::Index rank = 1; rank < p; ++rank) {
        const double best = kl::optimal_rank_r_error(kl, static_cast<std::size_t>(rank));
        for (int t = 0; t < 500; ++t) {
          // random subspaces plus perturbations of the optimum
          Eigen::MatrixXd sub = gaussian_matrix(p, rank, rng);
          if (t % 2 == 1) sub = kl.fields.leftCols(rank) + 0.05 * sub;
          margin = std::min(margin, kl::centered_residual(s, sub, 1.0) - best);
        }
      }
    }
    r.pass = margin >= -1e-9;
    r.detail = fmt("min margin %.2e over 500 competitors x 10 seeds x ranks 1-5 (>= -1e-9)", margin);
  });
}

SuiteResult projection_suite() {
  return timed("projection oracle", 60, [](SuiteResult& r) {
    double margin = 1e300;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const int dim = seed % 2 == 0 ? 1 : 2;
      const std::vector<int> grid = dim == 1 ? std::vector<int>{16} : std::vector<int>{8, 8};
      const int points = dim == 1 ? 16 : 64;
      model::OperatorEncoder<double> enc(tiny_encoder(dim), grid);
      Rng init(seed, Stream::init);
      enc.init(init);
      Rng data(seed, Stream::data);
      const auto a = random_fields(4, points, data), u = random_fields(4, points, data);
      margin = std::min(margin, enc.evaluate(a, u, grid, false) - enc.evaluate(a, u, grid, true));
    }
    r.pass = margin >= -1e-8;
    r.detail = fmt("min L_OE(NF) - L_OE(Gram) %.2e over 20 encoders (>= -1e-8)", margin);
  });
}

SuiteResult flow_suite() {
  return timed("flow correctness", 120, [](SuiteResult& r) {
    Eigen::VectorXd x(3), eps(3);
    x << 2, -1, 0.5;
    eps << 0.3, 0.7, -2;
    const bool endpoints = model::noise_sample(x, eps, 0.0) == x && model::noise_sample(x, eps, 1.0) == eps;
    Eigen::MatrixXd xs(1, 4);
    xs << 1, -2, 0.5, 3;
    Rng rng(7, Stream::noise);
    const double exact = model::velocity_loss(xs, 500, rng,
                                              [&](const Eigen::MatrixXd&, const std::vector<double>&, const Eigen::MatrixXd& e) {
                                                return Eigen::MatrixXd(e.rowwise() - xs.row(0));
                                              });
    const int n = 100000;
    const double zero = model::velocity_loss(xs, n, rng, [](const Eigen::MatrixXd& xt, const std::vector<double>&, const Eigen::MatrixXd&) {
      return Eigen::MatrixXd::Zero(xt.rows(), xt.cols());
    });
    const double expect = 4 + xs.squaredNorm();
    const double se = std::sqrt((8 + 4 * xs.squaredNorm()) / n);
    const model::GaussianFlow target{3.0, 0.5};
    Eigen::MatrixXd x1(10000, 1);
    for (Eigen::Index i = 0; i < x1.rows(); ++i) x1(i, 0) = rng.normal();
    const Eigen::MatrixXd out = model::euler_sample(x1, 100, [&](const Eigen::MatrixXd& xt, double tau) {
      Eigen::MatrixXd v(xt.rows(), 1);
      for (Eigen::Index i = 0; i < xt.rows(); ++i) v(i, 0) = target.velocity(xt(i, 0), tau);
      return v;
    });
    const double mu = out.mean(), sd = std::sqrt((out.array() - mu).square().mean());
    r.pass = endpoints && exact == 0.0 && std::abs(zero - expect) <= 3 * se && std::abs(mu - 3.0) <= 0.05 &&
             std::abs(sd - 0.5) <= 0.05;
    r.detail = fmt("oracle loss %.1e, zero-predictor %.4f vs %.4f (3 SE %.4f)", exact, zero, expect, 3 * se) +
               fmt(", Gaussian mean %.4f sd %.4f", mu, sd);
  });
}

SuiteResult stability_suite() {
  return timed("Wasserstein stability probe", 120, [](SuiteResult& r) {
    const auto pts = model::wasserstein_stability_probe({3.0, 0.5}, {0.0, 0.05, 0.1, 0.2}, 10000, 100, 11);
    bool monotone = true;
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      monotone = monotone && pts[i].w2 >= pts[i - 1].w2;
      const double ratio = pts[i].w2 / std::sqrt(pts[i].velocity_loss);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    r.pass = pts.size() == 4 && monotone && hi / lo < 10.0;
    r.detail = fmt("W2 %.4f %.4f %.4f %.4f", pts[0].w2, pts[1].w2, pts[2].w2, pts[3].w2) +
               fmt(", max/min W2/sqrt(L_V) %.3f (< 10)", hi / lo);
  });
}

SuiteResult metrics_suite() {
  return timed("metrics oracles", 60, [](SuiteResult& r) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(20 + seed, Stream::data);
      const int k = 8 + static_cast<int>(rng.below(57)), d = 1 + static_cast<int>(rng.below(32));
      const auto x = gaussian_cloud(k, d, 0.3, rng), y = gaussian_cloud(k, d, -0.1, rng);
      Rng proj(seed, Stream::projections);
      const auto [mx, sx] = naive_moments(x);
      const auto [my, sy] = naive_moments(y);
      for (double e : {metrics::energy_distance(x, y) - naive_ed(x, y),
                       metrics::sliced_wasserstein(x, y, 16, proj) - naive_swd(x, y, 16, Rng(seed, Stream::projections)),
                       metrics::crps(x, y.row(0)) - naive_crps(x, y.row(0)),
                       metrics::ssr(x, y.row(0)) - naive_ssr(x, y.row(0)),
                       metrics::nrmse_mean(x, y) - naive_nrmse(mx, my), metrics::nrmse_spread(x, y) - naive_nrmse(sx, sy)}) {
        worst = std::max(worst, std::abs(e));
      }
    }
    Rng rng(2, Stream::data);
    const auto g0 = gaussian_cloud(2000, 1, 0.0, rng), g1 = gaussian_cloud(2000, 1, 1.0, rng);
    const double ed_exact = 2 * folded_mean(1.0, std::sqrt(2.0)) - 2 * folded_mean(0.0, std::sqrt(2.0));
    const double ed_rel = std::abs(metrics::energy_distance(g0, g1) - ed_exact) / ed_exact;

    const auto p0 = gaussian_cloud(4000, 2, 0.0, rng), p1 = gaussian_cloud(4000, 2, 1.0, rng);
    double swd_ref = 0.0;
    const int angles = 4000;
    for (int i = 0; i < angles; ++i) {
      const double t = kPi * (i + 0.5) / angles;
      const Eigen::Vector2d dir(std::cos(t), std::sin(t));
      const Eigen::VectorXd a = p0 * dir, b = p1 * dir;
      swd_ref += metrics::wasserstein1_sorted({a.data(), a.data() + a.size()}, {b.data(), b.data() + b.size()}) / angles;
    }
    Rng proj(6, Stream::projections);
    const double swd_rel = std::abs(metrics::sliced_wasserstein(p0, p1, 1024, proj) - swd_ref) / swd_ref;

    const int m = 200000;
    const double lo = -12, hi = 12, h = (hi - lo) / m;
    double crps_exact = 0;
    for (int i = 0; i <= m; ++i) {
      const double t = lo + i * h;
      const double f = phi_cdf(t) - (t >= 0 ? 1.0 : 0.0);
      crps_exact += (i == 0 || i == m ? 0.5 : 1.0) * f * f * h;
    }
    const auto g = gaussian_cloud(10000, 1, 0.0, rng);
    const double crps_rel = std::abs(metrics::crps(g, Eigen::RowVectorXd::Zero(1)) - crps_exact) / crps_exact;

    const auto c = gaussian_cloud(48, 12, 0.2, rng);
    Rng zp(1, Stream::projections);
    const bool zeros = metrics::energy_distance(c, c) == 0.0 && metrics::sliced_wasserstein(c, c, 64, zp) == 0.0 &&
                       metrics::nrmse_mean(c, c) == 0.0 && metrics::nrmse_spread(c, c) == 0.0 &&
                       metrics::crps(c.row(0).replicate(5, 1), c.row(0)) == 0.0;
    r.pass = worst <= 1e-10 && ed_rel < 0.05 && swd_rel < 0.05 && crps_rel < 0.02 && zeros;
    r.detail = fmt("naive-reference max diff %.1e, ED %.2f%%, SWD %.2f%%, CRPS %.2f%% off", worst, 100 * ed_rel,
                   100 * swd_rel, 100 * crps_rel) +
               (zeros ? ", identical-cloud zeros exact" : ", identical-cloud zeros NOT exact");
  });
}

std::vector<SuiteResult> run_property_suites(std::ostream& out) {
  std::vector<SuiteResult> results;
  for (auto* suite : {gradient_suite, solver_order_suite, darcy_suite, kl_subspace_suite, projection_suite, flow_suite,
                      stability_suite, metrics_suite}) {
    results.push_back(suite());
    out << status_line(results.back()) << std::endl;
  }
  return results;
}

}  // namespace dllab::oracles
