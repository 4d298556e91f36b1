#include <gtest/gtest.h>

#include "dllab/diff/fft.hpp"
#include "dllab/diff/tape.hpp"
#include "gradcheck.hpp"

using namespace dllab;
using namespace dllab::diff;
using dllab::testing::fill_normal;
using dllab::testing::gradient_error;
using Var = Tape<double>::Var;

TEST(Autodiff, SumOfSquaresGradient) {
  Tape<double> tape;
  Matrix<double> x(1, 3);
  x << 1, 2, 3;
  const Var v = tape.variable(x);
  const Var loss = tape.squared_error(v, Matrix<double>::Zero(1, 3), 1.0);
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(tape.value(loss)(0, 0), 14.0);
  EXPECT_DOUBLE_EQ(tape.grad(v)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(tape.grad(v)(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(tape.grad(v)(0, 2), 6.0);
}

TEST(Autodiff, BackwardThroughForeignValueIsUsageError) {
  Tape<double> a, b;
  const Var x = a.variable(Matrix<double>::Ones(1, 1));
  EXPECT_THROW(b.backward(x), UsageError);
  Var bogus;
  EXPECT_THROW(a.backward(bogus), UsageError);
  const Var c = a.constant(Matrix<double>::Ones(1, 1));
  EXPECT_THROW(a.backward(c), UsageError);
}

TEST(Autodiff, TwoLayerMlpMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, Stream::init);
    ParameterSet<double> ps;
    auto& w1 = ps.add("w1", 5, 8);
    auto& b1 = ps.add("b1", 1, 8);
    auto& w2 = ps.add("w2", 8, 3);
    auto& b2 = ps.add("b2", 1, 3);
    for (auto* p : {&w1, &b1, &w2, &b2}) fill_normal(p->value, rng, 0.5);
    Matrix<double> x(4, 5), target(4, 3);
    fill_normal(x, rng);
    fill_normal(target, rng);
    const double err = gradient_error(ps, {x}, [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
      Var h = t.gelu(t.affine(in[0], *p.find("w1"), p.find("b1")));
      Var y = t.affine(h, *p.find("w2"), p.find("b2"));
      return t.squared_error(y, target, 0.25);
    });
    EXPECT_LT(err, 1e-6) << "seed " << seed;
  }
}

namespace {

double spectral_gradient_error(std::vector<int> grid, int modes, int batch, int cin, int cout, std::uint64_t seed) {
  Rng rng(seed, Stream::init);
  SpectralGeometry<double> geo(grid, modes);
  ParameterSet<double> ps;
  auto& wr = ps.add("wr", geo.mode_count() * cin, cout);
  auto& wi = ps.add("wi", geo.mode_count() * cin, cout);
  fill_normal(wr.value, rng, 0.3);
  fill_normal(wi.value, rng, 0.3);
  Matrix<double> x(batch * geo.points(), cin), target(batch * geo.points(), cout);
  fill_normal(x, rng);
  fill_normal(target, rng);
  return gradient_error(ps, {x}, [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
    Var y = t.spectral_conv(in[0], geo, batch, *p.find("wr"), *p.find("wi"));
    return t.squared_error(y, target, 0.5);
  });
}

}  // namespace

TEST(Autodiff, SpectralLayer1dMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_LT(spectral_gradient_error({16}, 5, 2, 3, 2, seed), 1e-6) << "seed " << seed;
  }
}

TEST(Autodiff, SpectralLayer2dMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_LT(spectral_gradient_error({8, 8}, 3, 2, 2, 2, seed), 1e-6) << "seed " << seed;
  }
}

TEST(Autodiff, PoolConcatRepeatCombineMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, Stream::init);
    const int batch = 2, points = 6, r = 3;
    ParameterSet<double> ps;
    auto& w = ps.add("w", 4, r);
    auto& b = ps.add("b", 1, r);
    auto& wv = ps.add("wv", r + 2, 2);
    fill_normal(w.value, rng, 0.5);
    fill_normal(b.value, rng, 0.5);
    fill_normal(wv.value, rng, 0.5);
    Matrix<double> feats(batch * points, 4), basis(batch * points, r), extra(batch * 2, 2);
    fill_normal(feats, rng);
    fill_normal(basis, rng);
    fill_normal(extra, rng);
    Matrix<double> target(batch * points, 1), target2(batch * 2, 2);
    fill_normal(target, rng);
    fill_normal(target2, rng);
    const double err = gradient_error(ps, {feats, basis, extra},
                                      [&](Tape<double>& t, ParameterSet<double>& p, std::vector<Var>& in) {
      Var pooled = t.mean_pool(t.gelu(in[0]), batch);
      Var coeffs = t.affine(pooled, *p.find("w"), p.find("b"));
      Var recon = t.combine(coeffs, in[1], batch);
      Var rep = t.repeat_rows(coeffs, 2);
      Var joined = t.concat(rep, in[2]);
      Var v = t.affine(joined, *p.find("wv"), nullptr);
      Var l1 = t.squared_error(recon, target, 1.0 / points);
      Var l2 = t.squared_error(t.add(v, in[2]), target2, 0.5);
      Tape<double>::Var both = t.add(l1, l2);
      return both;
    });
    EXPECT_LT(err, 1e-6) << "seed " << seed;
  }
}

TEST(Autodiff, SpectralAnalysisAgreesWithFft) {
  // The truncated analysis used by spectral layers equals the FFT restricted
  // to the retained modes.
  Rng rng(11, Stream::data);
  Tensor field({8, 16});
  for (auto& v : field.values()) v = rng.normal();
  SpectralGeometry<double> geo({8, 16}, 3);
  Matrix<double> x(128, 1);
  for (int i = 0; i < 128; ++i) x(i, 0) = field[i];
  Matrix<double> hr(geo.mode_count(), 1), hi(geo.mode_count(), 1);
  geo.analyze(x, 0, 1, hr, hi);
  const auto spec = fft_forward(field);
  const int kxn = 5;
  for (int ky = 0; ky < 3; ++ky) {
    for (int q = 0; q < kxn; ++q) {
      const int kx = q < 3 ? q : q - kxn;
      const Complex ref = spec.data[((kx + 8) % 8) * 16 + ky];
      EXPECT_NEAR(hr(ky * kxn + q, 0), ref.real(), 1e-12);
      EXPECT_NEAR(hi(ky * kxn + q, 0), ref.imag(), 1e-12);
    }
  }
}

TEST(Autodiff, SynthesisInvertsAnalysisOnBandLimitedField) {
  // A real field whose spectrum lives inside the retained set is recovered.
  SpectralGeometry<double> geo({16}, 4);
  Matrix<double> x(16, 1);
  for (int j = 0; j < 16; ++j) {
    const double t = 2.0 * std::numbers::pi * j / 16.0;
    x(j, 0) = 0.5 + std::cos(t) - 0.25 * std::sin(3 * t);
  }
  Matrix<double> hr(4, 1), hi(4, 1), y(16, 1);
  geo.analyze(x, 0, 1, hr, hi);
  geo.synthesize(hr, hi, 0, 1, y);
  EXPECT_LT((y - x).cwiseAbs().maxCoeff(), 1e-12);
}
