#include <gtest/gtest.h>

#include <cmath>

#include "dllab/core/error.hpp"
#include "dllab/io/checkpoint.hpp"
#include "dllab/pipeline/config.hpp"
#include "dllab/pipeline/generate.hpp"

using namespace dllab;
using namespace dllab::pipeline;

namespace {

RunConfig small_burgers() {
  RunConfig c = RunConfig::preset(io::SystemId::sburgers, Scale::desk);
  c.set("data.train", "3");
  c.set("data.test", "1");
  c.set("data.realizations", "4");
  c.set("burgers.n", "32");
  c.set("burgers.macro_dt", "0.1");
  return c;
}

}  // namespace

TEST(RunConfig, UnknownKeyIsConfigError) {
  RunConfig c = RunConfig::preset(io::SystemId::sburgers, Scale::desk);
  EXPECT_THROW(c.set("burgers.viscosity", "1"), ConfigError);
  EXPECT_THROW(c.set("ks.n", "64"), ConfigError);
  EXPECT_THROW(c.set_assignment("nokey"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("[run]\nsystem = sburgers\n[burgers]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("[run]\nsystem = nonesuch\n"), ConfigError);
}

TEST(RunConfig, CanonicalTextRoundTrips) {
  RunConfig c = RunConfig::preset(io::SystemId::sdarcy, Scale::desk);
  c.set_assignment("darcy.lambda = 0.3");
  const RunConfig back = RunConfig::from_text(c.canonical());
  EXPECT_EQ(back.canonical(), c.canonical());
  EXPECT_EQ(back.digest(), c.digest());
  EXPECT_DOUBLE_EQ(back.real("darcy.lambda"), 0.3);
  EXPECT_NE(c.digest(), RunConfig::preset(io::SystemId::sdarcy, Scale::desk).digest());
}

TEST(RunConfig, TypedAccessRejectsGarbage) {
  RunConfig c = RunConfig::preset(io::SystemId::ks, Scale::desk);
  c.set("ks.n", "6x4");
  EXPECT_THROW(c.integer("ks.n"), ConfigError);
  c.set("ks.length", "abc");
  EXPECT_THROW(c.real("ks.length"), ConfigError);
}

TEST(RunConfig, PaperScaleCounts) {
  const RunConfig c = RunConfig::preset(io::SystemId::sburgers, Scale::paper);
  EXPECT_EQ(c.integer("data.train"), 10000);
  EXPECT_EQ(c.integer("data.test"), 32);
  EXPECT_EQ(c.integer("data.realizations"), 64);
  EXPECT_EQ(c.integer("burgers.n"), 256);
  EXPECT_EQ(c.integer("encoder.rank"), 64);
  EXPECT_EQ(c.integer("dll.hidden"), 512);
}

TEST(Generate, NoiselessBurgersRealizationsAreIdentical) {
  RunConfig c = small_burgers();
  c.set("burgers.sigma", "0");
  const io::Dataset d = generate_split(c, Split::test);
  for (std::size_t j = 1; j < 4; ++j) {
    for (std::size_t p = 0; p < d.points(); ++p) EXPECT_EQ(d.output(0, j)[p], d.output(0, 0)[p]);
  }
}

TEST(Generate, StochasticBurgersHasPositiveSpreadEverywhere) {
  RunConfig c = RunConfig::preset(io::SystemId::sburgers, Scale::desk);
  c.set("data.test", "1");
  c.set("data.train", "1");
  const io::Dataset d = generate_split(c, Split::test);
  ASSERT_EQ(d.grid[0], 64u);
  ASSERT_EQ(d.per_input, 64u);
  double min_sd = 1e300;
  for (std::size_t p = 0; p < d.points(); ++p) {
    double s = 0, sq = 0;
    for (std::size_t j = 0; j < 64; ++j) s += d.output(0, j)[p];
    for (std::size_t j = 0; j < 64; ++j) sq += std::pow(d.output(0, j)[p] - s / 64, 2);
    min_sd = std::min(min_sd, std::sqrt(sq / 64));
  }
  EXPECT_GT(min_sd, 0.0);
}

TEST(Generate, KsTrajectoriesRegenerateBitwise) {
  RunConfig c = RunConfig::preset(io::SystemId::ks, Scale::desk);
  c.set("data.train", "2");
  c.set("data.segment", "5");
  c.set("data.warmup", "3");
  const io::Dataset a = generate_split(c, Split::train), b = generate_split(c, Split::train);
  EXPECT_EQ(io::serialize(a), io::serialize(b));
  EXPECT_EQ(a.per_input, 5u);
  c.set("run.seed", "1");
  EXPECT_NE(io::dataset_digest(generate_split(c, Split::train)), io::dataset_digest(a));
}

TEST(Generate, SameSeedSameBytesAndNormalizationFromTrain) {
  const RunConfig c = small_burgers();
  const GeneratedData g1 = generate(c), g2 = generate(c);
  EXPECT_EQ(io::serialize(g1.train), io::serialize(g2.train));
  EXPECT_EQ(io::serialize(g1.test), io::serialize(g2.test));
  const io::Normalization n = io::compute_normalization(g1.train);
  EXPECT_EQ(g1.test.norm.output_std, n.output_std);
  EXPECT_EQ(g1.train.config_digest, data_config_digest(c));
}

TEST(Generate, SplitsAndRealizationsUseDistinctStreams) {
  const GeneratedData g = generate(small_burgers());
  EXPECT_NE(g.train.input(0)[3], g.test.input(0)[3]);
  EXPECT_NE(g.test.output(0, 0)[3], g.test.output(0, 1)[3]);
}

TEST(Generate, SyntheticTaskIsExactlyRankLimited) {
  RunConfig c = RunConfig::preset(io::SystemId::synthetic, Scale::desk);
  c.set("data.train", "4");
  const io::Dataset d = generate_split(c, Split::train);
  const std::size_t n = d.points();
  // No content above wavenumber 4: projecting onto cos(5x) gives zero.
  for (std::size_t i = 0; i < 4; ++i) {
    double c5 = 0;
    for (std::size_t p = 0; p < n; ++p) c5 += d.output(i, 0)[p] * std::cos(5 * 2 * M_PI * double(p) / double(n));
    EXPECT_NEAR(c5, 0.0, 1e-10);
  }
}

TEST(Generate, DarcyAndKolmogorovSmoke) {
  RunConfig dc = RunConfig::preset(io::SystemId::sdarcy, Scale::desk);
  dc.set("data.train", "2");
  dc.set("darcy.n", "16");
  const io::Dataset d = generate_split(dc, Split::train);
  for (double a : d.inputs) EXPECT_TRUE(a == 12.0 || a == 3.0);
  EXPECT_NE(d.meta.find("unconverged solves 0"), std::string::npos) << d.meta;

  RunConfig kc = RunConfig::preset(io::SystemId::kolmogorov, Scale::desk);
  kc.set("data.train", "1");
  kc.set("data.segment", "2");
  kc.set("data.warmup", "2");
  kc.set("kolmogorov.n", "16");
  const io::Dataset k = generate_split(kc, Split::train);
  EXPECT_EQ(k.grid, (std::vector<std::size_t>{16, 16}));
  for (double v : k.outputs) EXPECT_TRUE(std::isfinite(v));
}

TEST(Checkpoint, RoundTripInBothPrecisions) {
  for (std::uint32_t bytes : {4u, 8u}) {
    io::Checkpoint c;
    c.kind = io::ModelKind::dll;
    c.scalar_bytes = bytes;
    c.arch = {1, 16, 32, 64};
    c.config_digest = 11;
    c.dataset_digest = 22;
    c.upstream_digest = 33;
    c.extra = {0.5, -1.25};
    c.meta = "trained";
    c.params.push_back({"w", 2, 3, {1, 2, 3, 4, 5, 0.25}, {0, 1, 0, 1, 0, 1}});
    const io::Checkpoint back = io::deserialize_checkpoint(io::serialize(c));
    EXPECT_EQ(back.arch, c.arch);
    EXPECT_EQ(back.params[0].raw, c.params[0].raw);
    EXPECT_EQ(back.params[0].ema, c.params[0].ema);
    EXPECT_EQ(back.upstream_digest, 33u);
    EXPECT_EQ(back.architecture_digest(), c.architecture_digest());
    EXPECT_EQ(io::serialize(back), io::serialize(c));
  }
}

TEST(Checkpoint, CorruptionIsDetected) {
  io::Checkpoint c;
  c.params.push_back({"w", 1, 2, {1, 2}, {1, 2}});
  auto bytes = io::serialize(c);
  auto bad = bytes;
  bad[0] = std::byte{'X'};
  EXPECT_THROW(io::deserialize_checkpoint(bad), IoError);
  // Flip a character of the parameter name: the architecture digest no longer matches.
  auto renamed = bytes;
  for (std::size_t i = 0; i + 1 < renamed.size(); ++i) {
    if (renamed[i] == std::byte{'w'}) {
      renamed[i] = std::byte{'v'};
      break;
    }
  }
  EXPECT_THROW(io::deserialize_checkpoint(renamed), DigestError);
  bytes.pop_back();
  EXPECT_THROW(io::deserialize_checkpoint(bytes), IoError);
}
