// Acceptance driver: property suites plus desk-scale directional runs.
// Progress goes to stderr; stdout ends with one PASS/FAIL line per criterion.
#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"
#include "dllab/kl/kl.hpp"
#include "dllab/pipeline/generate.hpp"
#include "dllab/pipeline/models.hpp"
#include "dllab/pipeline/stages.hpp"
#include "oracle_suites.hpp"

using namespace dllab;
using pipeline::RunConfig;

namespace {

constexpr double kDirectionalBudget = 30.0 * 60.0;

struct Trained {
  RunConfig cfg;
  pipeline::GeneratedData data;
  io::Checkpoint encoder, dll, fno;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Trained train_system(io::SystemId system, std::uint64_t seed, bool with_fno) {
  Trained t{RunConfig::preset(system, pipeline::Scale::desk), {}, {}, {}, {}};
  t.cfg.set("run.seed", std::to_string(seed));
  const auto t0 = std::chrono::steady_clock::now();
  std::cerr << "[" << io::system_name(system) << " seed " << seed << "] generating\n";
  t.data = pipeline::generate(t.cfg);
  std::cerr << "  " << pipeline::describe(t.data.train) << "\n  " << pipeline::describe(t.data.test) << '\n';
  auto report = [&](const char* stage, const pipeline::StageResult& r) {
    std::cerr << "  " << stage << ": test loss " << r.heldout_before << " -> " << r.heldout_after << " (trivial "
              << r.heldout_baseline << "), " << r.log.epoch_loss.size() << " epochs, best " << r.log.best_epoch + 1
              << ", " << fmt("%.1f", r.seconds) << " s\n";
  };
  auto enc = pipeline::train_encoder(t.cfg, t.data.train, t.data.test);
  report("encoder", enc);
  t.encoder = std::move(enc.checkpoint);
  auto dll = pipeline::train_dll(t.cfg, t.data.train, t.data.test, t.encoder);
  report("dll", dll);
  t.dll = std::move(dll.checkpoint);
  if (with_fno) {
    auto fno = pipeline::train_fno(t.cfg, t.data.train, t.data.test);
    report("fno", fno);
    t.fno = std::move(fno.checkpoint);
  }
  std::cerr << "  trained in " << fmt("%.1f", elapsed(t0)) << " s\n";
  return t;
}

pipeline::EvalOptions eval_options(const RunConfig& cfg) {
  pipeline::EvalOptions opt;
  opt.members = static_cast<int>(cfg.integer("eval.members"));
  opt.directions = static_cast<int>(cfg.integer("eval.directions"));
  opt.seed = cfg.seed("eval.seed");
  return opt;
}

pipeline::EnsembleSampler dll_sampler(const Trained& t) {
  return pipeline::make_dll_sampler(t.encoder, t.dll, static_cast<int>(t.cfg.integer("dll.steps")));
}

/// Smallest margin of encoder loss over the KL tail, per test input.
/// Each input's realizations form one conditional ensemble; a trajectory
/// transition or a single realization has zero tail.
double kl_tail_margin(const Trained& t) {
  const auto& test = t.data.test;
  const auto pairs = pipeline::make_pairs(test);
  const std::size_t per = test.per_input;
  const auto rank = static_cast<std::size_t>(t.cfg.integer("encoder.rank"));
  double worst = std::numeric_limits<double>::infinity();
  auto check = [&](auto& enc) {
    for (std::size_t i = 0; i < test.count; ++i) {
      const auto lo = static_cast<Eigen::Index>(i * per);
      const auto n = static_cast<Eigen::Index>(per);
      const model::FieldMatrix a = pairs.a.middleRows(lo, n);
      const model::FieldMatrix u = pairs.u.middleRows(lo, n);
      const double loss = enc.evaluate(a, u, test.grid_int());
      double tail = 0.0;
      if (test.layout == io::Layout::pairs && per > 1) {
        const Eigen::MatrixXd samples = u;
        const auto basis = kl::empirical_kl(samples, 1.0 / static_cast<double>(u.cols()));
        tail = kl::optimal_rank_r_error(basis, std::min(rank, static_cast<std::size_t>(basis.eigenvalues.size())));
      }
      worst = std::min(worst, loss - tail);
    }
  };
  if (t.encoder.scalar_bytes == 4) {
    check(*pipeline::load_encoder<float>(t.encoder));
  } else {
    check(*pipeline::load_encoder<double>(t.encoder));
  }
  return worst;
}

oracles::SuiteResult burgers_ordering(std::vector<Trained>& keep) {
  return oracles::timed("stochastic Burgers ordering", kDirectionalBudget, [&](oracles::SuiteResult& r) {
    int ed_pass = 0, spread_pass = 0;
    bool fno_exact = true;
    std::ostringstream d;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      keep.push_back(train_system(io::SystemId::sburgers, seed, true));
      const auto& t = keep.back();
      const auto opt = eval_options(t.cfg);
      const auto dll = pipeline::evaluate_sampler("dll", dll_sampler(t), t.data.test, opt).report.mean();
      const auto fno =
          pipeline::evaluate_predictor("fno", pipeline::make_fno_predictor(t.fno), t.data.test, opt).report.mean();
      std::cerr << "  dll ED " << dll.ed << " NRMSE_s " << dll.nrmse_s << " SSR " << dll.ssr << " | fno ED " << fno.ed
                << " NRMSE_s " << fno.nrmse_s << '\n';
      ed_pass += dll.ed < 0.5 * fno.ed;
      spread_pass += dll.nrmse_s < 0.6;
      fno_exact = fno_exact && std::abs(fno.nrmse_s - 1.0) < 5e-4;  // 1.000 to three decimals
      d << (seed ? "; " : "") << "seed " << seed << " ED " << fmt("%.3g", dll.ed) << "/" << fmt("%.3g", fno.ed)
        << " NRMSE_s " << fmt("%.3g", dll.nrmse_s);
    }
    r.pass = ed_pass == 3 && spread_pass >= 2 && fno_exact;
    d << "; ED ordering " << ed_pass << "/3, NRMSE_s<0.6 " << spread_pass << "/3, FNO NRMSE_s=1 "
      << (fno_exact ? "yes" : "no");
    r.detail = d.str();
  });
}

oracles::SuiteResult darcy_ordering(std::vector<Trained>& keep) {
  return oracles::timed("stochastic Darcy ordering", kDirectionalBudget, [&](oracles::SuiteResult& r) {
    int ed_pass = 0, corr_pass = 0;
    std::ostringstream d;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      keep.push_back(train_system(io::SystemId::sdarcy, seed, true));
      const auto& t = keep.back();
      auto opt = eval_options(t.cfg);
      opt.keep_fields = true;
      const auto dll_eval = pipeline::evaluate_sampler("dll", dll_sampler(t), t.data.test, opt);
      const auto dll = dll_eval.report.mean();
      const double corr = pipeline::std_map_correlation(dll_eval);
      opt.keep_fields = false;
      const auto fno =
          pipeline::evaluate_predictor("fno", pipeline::make_fno_predictor(t.fno), t.data.test, opt).report.mean();
      std::cerr << "  dll ED " << dll.ed << " std-map corr " << corr << " | fno ED " << fno.ed << '\n';
      ed_pass += dll.ed < fno.ed;
      corr_pass += corr > 0.3;
      d << (seed ? "; " : "") << "seed " << seed << " ED " << fmt("%.3g", dll.ed) << "/" << fmt("%.3g", fno.ed)
        << " corr " << fmt("%.3f", corr);
    }
    r.pass = ed_pass == 3 && corr_pass == 3;
    d << "; ED ordering " << ed_pass << "/3, corr>0.3 " << corr_pass << "/3";
    r.detail = d.str();
  });
}

oracles::SuiteResult ks_rollout(std::vector<Trained>& keep) {
  return oracles::timed("KS rollout", kDirectionalBudget, [&](oracles::SuiteResult& r) {
    keep.push_back(train_system(io::SystemId::ks, 0, true));
    const auto& t = keep.back();
    pipeline::RolloutOptions opt;
    opt.horizon = static_cast<int>(t.cfg.integer("rollout.horizon"));
    opt.members = static_cast<int>(t.cfg.integer("rollout.members"));
    opt.seed = t.cfg.seed("rollout.seed");
    const auto dll = rollout::aggregate(pipeline::rollout_sampler(dll_sampler(t), t.data.test, opt));
    const auto fno = rollout::aggregate(pipeline::rollout_predictor(pipeline::make_fno_predictor(t.fno), t.data.test, opt));
    std::vector<double> nrmse;
    for (std::size_t s = 1; s < dll.curve.size(); ++s) nrmse.push_back(dll.curve[s].nrmse);
    const double rho = pipeline::trend_spearman(nrmse);
    std::cerr << "  dll SSR " << dll.average.ssr << " CRPS " << dll.average.crps << " NRMSE " << dll.average.nrmse
              << " trend " << rho << " truncated " << dll.truncated << " | fno CRPS " << fno.average.crps << '\n';
    const bool ssr_ok = dll.average.ssr > 0.3 && dll.average.ssr < 1.5;
    const bool crps_ok = dll.average.crps < fno.average.crps;
    const bool trend_ok = rho > 0.5;
    r.pass = ssr_ok && crps_ok && trend_ok && dll.truncated == 0;
    r.detail = "SSR " + fmt("%.3f", dll.average.ssr) + ", CRPS " + fmt("%.4g", dll.average.crps) + " vs FNO " +
               fmt("%.4g", fno.average.crps) + ", NRMSE trend Spearman " + fmt("%.3f", rho) + ", " +
               std::to_string(dll.curve.size() - 1) + " steps";
  });
}

oracles::SuiteResult dirac_collapse(std::vector<Trained>& keep) {
  return oracles::timed("Dirac collapse", kDirectionalBudget, [&](oracles::SuiteResult& r) {
    keep.push_back(train_system(io::SystemId::synthetic, 0, false));
    const auto& t = keep.back();
    auto opt = eval_options(t.cfg);
    opt.keep_fields = true;
    const auto ev = pipeline::evaluate_sampler("dll", dll_sampler(t), t.data.test, opt);
    double var = 0.0, sq = 0.0, worst = 0.0;
    std::size_t n = 0;
    for (const auto& f : ev.fields) {
      var += f.pred_std.squaredNorm();
      sq += f.truth_mean.squaredNorm();
      n += static_cast<std::size_t>(f.pred_std.size());
      worst = std::max(worst, f.pred_std.maxCoeff() / std::sqrt(f.truth_mean.squaredNorm() / f.truth_mean.size()));
    }
    const double ratio = std::sqrt(var / n) / std::sqrt(sq / n);
    std::cerr << "  ensemble std / field RMS " << ratio << " (worst point " << worst << ")\n";
    r.pass = ratio < 0.1;
    r.detail = "ensemble std / field RMS " + fmt("%.4f", ratio) + ", largest single-point ratio " + fmt("%.3f", worst);
  });
}

}  // namespace

int main(int argc, char** argv) {
  // Without --strict the exit status only reports whether every criterion
  // ran to a verdict; the PASS/FAIL lines carry the verdicts.
  bool strict = false;
  std::string results_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--results" && i + 1 < argc) {
      results_path = argv[++i];
    } else {
      std::cerr << "usage: dllab_acceptance [--strict] [--results FILE]\n";
      return 3;
    }
  }
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  std::vector<oracles::SuiteResult> results;
  try {
    results.push_back(oracles::gradient_suite());
    results.push_back(oracles::solver_order_suite());
    results.push_back(oracles::darcy_suite());
    results.push_back(oracles::kl_subspace_suite());
    results.push_back(oracles::projection_suite());
    results.push_back(oracles::flow_suite());
    results.push_back(oracles::stability_suite());
    results.push_back(oracles::metrics_suite());
    for (const auto& r : results) std::cerr << oracles::status_line(r) << '\n';

    std::vector<Trained> trained;
    results.push_back(burgers_ordering(trained));
    std::cerr << oracles::status_line(results.back()) << '\n';
    results.push_back(darcy_ordering(trained));
    std::cerr << oracles::status_line(results.back()) << '\n';
    results.push_back(ks_rollout(trained));
    std::cerr << oracles::status_line(results.back()) << '\n';
    results.push_back(dirac_collapse(trained));
    std::cerr << oracles::status_line(results.back()) << '\n';

    // The KL criterion also bounds every encoder trained above.
    auto& kl = results[3];
    const auto t0 = std::chrono::steady_clock::now();
    double worst = std::numeric_limits<double>::infinity();
    try {
      for (const auto& t : trained) {
        const double m = kl_tail_margin(t);
        std::cerr << "  " << io::system_name(t.cfg.system()) << " seed " << t.cfg.seed("run.seed")
                  << " encoder loss - KL tail >= " << m << '\n';
        worst = std::min(worst, m);
      }
      kl.seconds += elapsed(t0);
      kl.pass = kl.pass && worst >= -1e-8 && kl.seconds < 120.0;
      kl.detail += "; " + std::to_string(trained.size()) + " trained encoders, min(loss - KL tail) " + fmt("%.3g", worst);
    } catch (const std::exception& e) {
      kl.pass = false;
      kl.detail = std::string("exception: ") + e.what();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  }

  std::ostringstream lines;
  bool all = true, errored = false;
  for (const auto& r : results) {
    lines << oracles::status_line(r) << '\n';
    all = all && r.pass;
    errored = errored || r.detail.rfind("exception:", 0) == 0;
  }
  lines << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << '\n';
  std::cout << '\n' << lines.str();
  if (!results_path.empty()) {
    std::ofstream out(results_path);
    out << lines.str();
    if (!out) {
      std::cerr << "cannot write " << results_path << '\n';
      return 6;
    }
  }
  if (errored) return 1;
  return all || !strict ? 0 : 1;
}
