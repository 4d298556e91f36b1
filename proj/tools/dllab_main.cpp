#include <CLI11.hpp>

#include <malloc.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dllab/core/digest.hpp"
#include "dllab/core/error.hpp"
#include "dllab/io/checkpoint.hpp"
#include "dllab/pipeline/config.hpp"
#include "dllab/pipeline/generate.hpp"
#include "dllab/pipeline/stages.hpp"
#include "oracle_suites.hpp"

namespace fs = std::filesystem;
using namespace dllab;
using pipeline::RunConfig;

namespace {

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.file, "INI file applied over the preset or data config");
  cmd->add_option("--set", f.sets, "section.key=value override (repeatable)");
}

void apply(RunConfig& cfg, const ConfigFlags& f) {
  if (!f.file.empty()) {
    std::ifstream in(f.file);
    if (!in) throw IoError("cannot read config " + f.file);
    std::ostringstream ss;
    ss << in.rdbuf();
    cfg.merge_text(ss.str());
  }
  for (const auto& s : f.sets) cfg.set_assignment(s);
}

/// Run config stored next to the data, with overrides; data sections must
/// still describe the loaded dataset.
RunConfig data_config(const fs::path& dir, const ConfigFlags& f, const io::Dataset& train) {
  RunConfig cfg = RunConfig::from_file(dir / "run.cfg");
  apply(cfg, f);
  if (pipeline::data_config_digest(cfg) != train.config_digest) {
    throw DigestError("config data sections do not match dataset " + (dir / "train.dlld").string());
  }
  return cfg;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path s = p;
  s.replace_extension();
  return s.string() + suffix;
}

void save_stage(const pipeline::StageResult& r, const RunConfig& cfg, const fs::path& out, const std::string& label) {
  ensure_parent(out);
  io::write_checkpoint(r.checkpoint, out);
  pipeline::write_training_curve(r.log, sibling(out, ".curve.csv"));
  cfg.write(sibling(out, ".cfg"));
  std::printf("%s: %s digest %s config %s\n", label.c_str(), out.string().c_str(),
              to_hex(io::checkpoint_digest(r.checkpoint)).c_str(), to_hex(r.checkpoint.config_digest).c_str());
  std::printf("  test loss %.6g -> %.6g (trivial predictor %.6g), %zu epochs, best epoch %d, %.1f s\n",
              r.heldout_before, r.heldout_after, r.heldout_baseline, r.log.epoch_loss.size(), r.log.best_epoch + 1,
              r.seconds);
}

io::Dataset load(const fs::path& dir, const char* name) { return io::read_dataset(dir / name); }

void write_report(const pipeline::EvalResult& r, const fs::path& dir) {
  std::ofstream out(dir / ("metrics_" + r.report.model + ".csv"));
  if (!out) throw IoError("cannot write to " + dir.string());
  r.report.write_csv(out);
  const auto m = r.report.mean();
  std::printf("%-6s ED %.5g SWD %.5g NRMSE_m %.5g NRMSE_s %.5g CRPS %.5g SSR %.5g\n", r.report.model.c_str(), m.ed,
              m.swd, m.nrmse_m, m.nrmse_s, m.crps, m.ssr);
}

}  // namespace

int main(int argc, char** argv) {
  // Tape buffers are large and short-lived; keep them on the heap instead of
  // mapping and unmapping pages every minibatch.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"Diffusion last layer lab: data generation, staged training, sampling and evaluation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate train and test datasets");
  std::string system, scale = "desk", out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  ConfigFlags gen_cfg;
  gen->add_option("--system", system, "sburgers, sdarcy, ks, kolmogorov or synthetic")->required();
  gen->add_option("--scale", scale, "desk or paper");
  gen->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  gen->add_option("--out", out_dir, "output directory")->required();
  add_config_flags(gen, gen_cfg);

  // training stages
  std::string data_dir, encoder_path, dll_path, fno_path, out_path;
  bool verbose = false;
  ConfigFlags train_cfg;
  auto* tenc = app.add_subcommand("train-encoder", "Train the operator encoder");
  auto* tdll = app.add_subcommand("train-dll", "Train the coefficient-space flow head on a frozen encoder");
  auto* tfno = app.add_subcommand("train-fno", "Train the deterministic FNO baseline");
  for (auto* cmd : {tenc, tdll, tfno}) {
    cmd->add_option("--data", data_dir, "directory written by gen")->required();
    cmd->add_option("--out", out_path, "checkpoint path")->required();
    cmd->add_flag("--verbose", verbose, "per-epoch loss on stderr");
    add_config_flags(cmd, train_cfg);
  }
  tdll->add_option("--encoder", encoder_path, "encoder checkpoint")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Score models against the test split");
  int members = 0, directions = 0, horizon = 0, steps = 0;
  bool self_eval = false, fields = false;
  ConfigFlags eval_cfg;
  ev->add_option("--data", data_dir)->required();
  ev->add_option("--encoder", encoder_path);
  ev->add_option("--dll", dll_path);
  ev->add_option("--fno", fno_path);
  ev->add_flag("--self", self_eval, "score the truth against itself");
  ev->add_flag("--fields", fields, "dump per-point mean/std maps");
  ev->add_option("--members", members, "ensemble size (default eval.members)");
  ev->add_option("--directions", directions, "SWD projections (default eval.directions)");
  ev->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  ev->add_option("--out", out_dir)->required();
  add_config_flags(ev, eval_cfg);

  // rollout
  auto* ro = app.add_subcommand("rollout", "Closed-loop rollouts on test trajectories");
  bool perfect = false;
  ro->add_option("--data", data_dir)->required();
  ro->add_option("--encoder", encoder_path);
  ro->add_option("--dll", dll_path);
  ro->add_option("--fno", fno_path);
  ro->add_flag("--perfect", perfect, "replay the truth as a perfect model");
  ro->add_option("--horizon", horizon);
  ro->add_option("--members", members);
  ro->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  ro->add_option("--out", out_dir)->required();
  add_config_flags(ro, eval_cfg);

  // sample
  auto* sm = app.add_subcommand("sample", "Write DLL ensembles for the test inputs as a dataset file");
  sm->add_option("--data", data_dir)->required();
  sm->add_option("--encoder", encoder_path)->required();
  sm->add_option("--dll", dll_path)->required();
  sm->add_option("--members", members);
  sm->add_option("--steps", steps);
  sm->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
  sm->add_option("--out", out_path)->required();
  add_config_flags(sm, eval_cfg);
  for (auto* cmd : {ev, ro}) cmd->add_option("--steps", steps, "Euler steps (default dll.steps)");

  // selfcheck
  auto* sc = app.add_subcommand("selfcheck", "Run the oracle property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (gen->parsed()) {
      RunConfig cfg = RunConfig::preset(io::parse_system(system), pipeline::parse_scale(scale));
      apply(cfg, gen_cfg);
      if (seed_given) cfg.set("run.seed", std::to_string(seed));
      const auto data = pipeline::generate(cfg);
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      io::write_dataset(data.train, dir / "train.dlld");
      io::write_dataset(data.test, dir / "test.dlld");
      cfg.write(dir / "run.cfg");
      std::printf("config digest %s (data %s)\n", to_hex(cfg.digest()).c_str(),
                  to_hex(pipeline::data_config_digest(cfg)).c_str());
      std::printf("train: %s\ntest:  %s\n", pipeline::describe(data.train).c_str(), pipeline::describe(data.test).c_str());
      return 0;
    }
    if (tenc->parsed() || tdll->parsed() || tfno->parsed()) {
      const fs::path dir(data_dir);
      const auto train = load(dir, "train.dlld");
      const auto test = load(dir, "test.dlld");
      const RunConfig cfg = data_config(dir, train_cfg, train);
      if (tenc->parsed()) {
        save_stage(pipeline::train_encoder(cfg, train, test, verbose), cfg, out_path, "encoder");
      } else if (tdll->parsed()) {
        if (!fs::exists(encoder_path)) throw UsageError("train-dll needs an encoder checkpoint; run train-encoder first");
        const auto enc = io::read_checkpoint(encoder_path);
        save_stage(pipeline::train_dll(cfg, train, test, enc, verbose), cfg, out_path, "dll");
      } else {
        save_stage(pipeline::train_fno(cfg, train, test, verbose), cfg, out_path, "fno");
      }
      return 0;
    }
    if (ev->parsed() || ro->parsed() || sm->parsed()) {
      const fs::path dir(data_dir);
      const auto train = load(dir, "train.dlld");
      const auto test = load(dir, "test.dlld");
      const RunConfig cfg = data_config(dir, eval_cfg, train);
      const int sampler_steps = steps > 0 ? steps : static_cast<int>(cfg.integer("dll.steps"));
      const bool want_dll = !dll_path.empty();
      if (want_dll && encoder_path.empty()) throw UsageError("--dll needs --encoder");
      pipeline::EnsembleSampler dll;
      pipeline::PointPredictor fno;
      io::Checkpoint dll_ckpt;
      if (want_dll) {
        const auto enc = io::read_checkpoint(encoder_path);
        dll_ckpt = io::read_checkpoint(dll_path);
        pipeline::check_dataset(enc, test);
        pipeline::check_dataset(dll_ckpt, test);
        dll = pipeline::make_dll_sampler(enc, dll_ckpt, sampler_steps);
      }
      if (!fno_path.empty()) {
        const auto f = io::read_checkpoint(fno_path);
        pipeline::check_dataset(f, test);
        fno = pipeline::make_fno_predictor(f);
      }

      if (sm->parsed()) {
        const int k = members > 0 ? members : static_cast<int>(cfg.integer("eval.members"));
        const std::uint64_t s = seed_given ? seed : cfg.seed("eval.seed");
        io::Dataset ens;
        ens.system = io::SystemId::ensemble;
        ens.layout = io::Layout::pairs;
        ens.grid = test.grid;
        ens.lengths = test.lengths;
        ens.config_digest = test.config_digest;
        ens.count = test.count;
        ens.per_input = static_cast<std::size_t>(k);
        ens.inputs = test.inputs;
        ens.meta = "source=" + io::system_name(test.system) + ";model=" + to_hex(io::checkpoint_digest(dll_ckpt)) +
                   ";seed=" + std::to_string(s) + ";steps=" + std::to_string(sampler_steps) + ";K=" + std::to_string(k);
        const auto& n = test.norm;
        for (std::size_t i = 0; i < test.count; ++i) {
          std::vector<double> a(test.input(i).begin(), test.input(i).end());
          for (auto& v : a) v = (v - n.input_mean) / n.input_std;
          const auto z = dll(a, k, Rng(s, Stream::noise, i), 0);
          for (Eigen::Index r = 0; r < z.rows(); ++r) {
            for (Eigen::Index p = 0; p < z.cols(); ++p) ens.outputs.push_back(z(r, p) * n.output_std + n.output_mean);
          }
        }
        ensure_parent(out_path);
        io::write_dataset(ens, out_path);
        std::printf("sample: %s (%zu inputs x %d members) digest %s\n", out_path.c_str(), ens.count, k,
                    to_hex(io::dataset_digest(ens)).c_str());
        return 0;
      }

      const fs::path odir(out_dir);
      fs::create_directories(odir);
      cfg.write(odir / "run.cfg");
      if (ev->parsed()) {
        pipeline::EvalOptions opt;
        opt.members = members > 0 ? members : static_cast<int>(cfg.integer("eval.members"));
        opt.directions = directions > 0 ? directions : static_cast<int>(cfg.integer("eval.directions"));
        opt.seed = seed_given ? seed : cfg.seed("eval.seed");
        opt.keep_fields = fields;
        if (!want_dll && !fno && !self_eval) throw UsageError("eval needs --dll/--encoder, --fno or --self");
        std::ofstream summary(odir / "summary.csv");
        summary << "model,ED,SWD,NRMSE_m,NRMSE_s,CRPS,SSR\n";
        summary.precision(10);
        auto emit = [&](const pipeline::EvalResult& r) {
          write_report(r, odir);
          const auto m = r.report.mean();
          summary << r.report.model << ',' << m.ed << ',' << m.swd << ',' << m.nrmse_m << ',' << m.nrmse_s << ','
                  << m.crps << ',' << m.ssr << '\n';
          if (fields) pipeline::write_field_dump(r, odir / ("fields_" + r.report.model + ".csv"));
        };
        if (self_eval) emit(pipeline::evaluate_self(test, opt));
        if (want_dll) {
          const auto r = pipeline::evaluate_sampler("dll", dll, test, opt);
          emit(r);
          if (fields) std::printf("dll std-map correlation %.4f\n", pipeline::std_map_correlation(r));
        }
        if (fno) emit(pipeline::evaluate_predictor("fno", fno, test, opt));
        return 0;
      }
      // rollout
      if (!cfg.has("rollout.horizon")) throw UsageError("rollout needs a trajectory system (ks or kolmogorov)");
      pipeline::RolloutOptions opt;
      opt.horizon = horizon > 0 ? horizon : static_cast<int>(cfg.integer("rollout.horizon"));
      opt.members = members > 0 ? members : static_cast<int>(cfg.integer("rollout.members"));
      opt.seed = seed_given ? seed : cfg.seed("rollout.seed");
      if (!want_dll && !fno && !perfect) throw UsageError("rollout needs --dll/--encoder, --fno or --perfect");
      std::ofstream curve(odir / "rollout_curve.csv"), records(odir / "rollout_records.csv");
      bool header = true;
      auto emit = [&](const std::string& name, const std::vector<rollout::RolloutRecord>& recs) {
        const auto s = rollout::aggregate(recs);
        rollout::write_curve_csv(curve, name, s, header);
        rollout::write_records_csv(records, name, recs, header);
        header = false;
        std::printf("%-8s NRMSE %.5g CRPS %.5g SSR %.5g truncated %d\n", name.c_str(), s.average.nrmse, s.average.crps,
                    s.average.ssr, s.truncated);
      };
      if (perfect) emit("perfect", pipeline::rollout_perfect(test, opt));
      if (want_dll) emit("dll", pipeline::rollout_sampler(dll, test, opt));
      if (fno) emit("fno", pipeline::rollout_predictor(fno, test, opt));
      return 0;
    }
    if (sc->parsed()) {
      const auto results = oracles::run_property_suites(std::cout);
      for (const auto& r : results) {
        if (!r.pass) return 1;
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
