#include "dllab/pipeline/stages.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>

#include "dllab/core/digest.hpp"
#include "dllab/model/dll.hpp"
#include "dllab/model/encoder.hpp"
#include "dllab/pipeline/models.hpp"

namespace dllab::pipeline {

using model::FieldMatrix;
using diff::Tape;

namespace {

template <class F>
auto with_precision(const std::string& precision, F&& f) {
  if (precision == "float32") return f(float{});
  if (precision == "float64") return f(double{});
  throw ConfigError("run.precision must be float32 or float64, got '" + precision + "'");
}

template <class F>
auto with_scalar_bytes(std::uint32_t bytes, F&& f) {
  return with_precision(bytes == 4 ? "float32" : "float64", std::forward<F>(f));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string data_tag(const io::Dataset& d) { return "data_config=" + to_hex(d.config_digest); }

io::Checkpoint base_checkpoint(io::ModelKind kind, std::uint32_t bytes, const RunConfig& cfg,
                               const std::vector<std::string>& sections, const io::Dataset& train) {
  io::Checkpoint c;
  c.kind = kind;
  c.scalar_bytes = bytes;
  c.config_digest = cfg.digest(sections);
  c.dataset_digest = io::dataset_digest(train);
  c.meta = data_tag(train) + ";system=" + io::system_name(train.system) + ";seed=" + cfg.str("run.seed");
  return c;
}

void normalize_into(std::span<const double> x, double mean, double sd, Eigen::Ref<Eigen::RowVectorXd> out) {
  for (std::size_t p = 0; p < x.size(); ++p) out(static_cast<Eigen::Index>(p)) = (x[p] - mean) / sd;
}

std::vector<double> normalized(std::span<const double> x, double mean, double sd) {
  std::vector<double> out(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) out[p] = (x[p] - mean) / sd;
  return out;
}

/// Training rows split by input: the last `fraction` of inputs (whole
/// trajectories for trajectory data) become the validation set.
std::pair<PairSet, PairSet> split_validation(const io::Dataset& d, double fraction) {
  PairSet all = make_pairs(d);
  if (fraction < 0.0 || fraction >= 1.0) throw ConfigError("validation fraction must be in [0, 1)");
  std::size_t hold = fraction > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d.count)))) : 0;
  if (hold >= d.count) throw ConfigError("validation split leaves no training inputs");
  const auto rows = static_cast<Eigen::Index>(hold * d.per_input);
  const auto keep = all.a.rows() - rows;
  PairSet fit{all.a.topRows(keep), all.u.topRows(keep)};
  PairSet val{all.a.bottomRows(rows), all.u.bottomRows(rows)};
  return {std::move(fit), std::move(val)};
}

template <class S>
StageResult encoder_stage(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = train.grid_int();
  const auto ecfg = encoder_config(cfg, static_cast<int>(grid.size()));
  model::OperatorEncoder<S> enc(ecfg, grid);
  Rng init(cfg.seed("run.seed"), Stream::init, 1);
  enc.init(init);
  const auto [tr, val] = split_validation(train, cfg.real("train_encoder.validation"));
  const PairSet te = make_pairs(test, 1);
  std::function<double()> validate;
  if (val.a.rows() > 0) validate = [&, &val = val] { return enc.evaluate(val.a, val.u, grid); };
  StageResult out;
  out.heldout_before = enc.evaluate(te.a, te.u, grid);
  out.heldout_baseline = te.u.squaredNorm() / static_cast<double>(te.u.size());
  auto res = model::fit<S>(
      enc.params(), static_cast<std::size_t>(tr.a.rows()), train_config(cfg, "train_encoder", verbose),
      [&](Tape<S>& tape, const std::vector<std::size_t>& idx, Rng&) {
        return enc.loss(tape, model::gather_fields<S>(tr.a, idx), model::gather_fields<S>(tr.u, idx),
                        static_cast<int>(idx.size()), grid);
      },
      "train-encoder", validate);
  out.checkpoint = base_checkpoint(io::ModelKind::encoder, scalar_bytes<S>(), cfg, {"run", "encoder", "train_encoder"}, train);
  out.checkpoint.arch = encoder_arch(ecfg, grid);
  out.checkpoint.params = capture(enc.params(), res.ema);
  model::swap_values(enc.params(), res.ema);
  out.heldout_after = enc.evaluate(te.a, te.u, grid);
  out.log = std::move(res.log);
  out.seconds = seconds_since(t0);
  return out;
}

/// Mean velocity loss of `head` and of v = 0 on fixed draws.
template <class S>
std::pair<double, double> velocity_heldout(const model::DllHead<S>& head, const FieldMatrix& a, const Eigen::MatrixXd& z,
                                           const std::vector<int>& grid, std::uint64_t seed) {
  Rng rng(seed, Stream::noise, 0xe7a1);
  Rng twin = rng;
  double loss = 0.0, base = 0.0;
  const Eigen::Index bs = 32;
  for (Eigen::Index lo = 0; lo < a.rows(); lo += bs) {
    const Eigen::Index hi = std::min(a.rows(), lo + bs);
    std::vector<std::size_t> idx;
    for (Eigen::Index i = lo; i < hi; ++i) idx.push_back(static_cast<std::size_t>(i));
    const Eigen::MatrixXd zb = z.middleRows(lo, hi - lo);
    Tape<S> tape;
    const auto l = head.loss(tape, model::gather_fields<S>(a, idx), zb, static_cast<int>(idx.size()), rng, grid);
    loss += static_cast<double>(tape.value(l)(0, 0)) * static_cast<double>(hi - lo);
    const auto nb = model::draw_noising(zb, head.config().draws, twin);
    base += nb.target.squaredNorm() / static_cast<double>(nb.target.rows()) * static_cast<double>(hi - lo);
  }
  return {loss / static_cast<double>(a.rows()), base / static_cast<double>(a.rows())};
}

template <class S>
StageResult dll_stage(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test,
                      const io::Checkpoint& encoder, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = train.grid_int();
  const auto enc = load_encoder<S>(encoder);
  const auto [tr, val] = split_validation(train, cfg.real("train_dll.validation"));
  const PairSet te = make_pairs(test, 1);
  const FieldMatrix xi = enc->encode(tr.u, grid);
  const auto scaling = model::LatentScaling::fit(xi);
  const Eigen::MatrixXd z = scaling.standardize(xi);
  const Eigen::MatrixXd zt = scaling.standardize(enc->encode(te.u, grid));
  const Eigen::MatrixXd zv = scaling.standardize(enc->encode(val.u, grid));

  const auto dcfg = dll_config(cfg, static_cast<int>(grid.size()), enc->rank());
  model::DllHead<S> head(dcfg, grid);
  Rng init(cfg.seed("run.seed"), Stream::init, 2);
  head.init(init);
  StageResult out;
  const auto seed = cfg.seed("run.seed");
  std::tie(out.heldout_before, out.heldout_baseline) = velocity_heldout(head, te.a, zt, grid, seed);
  std::function<double()> validate;
  if (val.a.rows() > 0) validate = [&, &val = val] { return velocity_heldout(head, val.a, zv, grid, seed + 1).first; };
  auto res = model::fit<S>(
      head.params(), static_cast<std::size_t>(tr.a.rows()), train_config(cfg, "train_dll", verbose),
      [&](Tape<S>& tape, const std::vector<std::size_t>& idx, Rng& noise) {
        Eigen::MatrixXd zb(static_cast<Eigen::Index>(idx.size()), z.cols());
        for (std::size_t b = 0; b < idx.size(); ++b) zb.row(static_cast<Eigen::Index>(b)) = z.row(static_cast<Eigen::Index>(idx[b]));
        return head.loss(tape, model::gather_fields<S>(tr.a, idx), zb, static_cast<int>(idx.size()), noise, grid);
      },
      "train-dll", validate);
  out.checkpoint = base_checkpoint(io::ModelKind::dll, scalar_bytes<S>(), cfg, {"run", "dll", "train_dll"}, train);
  out.checkpoint.arch = dll_arch(dcfg, grid);
  out.checkpoint.upstream_digest = io::checkpoint_digest(encoder);
  out.checkpoint.extra.assign(scaling.mean.data(), scaling.mean.data() + scaling.mean.size());
  out.checkpoint.extra.insert(out.checkpoint.extra.end(), scaling.scale.data(), scaling.scale.data() + scaling.scale.size());
  out.checkpoint.params = capture(head.params(), res.ema);
  model::swap_values(head.params(), res.ema);
  out.heldout_after = velocity_heldout(head, te.a, zt, grid, seed).first;
  out.log = std::move(res.log);
  out.seconds = seconds_since(t0);
  return out;
}

template <class S>
double fno_heldout(const model::FnoBaseline<S>& fno, const PairSet& te, const std::vector<int>& grid) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < te.a.rows(); ++i) {
    const Eigen::RowVectorXd ai = te.a.row(i);
    const auto y = fno.predict(std::span<const double>(ai.data(), static_cast<std::size_t>(ai.size())), grid);
    for (Eigen::Index p = 0; p < te.u.cols(); ++p) total += std::pow(y[static_cast<std::size_t>(p)] - te.u(i, p), 2);
  }
  return total / static_cast<double>(te.u.size());
}

template <class S>
StageResult fno_stage(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = train.grid_int();
  const auto fcfg = fno_config(cfg, static_cast<int>(grid.size()));
  model::FnoBaseline<S> fno(fcfg, grid);
  Rng init(cfg.seed("run.seed"), Stream::init, 3);
  fno.init(init);
  const auto [tr, val] = split_validation(train, cfg.real("train_fno.validation"));
  const PairSet te = make_pairs(test, 1);
  std::function<double()> validate;
  if (val.a.rows() > 0) validate = [&, &val = val] { return fno_heldout(fno, val, grid); };
  StageResult out;
  out.heldout_before = fno_heldout(fno, te, grid);
  out.heldout_baseline = te.u.squaredNorm() / static_cast<double>(te.u.size());
  auto res = model::fit<S>(
      fno.params(), static_cast<std::size_t>(tr.a.rows()), train_config(cfg, "train_fno", verbose),
      [&](Tape<S>& tape, const std::vector<std::size_t>& idx, Rng&) {
        return fno.loss(tape, model::gather_fields<S>(tr.a, idx), model::gather_fields<S>(tr.u, idx),
                        static_cast<int>(idx.size()), grid);
      },
      "train-fno", validate);
  out.checkpoint = base_checkpoint(io::ModelKind::fno, scalar_bytes<S>(), cfg, {"run", "fno", "train_fno"}, train);
  out.checkpoint.arch = fno_arch(fcfg, grid);
  out.checkpoint.params = capture(fno.params(), res.ema);
  model::swap_values(fno.params(), res.ema);
  out.heldout_after = fno_heldout(fno, te, grid);
  out.log = std::move(res.log);
  out.seconds = seconds_since(t0);
  return out;
}

metrics::Cloud truth_cloud(const io::Dataset& test, std::size_t i) {
  const std::size_t rows = test.layout == io::Layout::pairs ? test.per_input : 1;
  metrics::Cloud c(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(test.points()));
  for (std::size_t j = 0; j < rows; ++j) {
    const auto y = test.output(i, j);
    c.row(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::RowVectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  }
  return c;
}

Eigen::RowVectorXd column_std(const metrics::Cloud& c) {
  const Eigen::RowVectorXd mu = c.colwise().mean();
  return ((c.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(c.rows())).sqrt().matrix();
}

EvalResult run_eval(const std::string& name, const io::Dataset& test, const EvalOptions& opt,
                    const std::function<metrics::Cloud(std::size_t)>& predict) {
  if (opt.members < 1) throw ConfigError("eval.members must be >= 1");
  EvalResult r;
  r.report.model = name;
  r.report.directions = opt.directions;
  r.report.seed = opt.seed;
  for (std::size_t i = 0; i < test.count; ++i) {
    const metrics::Cloud truth = truth_cloud(test, i);
    const metrics::Cloud pred = predict(i);
    if (!pred.allFinite()) throw NumericsError(name + " produced non-finite fields for condition " + std::to_string(i));
    Rng proj(opt.seed, Stream::projections, i);
    r.report.conditions.push_back(metrics::evaluate_condition(pred, truth, opt.directions, proj));
    if (opt.keep_fields) {
      r.fields.push_back({pred.colwise().mean(), column_std(pred), truth.colwise().mean(), column_std(truth)});
    }
  }
  return r;
}

double average_rank_corr(std::vector<double> x, std::vector<double> y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t lo = 0; lo < order.size();) {
      std::size_t hi = lo;
      while (hi + 1 < order.size() && v[order[hi + 1]] == v[order[lo]]) ++hi;
      for (std::size_t k = lo; k <= hi; ++k) r[order[k]] = 0.5 * static_cast<double>(lo + hi);
      lo = hi + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  return pearson(Eigen::Map<const Eigen::RowVectorXd>(rx.data(), static_cast<Eigen::Index>(rx.size())),
                 Eigen::Map<const Eigen::RowVectorXd>(ry.data(), static_cast<Eigen::Index>(ry.size())));
}

}  // namespace

PairSet make_pairs(const io::Dataset& d, std::size_t limit) {
  d.validate();
  const auto& n = d.norm;
  const std::size_t per = limit == 0 ? d.per_input : std::min(limit, d.per_input);
  const auto p = static_cast<Eigen::Index>(d.points());
  PairSet s;
  s.a.resize(static_cast<Eigen::Index>(d.count * per), p);
  s.u.resize(s.a.rows(), p);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < d.count; ++i) {
    for (std::size_t j = 0; j < per; ++j, ++row) {
      if (d.layout == io::Layout::pairs) {
        normalize_into(d.input(i), n.input_mean, n.input_std, s.a.row(row));
      } else {
        normalize_into(j == 0 ? d.input(i) : d.output(i, j - 1), n.input_mean, n.input_std, s.a.row(row));
      }
      normalize_into(d.output(i, j), n.output_mean, n.output_std, s.u.row(row));
    }
  }
  return s;
}

model::TrainConfig train_config(const RunConfig& cfg, const std::string& section, bool verbose) {
  model::TrainConfig t;
  t.epochs = static_cast<int>(cfg.integer(section + ".epochs"));
  t.batch_size = static_cast<int>(cfg.integer(section + ".batch"));
  t.lr = cfg.real(section + ".lr");
  t.weight_decay = cfg.real(section + ".weight_decay");
  t.clip = cfg.real(section + ".clip");
  t.ema_decay = cfg.real(section + ".ema_decay");
  t.patience = static_cast<int>(cfg.integer(section + ".patience"));
  t.seed = cfg.seed("run.seed");
  t.verbose = verbose;
  return t;
}

StageResult train_encoder(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose) {
  return with_precision(cfg.str("run.precision"), [&](auto tag) {
    return encoder_stage<decltype(tag)>(cfg, train, test, verbose);
  });
}

StageResult train_dll(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test,
                      const io::Checkpoint& encoder, bool verbose) {
  require_kind(encoder, io::ModelKind::encoder);
  const auto digest = io::dataset_digest(train);
  if (encoder.dataset_digest != digest) {
    throw DigestError("encoder was trained on dataset " + to_hex(encoder.dataset_digest) + ", not " + to_hex(digest));
  }
  return with_precision(cfg.str("run.precision"), [&](auto tag) {
    return dll_stage<decltype(tag)>(cfg, train, test, encoder, verbose);
  });
}

StageResult train_fno(const RunConfig& cfg, const io::Dataset& train, const io::Dataset& test, bool verbose) {
  return with_precision(cfg.str("run.precision"), [&](auto tag) {
    return fno_stage<decltype(tag)>(cfg, train, test, verbose);
  });
}

void write_training_curve(const model::TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss,lr,validation\n";
  out.precision(10);
  for (std::size_t e = 0; e < log.epoch_loss.size(); ++e) {
    out << e + 1 << ',' << log.epoch_loss[e] << ',' << log.lr[e] << ',';
    if (e < log.validation.size()) out << log.validation[e];
    out << '\n';
  }
}

void check_dataset(const io::Checkpoint& ckpt, const io::Dataset& d) {
  if (ckpt.meta.find(data_tag(d)) == std::string::npos) {
    throw DigestError(io::model_kind_name(ckpt.kind) + " checkpoint was not trained on data from generator config " +
                      to_hex(d.config_digest));
  }
  const auto dim = static_cast<std::size_t>(ckpt.arch.empty() ? 0 : ckpt.arch[0]);
  if (dim != d.grid.size() || ckpt.arch.size() < dim) throw DigestError("checkpoint grid rank does not match dataset");
  for (std::size_t k = 0; k < dim; ++k) {
    if (static_cast<std::size_t>(ckpt.arch[ckpt.arch.size() - dim + k]) != d.grid[k]) {
      throw DigestError("checkpoint grid does not match dataset grid");
    }
  }
}

EnsembleSampler make_dll_sampler(const io::Checkpoint& encoder, const io::Checkpoint& dll, int steps) {
  require_kind(encoder, io::ModelKind::encoder);
  require_kind(dll, io::ModelKind::dll);
  if (dll.upstream_digest != io::checkpoint_digest(encoder)) {
    throw DigestError("DLL was trained on encoder " + to_hex(dll.upstream_digest) + ", not " +
                      to_hex(io::checkpoint_digest(encoder)));
  }
  if (steps < 1) throw ConfigError("sampler steps must be >= 1");
  return with_scalar_bytes(dll.scalar_bytes, [&](auto tag) -> EnsembleSampler {
    using S = decltype(tag);
    std::shared_ptr<const model::OperatorEncoder<S>> enc = load_encoder<S>(encoder);
    auto scaling = std::make_shared<model::LatentScaling>();
    std::shared_ptr<const model::DllHead<S>> head = load_dll<S>(dll, *scaling);
    return [enc, head, scaling, steps](std::span<const double> a, int members, const Rng& rng, std::uint64_t first) {
      return model::sample_fields(*enc, *head, *scaling, a, enc->grid(), members, steps, rng, first);
    };
  });
}

PointPredictor make_fno_predictor(const io::Checkpoint& fno) {
  return with_scalar_bytes(fno.scalar_bytes, [&](auto tag) -> PointPredictor {
    using S = decltype(tag);
    std::shared_ptr<const model::FnoBaseline<S>> m = load_fno<S>(fno);
    return [m](std::span<const double> a) { return m->predict(a, m->grid()); };
  });
}

EvalResult evaluate_sampler(const std::string& name, const EnsembleSampler& sampler, const io::Dataset& test,
                            const EvalOptions& opt) {
  const auto& n = test.norm;
  return run_eval(name, test, opt, [&](std::size_t i) {
    const auto a = normalized(test.input(i), n.input_mean, n.input_std);
    const FieldMatrix z = sampler(a, opt.members, Rng(opt.seed, Stream::noise, i), 0);
    return metrics::Cloud((z.array() * n.output_std + n.output_mean).matrix());
  });
}

EvalResult evaluate_predictor(const std::string& name, const PointPredictor& predictor, const io::Dataset& test,
                              const EvalOptions& opt) {
  const auto& n = test.norm;
  return run_eval(name, test, opt, [&](std::size_t i) {
    const auto y = predictor(normalized(test.input(i), n.input_mean, n.input_std));
    Eigen::RowVectorXd row = Eigen::Map<const Eigen::RowVectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    row = (row.array() * n.output_std + n.output_mean).matrix();
    return metrics::Cloud(row.replicate(opt.members, 1));
  });
}

EvalResult evaluate_self(const io::Dataset& test, const EvalOptions& opt) {
  return run_eval("truth", test, opt, [&](std::size_t i) { return truth_cloud(test, i); });
}

double pearson(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) throw UsageError("correlation needs two equal-length vectors");
  const Eigen::RowVectorXd dx = x.array() - x.mean(), dy = y.array() - y.mean();
  const double den = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  return den > 0.0 ? dx.dot(dy) / den : 0.0;
}

double std_map_correlation(const EvalResult& r) {
  if (r.fields.empty()) throw UsageError("field statistics were not kept");
  double s = 0.0;
  for (const auto& f : r.fields) s += pearson(f.pred_std, f.truth_std);
  return s / static_cast<double>(r.fields.size());
}

void write_field_dump(const EvalResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  out << "condition,point,pred_mean,pred_std,truth_mean,truth_std\n";
  for (std::size_t c = 0; c < r.fields.size(); ++c) {
    const auto& f = r.fields[c];
    for (Eigen::Index p = 0; p < f.pred_mean.size(); ++p) {
      out << c << ',' << p << ',' << f.pred_mean(p) << ',' << f.pred_std(p) << ',' << f.truth_mean(p) << ','
          << f.truth_std(p) << '\n';
    }
  }
}

metrics::Cloud trajectory_truth(const io::Dataset& test, std::size_t i) {
  if (test.layout != io::Layout::trajectories) throw UsageError("rollout needs a trajectory dataset");
  metrics::Cloud c(static_cast<Eigen::Index>(test.per_input + 1), static_cast<Eigen::Index>(test.points()));
  const auto x0 = test.input(i);
  c.row(0) = Eigen::Map<const Eigen::RowVectorXd>(x0.data(), c.cols());
  for (std::size_t j = 0; j < test.per_input; ++j) {
    c.row(static_cast<Eigen::Index>(j + 1)) = Eigen::Map<const Eigen::RowVectorXd>(test.output(i, j).data(), c.cols());
  }
  return c;
}

namespace {

std::vector<rollout::RolloutRecord> run_rollouts(const io::Dataset& test, const RolloutOptions& opt, int members,
                                                 const std::function<rollout::StepModel(std::size_t)>& model_for) {
  const std::size_t count = opt.trajectories == 0 ? test.count : std::min(opt.trajectories, test.count);
  rollout::RolloutConfig rc;
  rc.horizon = opt.horizon;
  rc.members = members;
  std::vector<rollout::RolloutRecord> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(rollout::closed_loop(model_for(i), trajectory_truth(test, i), rc));
  return out;
}

}  // namespace

std::vector<rollout::RolloutRecord> rollout_sampler(const EnsembleSampler& sampler, const io::Dataset& test,
                                                    const RolloutOptions& opt) {
  const auto n = test.norm;
  return run_rollouts(test, opt, opt.members, [&](std::size_t i) -> rollout::StepModel {
    const Rng base(opt.seed, Stream::noise, i);
    return [&sampler, n, base](std::span<const double> state, std::size_t member, std::size_t step) {
      const auto a = normalized(state, n.input_mean, n.input_std);
      const FieldMatrix z = sampler(a, 1, base.substream(step), member);
      std::vector<double> y(static_cast<std::size_t>(z.cols()));
      for (std::size_t p = 0; p < y.size(); ++p) y[p] = z(0, static_cast<Eigen::Index>(p)) * n.output_std + n.output_mean;
      return y;
    };
  });
}

std::vector<rollout::RolloutRecord> rollout_predictor(const PointPredictor& predictor, const io::Dataset& test,
                                                      const RolloutOptions& opt) {
  const auto n = test.norm;
  return run_rollouts(test, opt, 1, [&](std::size_t) -> rollout::StepModel {
    return [&predictor, n](std::span<const double> state, std::size_t, std::size_t) {
      auto y = predictor(normalized(state, n.input_mean, n.input_std));
      for (auto& v : y) v = v * n.output_std + n.output_mean;
      return y;
    };
  });
}

std::vector<rollout::RolloutRecord> rollout_perfect(const io::Dataset& test, const RolloutOptions& opt) {
  return run_rollouts(test, opt, opt.members, [&](std::size_t i) -> rollout::StepModel {
    auto truth = std::make_shared<const metrics::Cloud>(trajectory_truth(test, i));
    return [truth](std::span<const double>, std::size_t, std::size_t step) {
      const Eigen::RowVectorXd row = truth->row(static_cast<Eigen::Index>(step));
      return std::vector<double>(row.data(), row.data() + row.size());
    };
  });
}

double trend_spearman(const std::vector<double>& y) {
  std::vector<double> x(y.size());
  std::iota(x.begin(), x.end(), 0.0);
  return average_rank_corr(x, y);
}

}  // namespace dllab::pipeline
