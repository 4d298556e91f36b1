#include "dllab/rollout/rollout.hpp"

#include <cmath>

#include "dllab/core/error.hpp"

namespace dllab::rollout {

StepMetrics RolloutRecord::average() const {
  StepMetrics m;
  if (steps.size() < 2) return m;
  for (std::size_t t = 1; t < steps.size(); ++t) {
    m.nrmse += steps[t].nrmse;
    m.crps += steps[t].crps;
    m.ssr += steps[t].ssr;
  }
  const auto n = static_cast<double>(steps.size() - 1);
  m.nrmse /= n;
  m.crps /= n;
  m.ssr /= n;
  return m;
}

StepMetrics step_metrics(const Cloud& ensemble, const Eigen::RowVectorXd& truth) {
  const Cloud y = truth;
  return {metrics::nrmse_mean(ensemble, y), metrics::crps(ensemble, truth), metrics::ssr(ensemble, truth)};
}

RolloutRecord closed_loop(const StepModel& model, const Cloud& truth, const RolloutConfig& cfg) {
  if (cfg.horizon < 1 || cfg.members < 1) throw ConfigError("rollout needs horizon >= 1 and members >= 1");
  if (truth.rows() < 1) throw UsageError("rollout needs an initial condition");
  const Eigen::Index p = truth.cols();
  const int horizon = std::min<int>(cfg.horizon, static_cast<int>(truth.rows()) - 1);
  Cloud state = truth.row(0).replicate(cfg.members, 1);
  RolloutRecord rec;
  rec.steps.push_back(step_metrics(state, truth.row(0)));
  if (cfg.keep_ensembles) rec.ensembles.push_back(state);
  for (int t = 1; t <= horizon; ++t) {
    Cloud next(cfg.members, p);
    bool finite = true;
    for (int m = 0; m < cfg.members && finite; ++m) {
      std::vector<double> out;
      try {
        out = model(std::span<const double>(state.row(m).data(), static_cast<std::size_t>(p)),
                    static_cast<std::size_t>(m), static_cast<std::size_t>(t));
      } catch (const NumericsError&) {
        finite = false;
        break;
      }
      if (static_cast<Eigen::Index>(out.size()) != p) throw UsageError("rollout model changed the field size");
      for (Eigen::Index i = 0; i < p; ++i) next(m, i) = out[static_cast<std::size_t>(i)];
      finite = next.row(m).allFinite();
    }
    if (!finite) {
      rec.truncated = true;
      rec.truncated_at = t;
      break;
    }
    state = std::move(next);
    rec.steps.push_back(step_metrics(state, truth.row(t)));
    if (cfg.keep_ensembles) rec.ensembles.push_back(state);
  }
  return rec;
}

RolloutSummary aggregate(const std::vector<RolloutRecord>& records) {
  if (records.empty()) throw UsageError("aggregate needs at least one rollout record");
  RolloutSummary s;
  for (const auto& r : records) {
    if (r.steps.size() > s.curve.size()) {
      s.curve.resize(r.steps.size());
      s.counts.resize(r.steps.size(), 0);
    }
    for (std::size_t t = 0; t < r.steps.size(); ++t) {
      s.curve[t].nrmse += r.steps[t].nrmse;
      s.curve[t].crps += r.steps[t].crps;
      s.curve[t].ssr += r.steps[t].ssr;
      ++s.counts[t];
    }
    const StepMetrics a = r.average();
    s.average.nrmse += a.nrmse;
    s.average.crps += a.crps;
    s.average.ssr += a.ssr;
    s.truncated += r.truncated ? 1 : 0;
  }
  for (std::size_t t = 0; t < s.curve.size(); ++t) {
    const double c = s.counts[t];
    s.curve[t].nrmse /= c;
    s.curve[t].crps /= c;
    s.curve[t].ssr /= c;
  }
  const auto n = static_cast<double>(records.size());
  s.average.nrmse /= n;
  s.average.crps /= n;
  s.average.ssr /= n;
  return s;
}

void write_curve_csv(std::ostream& out, const std::string& model, const RolloutSummary& summary, bool header) {
  out.precision(10);
  if (header) out << "model,step,NRMSE,CRPS,SSR,count\n";
  for (std::size_t t = 0; t < summary.curve.size(); ++t) {
    const auto& m = summary.curve[t];
    out << model << ',' << t << ',' << m.nrmse << ',' << m.crps << ',' << m.ssr << ',' << summary.counts[t] << '\n';
  }
}

void write_records_csv(std::ostream& out, const std::string& model, const std::vector<RolloutRecord>& records,
                       bool header) {
  out.precision(10);
  if (header) out << "model,trajectory,NRMSE,CRPS,SSR,steps,truncated_at\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const StepMetrics a = records[i].average();
    out << model << ',' << i << ',' << a.nrmse << ',' << a.crps << ',' << a.ssr << ','
        << records[i].steps.size() - 1 << ',' << records[i].truncated_at << '\n';
  }
  const StepMetrics m = aggregate(records).average;
  out << model << ",mean," << m.nrmse << ',' << m.crps << ',' << m.ssr << ",,\n";
}

}  // namespace dllab::rollout
