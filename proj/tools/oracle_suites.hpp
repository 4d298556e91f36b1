#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace dllab::oracles {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

SuiteResult gradient_suite();
SuiteResult solver_order_suite();
SuiteResult darcy_suite();
/// Random-subspace search against the KL truncation on 6-dimensional ensembles.
SuiteResult kl_subspace_suite();
/// Gram-optimal coefficients never lose to the coefficient network, on
/// randomly initialized encoders.
SuiteResult projection_suite();
SuiteResult flow_suite();
SuiteResult stability_suite();
SuiteResult metrics_suite();

/// Times `body`, which fills pass and detail; over `limit_seconds` fails.
SuiteResult timed(const std::string& name, double limit_seconds, const std::function<void(SuiteResult&)>& body);

std::string status_line(const SuiteResult& r);

/// Runs every property suite, printing one line each.
std::vector<SuiteResult> run_property_suites(std::ostream& out);

}  // namespace dllab::oracles
