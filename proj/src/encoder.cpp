#include "dllab/model/encoder.hpp"

namespace dllab::model {

std::vector<double> reconstruct(std::span<const double> xi, const std::vector<std::vector<double>>& phi) {
  if (xi.size() != phi.size()) throw UsageError("coefficient count does not match basis size");
  if (phi.empty()) throw UsageError("empty basis");
  std::vector<double> u(phi.front().size(), 0.0);
  for (std::size_t k = 0; k < phi.size(); ++k) {
    if (phi[k].size() != u.size()) throw UsageError("basis fields differ in length");
    for (std::size_t p = 0; p < u.size(); ++p) u[p] += xi[k] * phi[k][p];
  }
  return u;
}

}  // namespace dllab::model
