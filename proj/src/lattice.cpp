#include "qtraj/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace qtraj {

void LatticeSpec::validate() const {
  if (n_sites < 1) throw ConfigError("lattice.n_sites must be >= 1");
  if (!std::isfinite(coupling)) throw ConfigError("lattice.coupling must be finite");
}

Mat build_hamiltonian(const LatticeSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    h(i + 1, i) = spec.coupling;
    h(i, i + 1) = spec.coupling;
  }
  return h;
}

EigenSystem analytic_eigensystem(const LatticeSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  const double denom = n + 1.0;
  EigenSystem es;
  es.energies.resize(n);
  es.states.resize(n, n);
  es.parity.resize(n);
  const double norm = std::sqrt(2.0 / denom);
  for (int k = 1; k <= n; ++k) {
    es.energies(k - 1) = 2.0 * spec.coupling * std::cos(std::numbers::pi * k / denom);
    es.parity[k - 1] = (k % 2 == 1) ? Parity::Even : Parity::Odd;
    for (int site = 1; site <= n; ++site)
      es.states(site - 1, k - 1) = norm * std::sin(std::numbers::pi * k * site / denom);
  }
  return es;
}

EigenSystem numeric_eigensystem(const Mat& h) {
  require_square(h, "numeric_eigensystem");
  if (!is_hermitian(h, 1e-12)) throw DimensionError("numeric_eigensystem: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  const int n = static_cast<int>(h.rows());
  // ascending from Eigen; the band convention is descending when the nearest
  // hop amplitude is positive
  const bool descending = (n == 1) || h(0, 1).real() >= 0.0;
  EigenSystem es;
  es.energies.resize(n);
  es.states.resize(n, n);
  es.parity.resize(n);
  for (int j = 0; j < n; ++j) {
    const int src = descending ? n - 1 - j : j;
    es.energies(j) = solver.eigenvalues()(src);
    es.states.col(j) = solver.eigenvectors().col(src);
    es.parity[j] = (j % 2 == 0) ? Parity::Even : Parity::Odd;
  }
  return es;
}

Mat site_projector(const LatticeSpec& spec, const std::vector<int>& sites) {
  spec.validate();
  if (sites.empty()) throw ConfigError("site_projector: empty site set");
  Mat p = Mat::Zero(spec.n_sites, spec.n_sites);
  std::set<int> seen;
  for (int s : sites) {
    if (s < 1 || s > spec.n_sites)
      throw ConfigError("site_projector: site " + std::to_string(s) + " out of range 1.." +
                        std::to_string(spec.n_sites));
    if (seen.insert(s).second) p(s - 1, s - 1) = 1.0;
  }
  return p;
}

}  // namespace qtraj
