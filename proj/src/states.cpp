#include "qtraj/states.hpp"

#include <cmath>

namespace qtraj {

Mat pure_state_on_site(const LatticeSpec& spec, int site) {
  spec.validate();
  if (site < 1 || site > spec.n_sites)
    throw ConfigError("pure_state_on_site: site out of range");
  Mat rho = Mat::Zero(spec.n_sites, spec.n_sites);
  rho(site - 1, site - 1) = 1.0;
  return rho;
}

Mat eigenstate_density(const EigenSystem& es, int k) {
  if (k < 1 || k > es.n()) throw ConfigError("eigenstate_density: k out of range");
  const Vec w = es.states.col(k - 1);
  return w * w.adjoint();
}

Mat thermal_state(const Mat& h, double beta) {
  require_square(h, "thermal_state");
  if (!is_hermitian(h, 1e-12)) throw DimensionError("thermal_state: h not Hermitian");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw ConfigError("thermal_state: beta must be finite and >= 0");
  Eigen::SelfAdjointEigenSolver<Mat> solver(h);
  const RVec e = solver.eigenvalues();
  const double e_min = e.minCoeff();
  RVec w = (-(beta * (e.array() - e_min))).exp();
  w /= w.sum();
  return solver.eigenvectors() * w.asDiagonal() * solver.eigenvectors().adjoint();
}

double expectation(const Mat& o, const Mat& rho) {
  require_same_dim(o, rho, "expectation");
  const Complex t = (o * rho).trace();
  if (std::abs(t.imag()) > 1e-8)
    throw std::runtime_error("expectation: imaginary part " + std::to_string(t.imag()));
  return t.real();
}

double purity(const Mat& rho) {
  require_square(rho, "purity");
  return (rho * rho).trace().real();
}

ParityWeights parity_weights(const Mat& rho, const EigenSystem& es) {
  if (rho.rows() != es.states.rows()) throw DimensionError("parity_weights: dimension mismatch");
  ParityWeights w;
  for (int j = 0; j < es.n(); ++j) {
    const Vec wk = es.states.col(j);
    const double q = (wk.adjoint() * rho * wk)(0, 0).real();
    if (es.parity[j] == Parity::Odd)
      w.odd += q;
    else
      w.even += q;
  }
  return w;
}

Vec vectorize(const Mat& m) {
  require_square(m, "vectorize");
  return Eigen::Map<const Vec>(m.data(), m.size());
}

Mat devectorize(const Vec& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (n * n != v.size()) throw DimensionError("devectorize: length is not a perfect square");
  return Eigen::Map<const Mat>(v.data(), n, n);
}

double min_eigenvalue(const Mat& hermitian) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(hermitian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void validate_density(const Mat& rho, double herm_tol, double trace_tol, double psd_tol) {
  require_square(rho, "validate_density");
  if (hermiticity_error(rho) > herm_tol)
    throw std::runtime_error("density matrix not Hermitian within tolerance");
  if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol)
    throw std::runtime_error("density matrix trace differs from 1");
  if (min_eigenvalue((rho + rho.adjoint()) / 2.0) < -psd_tol)
    throw std::runtime_error("density matrix has an eigenvalue below the positivity tolerance");
}

}  // namespace qtraj
