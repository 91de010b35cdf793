#include "qtraj/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <omp.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qtraj {

LiouvilleOperator build_liouvillian(const Mat& h, const ProbeConfig& probe) {
  probe.validate();
  require_same_dim(h, probe.observable, "build_liouvillian");
  if (!is_hermitian(h, 1e-12)) throw DimensionError("build_liouvillian: h not Hermitian");
  const int n = static_cast<int>(h.rows());
  const Mat id = Mat::Identity(n, n);
  const Mat& o = probe.observable;
  const Mat oo = o.adjoint() * o;
  // column stacking: vec(A X B) = (B^T kron A) vec(X)
  Mat g = Complex(0, -1) * (Eigen::kroneckerProduct(id, h) -
                            Eigen::kroneckerProduct(h.transpose(), id));
  g += probe.strength * (2.0 * Eigen::kroneckerProduct(o.conjugate(), o) -
                         Eigen::kroneckerProduct(id, oo) -
                         Eigen::kroneckerProduct(oo.transpose(), id));
  return {std::move(g), h, o, probe.strength, n};
}

Mat apply_liouvillian(const Mat& h, const ProbeConfig& probe, const Mat& rho) {
  const Mat& o = probe.observable;
  const Mat oo = o.adjoint() * o;
  return Complex(0, -1) * (h * rho - rho * h) +
         probe.strength * (2.0 * o * rho * o.adjoint() - oo * rho - rho * oo);
}

Mat lindblad_propagate(const LiouvilleOperator& liou, const Mat& rho0, double t) {
  if (t < 0) throw ConfigError("lindblad_propagate: t must be >= 0");
  require_same_dim(liou.h, rho0, "lindblad_propagate");
  if (t == 0.0) return rho0;
  const Mat p = (liou.generator * t).exp();
  Mat out = devectorize(p * vectorize(rho0));
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace().real();
  return out;
}

std::vector<Mat> lindblad_propagate_grid(const LiouvilleOperator& liou, const Mat& rho0,
                                         const std::vector<double>& times) {
  require_same_dim(liou.h, rho0, "lindblad_propagate_grid");
  std::vector<Mat> out;
  out.reserve(times.size());
  bool uniform = times.size() >= 2;
  const double d0 = times.size() >= 2 ? times[1] - times[0] : 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (std::abs((times[i + 1] - times[i]) - d0) > 1e-12 * std::max(1.0, std::abs(d0)))
      uniform = false;
  if (uniform && !times.empty() && times.front() == 0.0 && d0 > 0.0) {
    const Mat p = (liou.generator * d0).exp();
    Vec v = vectorize(rho0);
    for (std::size_t i = 0; i < times.size(); ++i) {
      Mat m = devectorize(v);
      m = 0.5 * (m + m.adjoint()).eval();
      m /= m.trace().real();
      out.push_back(std::move(m));
      if (i + 1 < times.size()) v = p * v;
    }
  } else {
    for (double t : times) out.push_back(lindblad_propagate(liou, rho0, t));
  }
  return out;
}

namespace {

struct KernelSpaces {
  Mat right;  // columns span ker L
  Mat left;   // columns span ker L^dag (conserved functionals)
  Eigen::PartialPivLU<Mat> overlap;
  int dim = 0;
};

KernelSpaces kernel_spaces(const Mat& g) {
  Eigen::BDCSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double tol = s(0) * 1e-12 * static_cast<double>(g.rows());
  int dim = 0;
  for (Eigen::Index i = s.size() - 1; i >= 0 && s(i) <= tol; --i) ++dim;
  if (dim == 0) dim = 1;  // a Lindblad generator always has a fixed point
  KernelSpaces ks;
  ks.dim = dim;
  ks.right = svd.matrixV().rightCols(dim);
  ks.left = svd.matrixU().rightCols(dim);
  ks.overlap.compute(ks.left.adjoint() * ks.right);
  return ks;
}

Mat finalize_state(Mat m) {
  m = 0.5 * (m + m.adjoint()).eval();
  const double tr = m.trace().real();
  if (std::abs(tr) < 1e-12) throw std::runtime_error("steady state has vanishing trace");
  m /= tr;
  return m;
}

}  // namespace

int kernel_dimension(const LiouvilleOperator& liou) {
  return kernel_spaces(liou.generator).dim;
}

Mat steady_state(const LiouvilleOperator& liou) {
  const KernelSpaces ks = kernel_spaces(liou.generator);
  if (ks.dim != 1) throw DegenerateSteadyState(ks.dim);
  return finalize_state(devectorize(ks.right.col(0)));
}

Mat steady_state(const LiouvilleOperator& liou, const Mat& rho0) {
  require_same_dim(liou.h, rho0, "steady_state");
  const KernelSpaces ks = kernel_spaces(liou.generator);
  const Vec c = ks.overlap.solve(ks.left.adjoint() * vectorize(rho0));
  return finalize_state(devectorize(ks.right * c));
}

LiouvilleSpectrum liouvillian_spectrum(const LiouvilleOperator& liou) {
  Eigen::ComplexEigenSolver<Mat> ces(liou.generator);
  LiouvilleSpectrum out;
  out.eigenvalues = ces.eigenvalues();
  out.modes = ces.eigenvectors();  // unit columns = Hilbert-Schmidt normalized
  return out;
}

namespace {

SpectrumEstimate resolvent_spectrum_impl(const LiouvilleOperator& liou, const Mat& observable,
                                         const Mat& rho_ss, const RVec& omegas, int n_threads,
                                         bool parallel) {
  require_same_dim(liou.h, observable, "steady_state_spectrum");
  require_same_dim(liou.h, rho_ss, "steady_state_spectrum");
  const Vec lr = liou.generator * vectorize(rho_ss);
  if (lr.cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, liou.generator.cwiseAbs().maxCoeff()))
    throw std::runtime_error("steady_state_spectrum: rho_ss is not stationary");

  const double avg = (observable * rho_ss).trace().real();
  const Mat src = observable * rho_ss + rho_ss * observable - 2.0 * avg * rho_ss;
  const Vec xv = vectorize(src);
  const Vec ov = vectorize(observable);
  const double xnorm = std::max(xv.norm(), 1e-300);

  // kernel bases for grid points where (i omega - L) is singular
  const KernelSpaces ks = kernel_spaces(liou.generator);

  SpectrumEstimate est;
  est.omegas = omegas;
  est.values.resize(omegas.size());
  est.kind = SpectrumKind::SteadyState;
  est.meta.strength = liou.strength;

  const int nt = n_threads > 0 ? n_threads : omp_get_max_threads();
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(nt) if (parallel)
  for (Eigen::Index i = 0; i < omegas.size(); ++i) {
    try {
      Mat a = -liou.generator;
      a.diagonal().array() += Complex(0.0, omegas(i));
      Eigen::PartialPivLU<Mat> lu(a);
      Vec y = lu.solve(xv);
      const double resid = (a * y - xv).norm() / xnorm;
      // a singular matrix can still yield a small residual when the source
      // is consistent, with arbitrary kernel admixture in y; rcond catches it
      if (!std::isfinite(resid) || resid > 1e-8 || lu.rcond() < 1e-10) {
        // singular grid point: project the source onto the range and the
        // solution off the kernel (invariant complement on both sides)
        const Vec xp = xv - ks.right * ks.overlap.solve(ks.left.adjoint() * xv);
        y = a.completeOrthogonalDecomposition().solve(xp);
        y -= ks.right * ks.overlap.solve(ks.left.adjoint() * y);
      }
      est.values(i) = ov.dot(y).real() / (4.0 * M_PI);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return est;
}

}  // namespace

SpectrumEstimate steady_state_spectrum(const LiouvilleOperator& liou, const Mat& observable,
                                       const Mat& rho_ss, const RVec& omegas, int n_threads) {
  return resolvent_spectrum_impl(liou, observable, rho_ss, omegas, n_threads, true);
}

SpectrumEstimate steady_state_spectrum_serial(const LiouvilleOperator& liou,
                                              const Mat& observable, const Mat& rho_ss,
                                              const RVec& omegas) {
  return resolvent_spectrum_impl(liou, observable, rho_ss, omegas, 1, false);
}

double perturbative_rate(const EigenSystem& es, const std::vector<int>& sites, double strength,
                         int i, int j) {
  const int n = es.n();
  if (i < 1 || i > n || j < 1 || j > n) throw ConfigError("perturbative_rate: index out of range");
  auto site_weight = [&](int k) {
    double p = 0;
    for (int s : sites) p += std::norm(es.states(s - 1, k - 1));
    return p;
  };
  const double pi = site_weight(i), pj = site_weight(j);
  return strength * (pi + pj - 2.0 * pi * pj);
}

SpectrumEstimate perturbative_spectrum(const EigenSystem& es, const std::vector<int>& sites,
                                       double strength, const Mat& rho_ss, const RVec& omegas) {
  const int n = es.n();
  if (rho_ss.rows() != n) throw DimensionError("perturbative_spectrum: dimension mismatch");
  SpectrumEstimate est;
  est.omegas = omegas;
  est.values = RVec::Zero(omegas.size());
  est.kind = SpectrumKind::Perturbative;
  est.meta.strength = strength;
  est.meta.probe_sites = sites;

  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const double gamma = perturbative_rate(es, sites, strength, i, j);
      if (gamma <= 1e-14 * std::max(strength, 1.0)) continue;
      Complex amp = 0;
      for (int s : sites)
        for (int m : sites)
          amp += std::conj(es.states(s - 1, j - 1)) * es.states(m - 1, i - 1) *
                 rho_ss(s - 1, m - 1);
      const double a = gamma * amp.real();
      const double wij = es.energies(i - 1) - es.energies(j - 1);
      est.values.array() += a / ((omegas.array() - wij).square() + gamma * gamma);
    }
  }
  return est;
}

SpectrumEstimate scale_to_reference(const SpectrumEstimate& est, const SpectrumEstimate& ref) {
  if (est.omegas.size() != ref.omegas.size() ||
      (est.omegas - ref.omegas).cwiseAbs().maxCoeff() > 1e-12)
    throw DimensionError("scale_to_reference: grids differ");
  const double denom = est.values.squaredNorm();
  const double alpha = denom > 0 ? est.values.dot(ref.values) / denom : 0.0;
  SpectrumEstimate out = est;
  out.values *= alpha;
  return out;
}

EffectiveModes effective_modes(const Mat& h, const ProbeConfig& probe) {
  probe.validate();
  require_same_dim(h, probe.observable, "effective_modes");
  const Mat ht = h - Complex(0, probe.strength) * probe.observable;
  Eigen::ComplexEigenSolver<Mat> ces(ht);
  const int n = static_cast<int>(h.rows());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(ces.eigenvalues()(a).imag()) < std::abs(ces.eigenvalues()(b).imag());
  });
  EffectiveModes out;
  out.values.resize(n);
  out.states.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = ces.eigenvalues()(order[i]);
    out.states.col(i) = ces.eigenvectors().col(order[i]);
  }
  return out;
}

double zeno_rate(const LatticeSpec& spec, int probe_site, double strength) {
  spec.validate();
  if (probe_site < 1 || probe_site > spec.n_sites)
    throw ConfigError("zeno_rate: site out of range");
  if (!(strength > 0)) throw ConfigError("zeno_rate: strength must be > 0");
  const Mat h = build_hamiltonian(spec);
  const int s = probe_site - 1;
  double h2 = 0;
  for (int m = 0; m < spec.n_sites; ++m) h2 += std::norm(h(m, s));
  const double mean = h(s, s).real();
  const double var = h2 - mean * mean;  // tau0^{-2}
  return 4.0 * var / strength;
}

double fit_exponential_decay(const std::vector<double>& times, const std::vector<double>& values,
                             double y_inf) {
  if (times.size() != values.size() || times.size() < 3)
    throw ConfigError("fit_exponential_decay: need matching grids with >= 3 points");
  const double y0 = values.front() - y_inf;
  if (!(y0 > 0)) throw ConfigError("fit_exponential_decay: no decaying component");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double y = (values[i] - y_inf) / y0;
    if (y < 0.1 || y > 0.9) continue;
    const double ly = std::log(y);
    sx += times[i];
    sy += ly;
    sxx += times[i] * times[i];
    sxy += times[i] * ly;
    ++m;
  }
  if (m < 2) throw std::runtime_error("fit_exponential_decay: fit window has < 2 samples");
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return -slope;
}

RVec default_omega_grid(const LatticeSpec& spec, int n_points) {
  const EigenSystem es = analytic_eigensystem(spec);
  double span = es.energies.maxCoeff() - es.energies.minCoeff();
  if (span <= 0) span = std::max(std::abs(spec.coupling), 1.0);
  RVec grid(n_points);
  for (int i = 0; i < n_points; ++i)
    grid(i) = 1.2 * span * static_cast<double>(i) / (n_points - 1);
  return grid;
}

}  // namespace qtraj
