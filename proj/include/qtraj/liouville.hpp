#pragma once

#include <vector>

#include "qtraj/sme.hpp"
#include "qtraj/spectrum_types.hpp"

namespace qtraj {

// Generator of the unconditioned master equation,
// L rho = -i[H, rho] + k D[O] rho, as a dense matrix on column-stacked
// density matrices.
struct LiouvilleOperator {
  Mat generator;  // N^2 x N^2
  Mat h;
  Mat observable;
  double strength = 0.0;
  int dim = 0;
};

LiouvilleOperator build_liouvillian(const Mat& h, const ProbeConfig& probe);

// Direct evaluation of -i[H,rho] + k(2 O rho O - {O^2, rho}); test route for
// the superoperator construction.
Mat apply_liouvillian(const Mat& h, const ProbeConfig& probe, const Mat& rho);

// exp(L t) rho0 by scaling-and-squaring. The Liouvillian eigenbasis is badly
// conditioned at strong probing, so spectral propagation is not used.
Mat lindblad_propagate(const LiouvilleOperator& liou, const Mat& rho0, double t);

// Propagation on a uniform grid via repeated exp(L dt) application.
std::vector<Mat> lindblad_propagate_grid(const LiouvilleOperator& liou,
                                         const Mat& rho0,
                                         const std::vector<double>& times);

int kernel_dimension(const LiouvilleOperator& liou);

// Unique fixed point; throws DegenerateSteadyState if the kernel has
// dimension > 1.
Mat steady_state(const LiouvilleOperator& liou);

// t -> infinity limit from rho0: projection of rho0 onto the kernel along
// the invariant complement (biorthogonal SVD null bases), which preserves
// the conserved quantities.
Mat steady_state(const LiouvilleOperator& liou, const Mat& rho0);

struct LiouvilleSpectrum {
  Vec eigenvalues;  // length N^2, Re <= 0 up to tolerance
  Mat modes;        // vectorized right eigenmatrices, HS-normalized columns
};

LiouvilleSpectrum liouvillian_spectrum(const LiouvilleOperator& liou);

// S(omega) = (1/4pi) Re tr[O (i omega - L)^{-1} x] with the DC-subtracted
// source x = vec({O, rho_ss} - 2 <O>_ss rho_ss). One dense LU per grid
// point; grid points where the solve is singular (dark-mode frequencies,
// omega = 0 with a degenerate kernel) fall back to a least-squares solve
// with the source projected off the kernel.
SpectrumEstimate steady_state_spectrum(const LiouvilleOperator& liou,
                                       const Mat& observable, const Mat& rho_ss,
                                       const RVec& omegas, int n_threads = 0);
SpectrumEstimate steady_state_spectrum_serial(const LiouvilleOperator& liou,
                                              const Mat& observable,
                                              const Mat& rho_ss,
                                              const RVec& omegas);

// Weak-probing Lorentzian sum over eigenstate pairs with rates
// Gamma_ij = k(P_i + P_j - 2 P_i P_j), P_i the probed-sites weight of |w_i>.
// Unnormalized (the reference expression fixes only the shape); use
// scale_to_reference against a steady_state_spectrum on the same grid.
SpectrumEstimate perturbative_spectrum(const EigenSystem& es,
                                       const std::vector<int>& sites,
                                       double strength, const Mat& rho_ss,
                                       const RVec& omegas);

// Gamma_ij for 1-based eigenindices.
double perturbative_rate(const EigenSystem& es, const std::vector<int>& sites,
                         double strength, int i, int j);

// Least-squares overall scale of `est` onto `ref` (same grid).
SpectrumEstimate scale_to_reference(const SpectrumEstimate& est,
                                    const SpectrumEstimate& ref);

// Eigenmodes of the non-Hermitian H - i k Pi, sorted by |Im| ascending.
struct EffectiveModes {
  Vec values;
  Mat states;  // unit-norm columns
};

EffectiveModes effective_modes(const Mat& h, const ProbeConfig& probe);

// Zeno escape rate 4/(k tau0^2) with tau0^{-2} = <H^2> - <H>^2 on |site>:
// 4J^2/k at an edge, 8J^2/k at an interior site.
double zeno_rate(const LatticeSpec& spec, int probe_site, double strength);

// Least-squares exponential-decay rate of y(t) = (y0 - y_inf) e^{-rate t}
// + y_inf, fitted on the window where the decaying part lies within
// [0.1, 0.9] of its initial value.
double fit_exponential_decay(const std::vector<double>& times,
                             const std::vector<double>& values, double y_inf);

// 400 points over [0, 1.2 max Bohr frequency] by default.
RVec default_omega_grid(const LatticeSpec& spec, int n_points = 400);

}  // namespace qtraj
