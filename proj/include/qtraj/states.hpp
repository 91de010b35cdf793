#pragma once

#include "qtraj/lattice.hpp"
#include "qtraj/types.hpp"

namespace qtraj {

struct ParityWeights {
  double odd = 0;   // weight on spatially antisymmetric (even-k) eigenstates
  double even = 0;  // weight on spatially symmetric (odd-k) eigenstates
};

Mat pure_state_on_site(const LatticeSpec& spec, int site);
Mat eigenstate_density(const EigenSystem& es, int k);

// exp(-beta H)/Z via eigendecomposition; beta = 0 gives the maximally mixed
// state.
Mat thermal_state(const Mat& h, double beta);

// Re tr[o rho]; throws if the imaginary part exceeds 1e-8.
double expectation(const Mat& o, const Mat& rho);

double purity(const Mat& rho);  // tr[rho^2]

ParityWeights parity_weights(const Mat& rho, const EigenSystem& es);

// Column-stacking convention: vec(A X B) = (B^T kron A) vec(X), and
// tr[A^dag B] = vec(A)^dag vec(B). All superoperator builders use it.
Vec vectorize(const Mat& m);
Mat devectorize(const Vec& v);

// Checks Hermiticity (1e-10), unit trace (1e-10) and positivity down to the
// -1e-8 tolerance. Positivity is a check, not a projection: SME integration
// may transiently produce slightly negative eigenvalues.
void validate_density(const Mat& rho, double herm_tol = 1e-10,
                      double trace_tol = 1e-10, double psd_tol = 1e-8);

double min_eigenvalue(const Mat& hermitian);

}  // namespace qtraj
