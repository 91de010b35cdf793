#pragma once

#include <vector>

#include "qtraj/types.hpp"

namespace qtraj {

// Sites are numbered 1..N in every public interface (matching the usual
// chain convention); storage is 0-based.
struct LatticeSpec {
  int n_sites = 1;
  double coupling = 1.0;  // J
  void validate() const;
};

enum class Parity { Even, Odd };  // spatial symmetry about the chain middle

// Eigenpairs ordered by the band index k = 1..N (descending energy for J > 0),
// not by energy magnitude. Column k-1 of `states` is |w_k>.
struct EigenSystem {
  RVec energies;
  Mat states;
  std::vector<Parity> parity;
  int n() const { return static_cast<int>(energies.size()); }
};

// Tridiagonal hopping Hamiltonian: J on both off-diagonals, zero diagonal.
Mat build_hamiltonian(const LatticeSpec& spec);

// Closed-form eigensystem: e_k = 2J cos(pi k/(N+1)),
// <n|w_k> = sqrt(2/(N+1)) sin(pi k n/(N+1)). Odd k are spatially even.
EigenSystem analytic_eigensystem(const LatticeSpec& spec);

// Dense diagonalization of a Hermitian matrix, columns permuted to the band
// index convention (descending energy when the first off-diagonal is >= 0).
// Oracle cross-check for analytic_eigensystem.
EigenSystem numeric_eigensystem(const Mat& h);

// Diagonal 0/1 projector onto the listed (1-based) sites.
Mat site_projector(const LatticeSpec& spec, const std::vector<int>& sites);

}  // namespace qtraj
