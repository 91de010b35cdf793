#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// hbar = 1 throughout; the hopping amplitude J sets the unit of energy and
// of inverse time.

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by steady_state when the Liouvillian kernel has dimension > 1 and
// no reference state was supplied to resolve the conserved quantities.
struct DegenerateSteadyState : std::runtime_error {
  explicit DegenerateSteadyState(int dim)
      : std::runtime_error("Liouvillian kernel dimension " +
                           std::to_string(dim) +
                           " > 1; a reference state is required"),
        kernel_dim(dim) {}
  int kernel_dim;
};

inline double hermiticity_error(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Mat& m, double tol = 1e-12) {
  return m.rows() == m.cols() && hermiticity_error(m) <= tol;
}

inline void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(what) + ": matrix not square");
}

inline void require_same_dim(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": dimension mismatch");
}

}  // namespace qtraj
