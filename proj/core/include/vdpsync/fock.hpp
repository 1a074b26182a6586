#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

#include "vdpsync/errors.hpp"

namespace vdpsync::fock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Rotating-frame model parameters of the quantum oscillator.
struct QuantumParams {
  double delta = 2.0 * std::numbers::pi * 0.05;  ///< detuning
  double kappa1 = 1.0;  ///< one-photon gain rate
  double kappa2 = 0.05;  ///< two-photon loss rate
  int dim = 40;  ///< Fock-space truncation

  void validate() const;
};

/// Ladder operator a with <n-1|a|n> = sqrt(n).
Matrix annihilation(int dim);

/// a^dagger a (diagonal 0..dim-1).
Matrix number_operator(int dim);

/// H = delta*a^dagger*a + (eps1/2)(a + a^dagger) + (i*eps2/2)(a - a^dagger).
Matrix hamiltonian(const QuantumParams& p, double eps1, double eps2);

/// Symmetrically ordered cubic operator S = (a^2 a^dag + a a^dag a + a^dag a^2)/3.
/// Equals a^dag a^2 + a except in the two highest truncation levels.
Matrix weyl_third_moment_operator(int dim);

/// Tolerances for density-matrix health checks.
struct DensityTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-8;
  double positivity = -1e-8;        ///< minimum admissible eigenvalue
  double top_band_population = 1e-6;  ///< population allowed in the top 10% of levels
};

struct DensityMatrix {
  Matrix m;

  int dim() const { return static_cast<int>(m.rows()); }
  Complex trace() const { return m.trace(); }
  double hermiticity_error() const;  ///< max entry deviation from m^dagger
  double min_eigenvalue() const;
  double top_band_population(double fraction = 0.1) const;
  double purity() const;  ///< Tr[rho^2]

  void validate(const DensityTolerances& tol = {}) const;  ///< throws on violation
};

/// Pure coherent state |alpha0><alpha0| in the truncated basis, renormalized.
/// Throws TruncationTooSmallError when the truncation cuts more than 1e-6 of
/// the norm.
DensityMatrix coherent_state(Complex alpha0, int dim);

/// Mean, symmetric third moment and phonon number of a state.
struct MomentSet {
  Complex mean;   ///< <a>
  Complex third;  ///< <|alpha|^2 alpha> in symmetric ordering
  double phonon = 0.0;  ///< <a^dagger a>
};

MomentSet moments(const DensityMatrix& rho);

}  // namespace vdpsync::fock
