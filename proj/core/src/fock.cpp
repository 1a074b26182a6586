#include "vdpsync/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace vdpsync::fock {

void QuantumParams::validate() const {
  if (kappa1 < 0.0 || kappa2 < 0.0) throw ConfigError("kappa rates must be non-negative");
  if (kappa1 == 0.0 && kappa2 == 0.0) throw ConfigError("kappa1 and kappa2 cannot both vanish");
  if (!std::isfinite(delta)) throw ConfigError("delta must be finite");
  if (dim < 2) throw ConfigError("Fock dimension must be at least 2");
}

Matrix annihilation(int dim) {
  if (dim < 2) throw ConfigError("annihilation: dim must be at least 2");
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix number_operator(int dim) {
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Matrix hamiltonian(const QuantumParams& p, double eps1, double eps2) {
  p.validate();
  const Matrix a = annihilation(p.dim);
  const Matrix ad = a.adjoint();
  return p.delta * number_operator(p.dim) + 0.5 * eps1 * (a + ad) +
         Complex(0.0, 0.5) * eps2 * (a - ad);
}

Matrix weyl_third_moment_operator(int dim) {
  if (dim < 3) throw ConfigError("weyl_third_moment_operator: dim must be at least 3");
  const Matrix a = annihilation(dim);
  const Matrix ad = a.adjoint();
  return (a * a * ad + a * ad * a + ad * a * a) / 3.0;
}

double DensityMatrix::hermiticity_error() const {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::top_band_population(double fraction) const {
  const int n = dim();
  const int band = std::max(1, static_cast<int>(std::ceil(fraction * n)));
  double pop = 0.0;
  for (int k = n - band; k < n; ++k) pop += m(k, k).real();
  return pop;
}

double DensityMatrix::purity() const { return (m * m).trace().real(); }

void DensityMatrix::validate(const DensityTolerances& tol) const {
  std::ostringstream os;
  if (hermiticity_error() > tol.hermiticity) {
    os << "density matrix not hermitian (error " << hermiticity_error() << ")";
    throw Error(ErrorKind::Numerical, os.str());
  }
  if (std::abs(trace() - 1.0) > tol.trace) {
    os << "density matrix trace " << trace() << " deviates from 1";
    throw Error(ErrorKind::Numerical, os.str());
  }
  if (min_eigenvalue() < tol.positivity) {
    os << "density matrix indefinite (min eigenvalue " << min_eigenvalue() << ")";
    throw PositivityLossError(0.0, os.str());
  }
  if (top_band_population() > tol.top_band_population) {
    os << "population " << top_band_population() << " in the top levels exceeds "
       << tol.top_band_population;
    throw TruncationOverflowError(0.0, os.str());
  }
}

DensityMatrix coherent_state(Complex alpha0, int dim) {
  if (dim < 2) throw ConfigError("coherent_state: dim must be at least 2");
  Eigen::VectorXcd v(dim);
  if (alpha0 == Complex(0.0, 0.0)) {
    v.setZero();
    v(0) = 1.0;
  } else {
    // amplitudes via log-space recursion to dodge factorial overflow
    v(0) = std::exp(-0.5 * std::norm(alpha0));
    for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha0 / std::sqrt(static_cast<double>(n));
  }
  const double norm = v.norm();
  if (std::abs(1.0 - norm) > 1e-6) {
    std::ostringstream os;
    os << "coherent state |alpha|^2 = " << std::norm(alpha0) << " loses " << (1.0 - norm * norm)
       << " of its weight at dim = " << dim;
    throw TruncationTooSmallError(os.str());
  }
  v /= norm;
  DensityMatrix rho;
  rho.m = v * v.adjoint();
  return rho;
}

MomentSet moments(const DensityMatrix& rho) {
  const int n = rho.dim();
  const Matrix a = annihilation(n);
  MomentSet out;
  out.mean = (rho.m * a).trace();
  out.third = (rho.m * weyl_third_moment_operator(n)).trace();
  out.phonon = (rho.m * number_operator(n)).trace().real();
  return out;
}

}  // namespace vdpsync::fock
