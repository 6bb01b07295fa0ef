#pragma once
// Truncated single-mode Fock space, written from scratch for test oracles.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;

// exp(z0) * sum_k zeta^k / sqrt(k!) |k>, k < cutoff
inline Eigen::VectorXcd fock_coherent(cd z0, cd zeta, int cutoff) {
  Eigen::VectorXcd v(cutoff);
  cd c = std::exp(z0);
  for (int k = 0; k < cutoff; ++k) {
    v(k) = c;
    c *= zeta / std::sqrt(static_cast<double>(k + 1));
  }
  return v;
}

inline Eigen::MatrixXcd annihilation(int cutoff) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int k = 1; k < cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline Eigen::MatrixXcd number(int cutoff) {
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

// Eigen-decomposition based propagator exp(-i H t) for Hermitian H.
inline Eigen::MatrixXcd unitary(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ph(i) = std::exp(cd(0.0, -t * es.eigenvalues()(i)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace oracle
