#pragma once

#include <functional>
#include <optional>

#include "cohspace/kernel.hpp"

namespace cohspace {

// Finite quantum space spanned by the coherent states of `points`.
// gram = U diag(lambda) U*, factor B = diag(sqrt(lambda)) U* over the retained
// eigenvalues, so column i of B holds |z_i> in an orthonormal basis.
struct QuantumBasis {
  KernelSpace space;
  PointList points;
  MatC gram;
  MatC factor;        // rank x n
  VecR eigenvalues;   // retained, descending
  MatC eigenvectors;  // n x rank
  int rank = 0;
  double truncation_tol = 1e-10;

  // Orthonormal coordinates of a state |y> in the span, from the kernel
  // column k_j = <z_j|y>.
  VecC coordinates(const VecC& kernel_column) const;
  // Kernel column <z_j|y> for a coherent state y.
  VecC kernel_column(const Point& y) const;
  // B^+ = U diag(lambda^-1/2), n x rank
  MatC factor_pinv() const;
  // Index of a basis point within 1e-12, or -1.
  int index_of(const Point& z) const;

  nlohmann::json to_json() const;
};

// A finite linear combination sum_k alpha_k |y_k>.
struct SpanState {
  std::vector<cd> coefficients;
  PointList labels;
};

// First-order derivative state d/dt |u(t)> at t = time. `velocity` is the
// optional exact tangent u'(time); otherwise it is taken by central differences.
struct DerivativeState {
  std::function<Point(double)> path;
  double time = 0.0;
  std::function<VecC(double)> velocity;
};

QuantumBasis build_quantum_space(const KernelSpace& space, const PointList& points, double tol = 1e-10,
                                 double psd_tol = 1e-8);

// Rebuilds a basis from the JSON written by QuantumBasis::to_json.
QuantumBasis quantum_space_from_json(const nlohmann::json& j);

VecC embed_state(const QuantumBasis& qb, const SpanState& s);

cd inner_product(const KernelSpace& space, const SpanState& a, const SpanState& b);

cd derivative_inner(const KernelSpace& space, const DerivativeState& d1, const DerivativeState& d2, double h = 1e-4);

cd mixed_inner(const KernelSpace& space, const Point& z, const DerivativeState& d, double h = 1e-4);

// Tangent u'(time) of a derivative state; central differences with Richardson
// when no exact velocity is attached. Validates the stencil points.
VecC path_velocity(const KernelSpace& space, const DerivativeState& d, double h = 1e-4);

}  // namespace cohspace
