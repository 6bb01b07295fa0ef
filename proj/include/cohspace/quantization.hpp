#pragma once

#include <functional>
#include <optional>

#include "cohspace/quantum_space.hpp"

namespace cohspace {

// A coherent map A with its adjoint A*: <z|A z'> = <A* z|z'>.
struct CoherentMapSpec {
  LabelMap forward;
  LabelMap adjoint;
  std::optional<MatC> linear_rep;
};

// Operator on the orthonormal basis of a QuantumBasis. `residual` is the
// largest relative squared norm of an image component outside the span.
struct QuantizedOperator {
  MatC matrix;
  double residual = 0.0;
};

// One-parameter group s -> e^{isX} acting on labels, with optional exact
// tangent d/ds flow(s, z) at s = 0.
struct GeneratorSpec {
  std::function<Point(double, const Point&)> flow;
  std::function<VecC(const Point&)> analytic_derivative;
};

// Linear label map z -> A z with the space's adjoint. Throws UnsupportedError
// if the space has no adjoint for A.
CoherentMapSpec linear_map(const KernelSpace& space, const MatC& a);
// (A o B)(z) = A(B(z)), adjoint B* o A*.
CoherentMapSpec compose(const CoherentMapSpec& a, const CoherentMapSpec& b);
// s -> exp(i s X) on labels, tangent i X z.
GeneratorSpec linear_generator(const KernelSpace& space, const MatC& x);

// Gamma(A) with Gamma(A)|z_i> = |A z_i>. Throws SpanEscapeError if an image
// leaves the sampled span by more than tol.
QuantizedOperator quantize_map(const QuantumBasis& qb, const CoherentMapSpec& a, double tol = 1e-8);

// ||Gamma(A o B) - Gamma(A) Gamma(B)||_2 / (1 + ||Gamma(A o B)||_2)
double check_homomorphism(const QuantumBasis& qb, const CoherentMapSpec& a, const CoherentMapSpec& b,
                          double tol = 1e-8);

// dGamma(X) with Gamma(e^{isX}) = exp(i s dGamma(X)). Uses the exact tangent
// when available; otherwise (Gamma(s) - Gamma(-s)) / (2is) with Richardson
// over (s, s/2), and StepSizeError if the two estimates differ by more than
// 100 tol relative to (1 + norm).
QuantizedOperator generator_matrix(const QuantumBasis& qb, const GeneratorSpec& x, double s = 1e-4,
                                   double tol = 1e-8);

// T with coords_to = T coords_from for states in the span of `from`.
// Throws SpanEscapeError when `from` is not contained in `to`.
MatC change_of_basis(const QuantumBasis& from, const QuantumBasis& to, double tol = 1e-8);

double spectral_norm(const MatC& m);

}  // namespace cohspace
