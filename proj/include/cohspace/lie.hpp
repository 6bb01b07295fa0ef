#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohspace/types.hpp"

namespace cohspace {

// Finite Lie *-algebra in a fixed basis. X_a |> X_b = sum_c C[a][b][c] X_c.
// The involution is antilinear: coefficients of X* are J conj(x).
struct LieStarAlgebra {
  std::vector<std::string> names;
  std::vector<cd> structure;  // dim^3, index (a * dim + b) * dim + c
  MatC involution;
  int unit = 0;
  double hbar = 1.0;
  std::string convention;  // "quantum" for (i/hbar)[X,Y], "negative-poisson" for classical

  int dim() const { return static_cast<int>(names.size()); }
  cd c(int a, int b, int k) const { return structure[(static_cast<std::size_t>(a) * dim() + b) * dim() + k]; }
  cd& c(int a, int b, int k) { return structure[(static_cast<std::size_t>(a) * dim() + b) * dim() + k]; }
  VecC basis(int a) const { return VecC::Unit(dim(), a); }

  nlohmann::json to_json() const;
  static LieStarAlgebra from_json(const nlohmann::json& j);
};

// Matrices of a representation, one per basis element.
using AlgebraRep = std::vector<MatC>;

VecC lie_product(const LieStarAlgebra& alg, const VecC& x, const VecC& y);
VecC star(const LieStarAlgebra& alg, const VecC& x);

struct AxiomReport {
  double antisymmetry = 0.0;
  double jacobi = 0.0;
  double involution = 0.0;  // (X |> Y)* vs X* |> Y*, plus J J-bar = 1 and 1* = 1
  double unit = 0.0;        // X |> 1
  bool passed(double tol = 1e-12) const {
    return antisymmetry <= tol && jacobi <= tol && involution <= tol && unit <= tol;
  }
};
AxiomReport check_axioms(const LieStarAlgebra& alg);

// Structure constants of (i/hbar)[X_a, X_b] in the span of the matrices.
// Throws NonClosingAlgebraError when a bracket leaves the span.
LieStarAlgebra algebra_from_matrices(std::vector<std::string> names, const AlgebraRep& mats, int unit,
                                     double hbar = 1.0);
// max_ab |(i/hbar)[rep_a, rep_b] - rep(X_a |> X_b)|
double representation_defect(const LieStarAlgebra& alg, const AlgebraRep& rep);
MatC represent(const AlgebraRep& rep, const VecC& x);

// {1, s1, s2, s3} with the Pauli matrices.
std::pair<LieStarAlgebra, AlgebraRep> qubit_algebra(double hbar = 1.0);
// {1, J1, J2, J3} with J_a |> J_b = eps_abc J_c, represented by -S_a in spin n/2.
std::pair<LieStarAlgebra, AlgebraRep> rotator_algebra(int n = 2);
// {1, I, cos k phi, sin k phi (k = 1..modes)} on the cylinder with the negative
// Poisson bracket; the representation is multiplication by samples on a grid
// of `grid` angles at action `action`.
std::pair<LieStarAlgebra, AlgebraRep> koopman_algebra(int modes, int grid, double action = 1.0);
std::vector<double> koopman_angles(int grid);

struct AlgebraState {
  MatC form;  // <X, Y> = x^* S y
};
struct DensityState {
  MatC rho;
};

void validate_state(const LieStarAlgebra& alg, const AlgebraState& s);
void validate_density(const DensityState& d);

cd uncertain_value(const LieStarAlgebra& alg, const AlgebraState& s, const VecC& x);

struct Uncertainty {
  double sigma = 0.0;
  double variance = 0.0;  // before clamping
  bool clamped = false;
};
// sqrt(max(0, <X,X> - |<X>|^2)); StatePositivityError below -1e-8.
Uncertainty uncertainty(const LieStarAlgebra& alg, const AlgebraState& s, const VecC& x);

// S[a][b] = Tr(rep_b rho rep_a^*)
AlgebraState state_from_density(const LieStarAlgebra& alg, const AlgebraRep& rep, const DensityState& d);

struct ExpectationTable {
  std::vector<double> times;
  std::vector<VecC> values;  // one entry per time, one component per observable
  MatC closure;              // H |> O_i = sum_j closure(j, i) O_j
  std::optional<double> von_neumann_gap;  // final-time deviation, when rep is faithful
};

// d<X>/dt = <H |> X> on the span of the observables.
ExpectationTable evolve_expectations(const LieStarAlgebra& alg, const AlgebraRep& rep, const VecC& h,
                                     const DensityState& state0, const std::vector<VecC>& observables,
                                     std::pair<double, double> t_span, double rtol = 1e-10,
                                     std::vector<double> sample_times = {});

using Site = std::vector<int>;
using StateField = std::function<std::optional<DensityState>(const Site&)>;

// Per direction nu: |(<X>(x + e_nu) - <X>(x - e_nu)) / (2 dx) - <p_nu |> X>(x)|.
std::vector<double> covariant_ehrenfest_residual(const LieStarAlgebra& alg, const AlgebraRep& rep,
                                                 const std::vector<VecC>& p, const StateField& field, const VecC& x,
                                                 const Site& site, double dx);

struct ObservabilityReport {
  double mean = 0.0;
  double sigma = 0.0;
  double max_shift_change = 0.0;
  bool imperceptible_shifts = false;  // |<X>(x+h) - <X>(x)| <= delta for all h in Delta
  bool sharp = false;                 // sigma < |<X>| + delta
};
ObservabilityReport observability(const LieStarAlgebra& alg, const AlgebraRep& rep, const StateField& field,
                                  const VecC& x, const Site& site, const std::vector<Site>& shifts, double delta);

}  // namespace cohspace
