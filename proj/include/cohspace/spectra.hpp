#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohspace/lie.hpp"
#include "cohspace/types.hpp"

namespace cohspace {

using ScalarOfE = std::function<double(double)>;

// lambda(xi, E) = m(E) xi - k(E). Either a discrete family xi_n(E) for
// n_min <= n <= n_max or a continuous range [xi_min(E), xi_max(E)].
struct ImplicitSpectralModel {
  std::string name;
  ScalarOfE m;
  ScalarOfE k;
  std::function<double(int, double)> xi;  // discrete family
  int n_min = 0;
  int n_max = 200;
  ScalarOfE xi_min;  // continuous family; xi_max may return +inf
  ScalarOfE xi_max;

  bool discrete() const { return static_cast<bool>(xi); }
  bool continuous() const { return static_cast<bool>(xi_min) && static_cast<bool>(xi_max); }
  double lambda(int n, double e) const { return m(e) * xi(n, e) - k(e); }
};

struct SpectralRoot {
  int n = 0;
  double energy = 0.0;
  double residual = 0.0;
  bool multiplicity_uncertain = false;
};

struct SpectrumResult {
  std::vector<SpectralRoot> discrete;                 // sorted by (E, n)
  std::vector<std::pair<double, double>> continuous;  // closed intervals inside the search interval
  std::pair<double, double> search_interval;
  std::vector<std::string> warnings;
};

struct SpectrumOptions {
  int grid = 10000;
  int threads = 1;
};

SpectrumResult solve_implicit_spectrum(const ImplicitSpectralModel& model, std::pair<double, double> interval,
                                       double tol, const SpectrumOptions& opt = {});

// E = c sqrt(p^2 + (m c)^2)
double free_dispersion(double p, double mass, double c);

// xi_n = hbar omega (n + 1/2), m = 1, k = E
ImplicitSpectralModel oscillator_model(double hbar_omega = 1.0, int n_max = 200);
// Radial Coulomb problem with potential -alpha/r and angular momentum l:
// m(E) = hbar sqrt(-2E/mass) for E < 0, k = alpha, xi_n = n for n >= l + 1.
ImplicitSpectralModel coulomb_model(double mass = 1.0, double alpha = 1.0, double hbar = 1.0, int l = 0,
                                    int n_max = 200);
// p0^2 - p^2 - (mass c)^2 with p0 = E/c: xi = p^2 + (mass c)^2 in [(mass c)^2, inf), k = E^2/c^2.
ImplicitSpectralModel free_model(double mass = 1.0, double c = 1.0);
// m, k polynomials in E (ascending coefficients), xi_n = a n + b.
ImplicitSpectralModel table_model(std::vector<double> m, std::vector<double> k, double a, double b, int n_min = 0,
                                  int n_max = 200);

// {"model": "oscillator" | "coulomb" | "free" | "table", ...parameters}
ImplicitSpectralModel model_from_json(const nlohmann::json& j);

struct AssembleOptions {
  int grid = 2000;
  // Rows/columns beyond trusted_dim belong to the truncation; a root whose null
  // vector puts more than tail_bound of its norm there is dropped with a
  // warning, or throws TruncationError when strict.
  std::optional<int> trusted_dim;
  double tail_bound = 1e-8;
  bool strict = false;
};

using CoefficientsOfE = std::function<VecC(double)>;

// Direct-matrix fallback: minima of the smallest singular value of
// I(E) = sum_a c_a(E) rep_a that fall below tol * ||I(E)||.
SpectrumResult assemble_from_algebra(const AlgebraRep& rep, const CoefficientsOfE& coeffs,
                                     std::pair<double, double> interval, double tol, const AssembleOptions& opt = {});

// Discrete series D+(k) of su(1,1) truncated to `dim` states: {1, K1, K2, K3}.
AlgebraRep su11_discrete_series(double k, int dim);
// I(E) = (1/(2 mass) - E) K3 + (1/(2 mass) + E) K1 - alpha (hbar = 1), whose
// zero modes in D+(l + 1) are the bound Coulomb levels.
CoefficientsOfE coulomb_su11_coefficients(double mass, double alpha);

nlohmann::json spectrum_to_json(const SpectrumResult& r);

}  // namespace cohspace
