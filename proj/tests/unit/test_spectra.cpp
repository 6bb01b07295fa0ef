#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cohspace/errors.hpp"
#include "cohspace/spectra.hpp"
#include "doctest.h"
#include "radial.hpp"

using namespace cohspace;

namespace {

void check_invariants(const SpectrumResult& r, double tol) {
  for (std::size_t i = 0; i < r.discrete.size(); ++i) {
    CHECK(r.discrete[i].residual <= tol);
    if (i > 0) CHECK(r.discrete[i - 1].energy <= r.discrete[i].energy);
  }
}

AlgebraRep fock_oscillator(int dim, double hbar_omega) {
  MatC h = MatC::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) h(n, n) = hbar_omega * (n + 0.5);
  return {MatC::Identity(dim, dim), h};
}

}  // namespace

TEST_CASE("linear family: lambda = n - E") {
  const auto m = table_model({1.0}, {0.0, 1.0}, 1.0, 0.0, 0, 50);
  const auto r = solve_implicit_spectrum(m, {-0.5, 10.5}, 1e-12);
  REQUIRE(r.discrete.size() == 11);
  for (int n = 0; n <= 10; ++n) {
    CHECK(r.discrete[static_cast<std::size_t>(n)].n == n);
    CHECK(std::abs(r.discrete[static_cast<std::size_t>(n)].energy - n) <= 1e-14);
  }
  CHECK(r.warnings.empty());
  check_invariants(r, 1e-12);
}

TEST_CASE("oscillator levels against dense diagonalization") {
  const int cutoff = 128;
  MatC a = MatC::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const MatC h = a.adjoint() * a + 0.5 * MatC::Identity(cutoff, cutoff);
  Eigen::SelfAdjointEigenSolver<MatC> es(h, Eigen::EigenvaluesOnly);

  const auto r = solve_implicit_spectrum(oscillator_model(1.0), {0.0, 10.0}, 1e-12);
  REQUIRE(r.discrete.size() == 10);
  for (int n = 0; n < 10; ++n) {
    CHECK(r.discrete[static_cast<std::size_t>(n)].n == n);
    CHECK(std::abs(r.discrete[static_cast<std::size_t>(n)].energy - es.eigenvalues()(n)) <= 1e-10);
  }
  const auto scaled = solve_implicit_spectrum(oscillator_model(0.3), {0.0, 3.0}, 1e-12);
  REQUIRE(scaled.discrete.size() == 10);
  CHECK(std::abs(scaled.discrete[4].energy - 0.3 * 4.5) <= 1e-12);
}

TEST_CASE("coulomb levels against the finite-difference radial oracle") {
  const oracle::RadialCoulomb fd(1.0, 1.0, 0, 200.0, 10000);
  const auto r = solve_implicit_spectrum(coulomb_model(1.0, 1.0), {-0.6, -0.017}, 1e-12);
  REQUIRE(r.discrete.size() == 5);
  for (int n = 1; n <= 5; ++n) {
    const auto& root = r.discrete[static_cast<std::size_t>(n - 1)];
    CHECK(root.n == n);
    const double ref = fd.eigenvalue(n - 1);
    CHECK(std::abs(root.energy - ref) <= 1e-3 * std::abs(ref));
    CHECK(std::abs(root.energy * n * n - r.discrete[0].energy) <= 1e-3 * std::abs(r.discrete[0].energy));
  }
  check_invariants(r, 1e-12);

  // p states start at n = 2
  const oracle::RadialCoulomb fdp(1.0, 1.0, 1, 200.0, 10000);
  const auto p = solve_implicit_spectrum(coulomb_model(1.0, 1.0, 1.0, 1), {-0.6, -0.017}, 1e-12);
  REQUIRE(p.discrete.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(p.discrete[static_cast<std::size_t>(i)].n == i + 2);
    const double ref = fdp.eigenvalue(i);
    CHECK(std::abs(p.discrete[static_cast<std::size_t>(i)].energy - ref) <= 1e-3 * std::abs(ref));
  }
}

TEST_CASE("su(1,1) discrete series satisfies the su(1,1) relations") {
  const auto rep = su11_discrete_series(1.5, 40);
  const MatC &k1 = rep[1], &k2 = rep[2], &k3 = rep[3];
  // [K1, K2] = -i K3, [K2, K3] = i K1, [K3, K1] = i K2 away from the truncation edge
  const int keep = 38;
  auto top = [&](const MatC& m) { return m.topLeftCorner(keep, keep); };
  CHECK((top(k1 * k2 - k2 * k1) + cd(0, 1) * top(k3)).norm() <= 1e-11);
  CHECK((top(k2 * k3 - k3 * k2) - cd(0, 1) * top(k1)).norm() <= 1e-11);
  CHECK((top(k3 * k1 - k1 * k3) - cd(0, 1) * top(k2)).norm() <= 1e-11);
  // Casimir K3^2 - K1^2 - K2^2 = k(k - 1)
  const MatC cas = k3 * k3 - k1 * k1 - k2 * k2;
  CHECK((top(cas) - 1.5 * 0.5 * MatC::Identity(keep, keep)).norm() <= 1e-10);
}

TEST_CASE("coulomb via the su(1,1) matrix fallback agrees with the lambda roots") {
  const auto implicit = solve_implicit_spectrum(coulomb_model(1.0, 1.0), {-0.6, -0.017}, 1e-12);
  AssembleOptions opt;
  opt.trusted_dim = 250;
  const auto direct =
      assemble_from_algebra(su11_discrete_series(1.0, 300), coulomb_su11_coefficients(1.0, 1.0), {-0.6, -0.017}, 1e-10, opt);
  REQUIRE(direct.discrete.size() == implicit.discrete.size());
  for (std::size_t i = 0; i < direct.discrete.size(); ++i)
    CHECK(std::abs(direct.discrete[i].energy - implicit.discrete[i].energy) <=
          1e-8 * std::abs(implicit.discrete[i].energy));
}

TEST_CASE("oscillator in a truncated Fock space keeps only trusted levels") {
  const int dim = 64;
  const auto rep = fock_oscillator(dim, 1.0);
  auto coeffs = [](double e) {
    VecC c(2);
    c << e, -1.0;
    return c;
  };
  AssembleOptions opt;
  opt.trusted_dim = 33;
  const auto direct = assemble_from_algebra(rep, coeffs, {0.0, dim + 1.0}, 1e-10, opt);
  REQUIRE(direct.discrete.size() == 33);
  CHECK(direct.warnings.size() == 31);
  const auto implicit = solve_implicit_spectrum(oscillator_model(1.0), {0.0, 33.0}, 1e-12);
  REQUIRE(implicit.discrete.size() == 33);
  for (std::size_t i = 0; i < 33; ++i)
    CHECK(std::abs(direct.discrete[i].energy - implicit.discrete[i].energy) <= 1e-8 * implicit.discrete[i].energy);

  opt.strict = true;
  CHECK_THROWS_AS(assemble_from_algebra(rep, coeffs, {0.0, dim + 1.0}, 1e-10, opt), TruncationError);
}

TEST_CASE("small matrix pencils") {
  MatC id = MatC::Identity(3, 3), d = MatC::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const auto r = assemble_from_algebra({id, d}, [](double e) { VecC c(2); c << e, -1.0; return c; }, {0.0, 4.0}, 1e-10);
  REQUIRE(r.discrete.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(r.discrete[static_cast<std::size_t>(i)].energy - (i + 1)) <= 1e-12);

  MatC m = MatC::Zero(2, 2), n = MatC::Zero(2, 2);
  m.diagonal() << 1.0, 2.0;
  n.diagonal() << 2.0, 2.0;
  const auto p = assemble_from_algebra({m, n}, [](double e) { VecC c(2); c << e, -1.0; return c; }, {0.0, 3.0}, 1e-10);
  REQUIRE(p.discrete.size() == 2);
  CHECK(std::abs(p.discrete[0].energy - 1.0) <= 1e-12);
  CHECK(std::abs(p.discrete[1].energy - 2.0) <= 1e-12);

  // non-Hermitian pencil goes through the SVD path
  MatC nh = MatC::Zero(2, 2);
  nh << 1.0, 5.0, 0.0, 2.0;
  const auto q = assemble_from_algebra({MatC::Identity(2, 2), nh}, [](double e) { VecC c(2); c << e, -1.0; return c; },
                                       {0.0, 3.0}, 1e-10);
  REQUIRE(q.discrete.size() == 2);
  CHECK(std::abs(q.discrete[0].energy - 1.0) <= 1e-10);
  CHECK(std::abs(q.discrete[1].energy - 2.0) <= 1e-10);
}

TEST_CASE("free particle dispersion and continuum") {
  CHECK(free_dispersion(0.0, 2.0, 3.0) == doctest::Approx(18.0));
  CHECK(free_dispersion(2.0, 0.0, 3.0) == doctest::Approx(6.0));
  CHECK(free_dispersion(3.0, 4.0, 1.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(free_dispersion(1.0, 1.0, 0.0), PreconditionError);

  const auto r = solve_implicit_spectrum(free_model(1.0, 1.0), {-3.0, 5.0}, 1e-12);
  CHECK(r.discrete.empty());
  REQUIRE(r.continuous.size() == 2);
  CHECK(r.continuous[0].first == -3.0);
  CHECK(std::abs(r.continuous[0].second + 1.0) <= 1e-14);
  CHECK(std::abs(r.continuous[1].first - 1.0) <= 1e-14);
  CHECK(r.continuous[1].second == 5.0);
  // the threshold of the band is the dispersion at p = 0
  const auto heavy = solve_implicit_spectrum(free_model(2.0, 1.5), {0.0, 10.0}, 1e-12);
  REQUIRE(heavy.continuous.size() == 1);
  CHECK(std::abs(heavy.continuous[0].first - free_dispersion(0.0, 2.0, 1.5)) <= 1e-13);
}

TEST_CASE("tangent and nearly tangent families") {
  // lambda_0 = (E - 1)^2: double root
  const auto touch = table_model({1.0}, {-1.0, 2.0, -1.0}, 1.0, 0.0, 0, 0);
  const auto r = solve_implicit_spectrum(touch, {0.0, 2.5}, 1e-12);
  REQUIRE(r.discrete.size() == 1);
  CHECK(std::abs(r.discrete[0].energy - 1.0) <= 1e-5);
  CHECK(r.discrete[0].multiplicity_uncertain);

  // two roots 2e-5 apart inside one grid cell
  const auto split = table_model({1.0}, {-1.0 + 1e-10, 2.0, -1.0}, 1.0, 0.0, 0, 0);
  const auto s = solve_implicit_spectrum(split, {0.0, 2.5}, 1e-12);
  REQUIRE(s.discrete.size() == 2);
  CHECK(std::abs(s.discrete[0].energy - (1.0 - 1e-5)) <= 1e-9);
  CHECK(std::abs(s.discrete[1].energy - (1.0 + 1e-5)) <= 1e-9);
  CHECK_FALSE(s.discrete[0].multiplicity_uncertain);

  // misses zero by 1e-10: no root, but a warning
  const auto miss = table_model({1.0}, {-1.0 - 1e-10, 2.0, -1.0}, 1.0, 0.0, 0, 0);
  const auto w = solve_implicit_spectrum(miss, {0.0, 2.5}, 1e-12);
  CHECK(w.discrete.empty());
  REQUIRE(w.warnings.size() == 1);
  CHECK(w.warnings[0].find("tangency") != std::string::npos);
}

TEST_CASE("degenerate model and bad input") {
  const auto deg = table_model({0.0, 1.0}, {0.0, 1.0}, 1.0, 0.0);
  CHECK_THROWS_AS(solve_implicit_spectrum(deg, {0.0, 1.0}, 1e-12), ModelDegeneracyError);
  CHECK_THROWS_AS(solve_implicit_spectrum(oscillator_model(), {1.0, 0.0}, 1e-12), PreconditionError);
  CHECK_THROWS_AS(solve_implicit_spectrum(oscillator_model(), {0.0, 1.0}, 0.0), PreconditionError);
  CHECK_THROWS_AS(model_from_json({{"model", "bogus"}}), std::invalid_argument);
}

TEST_CASE("root counts are stable under grid doubling and threading") {
  for (const auto& [model, iv] : {std::pair{oscillator_model(1.0), std::pair{0.0, 10.0}},
                                  std::pair{coulomb_model(1.0, 1.0), std::pair{-0.6, -0.005}}}) {
    const auto a = solve_implicit_spectrum(model, iv, 1e-12, {10000, 1});
    const auto b = solve_implicit_spectrum(model, iv, 1e-12, {20000, 3});
    REQUIRE(a.discrete.size() == b.discrete.size());
    for (std::size_t i = 0; i < a.discrete.size(); ++i) {
      CHECK(a.discrete[i].n == b.discrete[i].n);
      CHECK(std::abs(a.discrete[i].energy - b.discrete[i].energy) <= 1e-12 * std::max(1.0, std::abs(a.discrete[i].energy)));
    }
  }
}

TEST_CASE("models from json") {
  const auto osc = model_from_json({{"model", "oscillator"}, {"hbar_omega", 2.0}});
  CHECK(osc.lambda(1, 3.0) == doctest::Approx(0.0));
  const auto cou = model_from_json({{"model", "coulomb"}, {"mass", 2.0}, {"alpha", 0.5}, {"l", 2}});
  CHECK(cou.n_min == 3);
  // E_n = -m alpha^2 / (2 n^2)
  CHECK(std::abs(cou.lambda(3, -2.0 * 0.25 / 18.0)) <= 1e-15);
  const auto tab = model_from_json({{"model", "table"}, {"m", {1.0}}, {"k", {0.0, 2.0}}, {"xi", {{"a", 1.0}, {"b", 0.5}}}});
  const auto r = solve_implicit_spectrum(tab, {0.0, 2.0}, 1e-12);
  REQUIRE(r.discrete.size() == 4);
  CHECK(std::abs(r.discrete[3].energy - 1.75) <= 1e-14);
  const auto js = spectrum_to_json(r);
  CHECK(js["discrete"].size() == 4);
  CHECK(js["search_interval"][1] == 2.0);
}
