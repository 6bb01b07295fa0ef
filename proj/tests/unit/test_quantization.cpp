#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "cohspace/catalog.hpp"
#include "cohspace/errors.hpp"
#include "cohspace/quantization.hpp"
#include "doctest.h"
#include "spin.hpp"

using namespace cohspace;

namespace {

MatC random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  MatC a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<MatC> qr(a);
  return qr.householderQ();
}

MatC pauli(int k) {
  MatC s(2, 2);
  if (k == 1) s << 0.0, 1.0, 1.0, 0.0;
  if (k == 2) s << 0.0, cd(0.0, -1.0), cd(0.0, 1.0), 0.0;
  if (k == 3) s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

std::vector<double> sorted_real_eigs(const MatC& h) {
  Eigen::ComplexEigenSolver<MatC> es(h);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < h.rows(); ++i) out.push_back(es.eigenvalues()(i).real());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> sorted_phases(const MatC& u) {
  Eigen::ComplexEigenSolver<MatC> es(u);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < u.rows(); ++i) out.push_back(std::arg(es.eigenvalues()(i)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("identity quantizes to the identity") {
  std::mt19937_64 rng(1);
  const auto s = klauder_space(1);
  const auto qb = build_quantum_space(s, s.sample(rng, 6));
  CoherentMapSpec id{[](const Point& z) { return z; }, [](const Point& z) { return z; }, {}};
  const auto q = quantize_map(qb, id);
  CHECK((q.matrix - MatC::Identity(qb.rank, qb.rank)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(q.residual <= 1e-10);
  CHECK(check_homomorphism(qb, id, id) < 1e-10);
}

TEST_CASE("permutation on the trivial space quantizes to itself") {
  const auto t = trivial_space(3);
  PointList pts{Point{1.0, 0.0, 0.0}, Point{0.0, 1.0, 0.0}, Point{0.0, 0.0, 1.0}};
  const auto qb = build_quantum_space(t, pts);
  MatC p = MatC::Zero(3, 3);
  p(1, 0) = p(2, 1) = p(0, 2) = 1.0;
  const auto q = quantize_map(qb, linear_map(t, p));
  CHECK(q.residual <= 1e-12);
  // back to the coordinates of the labels
  const MatC in_labels = qb.factor.inverse() * q.matrix * qb.factor;
  CHECK((in_labels - p).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("z-rotation on spin spaces matches Wigner phases") {
  std::mt19937_64 rng(2);
  const double th = 0.7;
  for (int n : {1, 3}) {
    const auto s = spin_space(n);
    const auto qb = build_quantum_space(s, s.sample(rng, n + 3));
    MatC a(2, 2);
    a << std::polar(1.0, -th / 2), 0.0, 0.0, std::polar(1.0, th / 2);
    const MatC g = quantize_map(qb, linear_map(s, a)).matrix;
    CHECK((g.adjoint() * g - MatC::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < 1e-10);
    const auto sm = oracle::spin_matrices(n);
    const MatC wig = (cd(0.0, -th) * MatC(sm.jz)).exp();
    const auto got = sorted_phases(g), want = sorted_phases(wig);
    for (int i = 0; i <= n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);
  }
}

TEST_CASE("homomorphism on the trivial space and spin rotations") {
  std::mt19937_64 rng(3);
  const auto t = trivial_space(3);
  const auto qt = build_quantum_space(t, t.sample(rng, 5));
  for (int i = 0; i < 5; ++i)
    CHECK(check_homomorphism(qt, linear_map(t, random_unitary(rng, 3)), linear_map(t, random_unitary(rng, 3))) <=
          1e-10);
  const auto s = spin_space(2);
  const auto qs = build_quantum_space(s, s.sample(rng, 6));
  const MatC rx = (cd(0.0, -0.4) * pauli(1)).exp(), ry = (cd(0.0, 1.1) * pauli(2)).exp();
  CHECK(check_homomorphism(qs, linear_map(s, rx), linear_map(s, ry)) <= 1e-8);
  // compare with the SU(2) composition oracle
  const MatC g = quantize_map(qs, linear_map(s, rx * ry)).matrix;
  const auto sm = oracle::spin_matrices(2);
  const MatC wig = (cd(0.0, -0.4) * MatC(2.0 * sm.jx)).exp() * (cd(0.0, 1.1) * MatC(2.0 * sm.jy)).exp();
  const auto a = sorted_phases(g), b = sorted_phases(wig);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("unitary maps give Gram-unitary operators") {
  std::mt19937_64 rng(4);
  for (const auto& s : {spin_space(3), trivial_space(2), power_space(spin_space(1), 2)}) {
    const auto qb = build_quantum_space(s, s.sample(rng, 7));
    const MatC u = random_unitary(rng, 2);
    const MatC g = quantize_map(qb, linear_map(s, u)).matrix;
    CHECK((g.adjoint() * g - MatC::Identity(qb.rank, qb.rank)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("span escape is reported") {
  std::mt19937_64 rng(5);
  const auto k = klauder_space(1);
  const auto qb = build_quantum_space(k, k.sample(rng, 4));
  MatC a = MatC::Identity(2, 2);
  a(1, 1) = std::polar(1.0, 0.9);
  CHECK_THROWS_AS(quantize_map(qb, linear_map(k, a)), SpanEscapeError);
  MatC bad = MatC::Identity(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(linear_map(k, bad), UnsupportedError);
}

TEST_CASE("zero flow has zero generator") {
  std::mt19937_64 rng(6);
  const auto s = spin_space(2);
  const auto qb = build_quantum_space(s, s.sample(rng, 5));
  GeneratorSpec zero{[](double, const Point& z) { return z; }, {}};
  CHECK(generator_matrix(qb, zero).matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Klauder phase flow generates the number operator") {
  // four small labels span the first Fock levels up to O(eps^4) leakage
  const auto k = klauder_space(1);
  const double eps = 0.04;
  PointList pts;
  for (int m = 0; m < 4; ++m) pts.push_back(Point{0.0, std::polar(eps, 2.0 * std::numbers::pi * m / 4.0 + 0.3)});
  const auto qb = build_quantum_space(k, pts);
  REQUIRE(qb.rank == 4);
  MatC x = MatC::Zero(2, 2);
  x(1, 1) = 1.0;
  const auto exact = generator_matrix(qb, linear_generator(k, x));
  const auto ev = sorted_real_eigs(exact.matrix);
  for (int n = 0; n < 4; ++n) CHECK(std::abs(ev[n] - n) < 1e-6);
  GeneratorSpec fd = linear_generator(k, x);
  fd.analytic_derivative = nullptr;
  // smallest Gram eigenvalue is ~1e-9, so difference quotients lose about 5 digits
  const auto approx = generator_matrix(qb, fd, 1e-2, 1e-6);
  const auto fev = sorted_real_eigs(approx.matrix);
  for (int n = 0; n < 4; ++n) CHECK(std::abs(fev[n] - n) < 1e-4);
}

TEST_CASE("spin rotation generator matches su(2)") {
  std::mt19937_64 rng(7);
  for (int n : {1, 3}) {
    const auto s = spin_space(n);
    const auto qb = build_quantum_space(s, s.sample(rng, n + 2));
    const MatC x = 0.5 * pauli(3);
    const auto d = generator_matrix(qb, linear_generator(s, x));
    const auto ev = sorted_real_eigs(d.matrix);
    const auto want = sorted_real_eigs(oracle::spin_image(x, n));
    for (int i = 0; i <= n; ++i) CHECK(std::abs(ev[i] - want[i]) < 1e-10);
    CHECK((d.matrix - d.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    GeneratorSpec fd = linear_generator(s, x);
    fd.analytic_derivative = nullptr;
    CHECK((generator_matrix(qb, fd).matrix - d.matrix).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("generator additivity and exponential consistency") {
  std::mt19937_64 rng(8);
  const auto s = spin_space(3);
  const auto qb = build_quantum_space(s, s.sample(rng, 6));
  for (int t = 0; t < 10; ++t) {
    std::normal_distribution<double> g;
    MatC x = MatC::Zero(2, 2), y = MatC::Zero(2, 2);
    x(0, 0) = g(rng);
    x(1, 1) = g(rng);
    y(0, 0) = g(rng);
    y(1, 1) = g(rng);
    auto fd = [&](const MatC& m) {
      GeneratorSpec gs = linear_generator(s, m);
      gs.analytic_derivative = nullptr;
      return generator_matrix(qb, gs, 1e-4, 1e-6).matrix;
    };
    CHECK(spectral_norm(fd(x + y) - fd(x) - fd(y)) <= 1e-6);

    MatC h(2, 2);
    h << g(rng), cd(g(rng), g(rng)), 0.0, g(rng);
    h(1, 0) = std::conj(h(0, 1));
    h *= 0.2;
    const MatC dg = fd(h);
    const GeneratorSpec gs = linear_generator(s, h);
    CoherentMapSpec at1{[&gs](const Point& z) { return gs.flow(1.0, z); }, {}, {}};
    const MatC g1 = quantize_map(qb, at1).matrix;
    CHECK(spectral_norm(g1 - MatC(cd(0.0, 1.0) * dg).exp()) <= 1e-6);
  }
}

TEST_CASE("Gamma is basis independent up to the change of basis") {
  std::mt19937_64 rng(9);
  const auto s = spin_space(3);
  const auto qa = build_quantum_space(s, s.sample(rng, 6));
  const auto qb = build_quantum_space(s, s.sample(rng, 9));
  const MatC t = change_of_basis(qa, qb);
  CHECK((t.adjoint() * t - MatC::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 0; i < 10; ++i) {
    const auto m = linear_map(s, random_unitary(rng, 2));
    const MatC ga = quantize_map(qa, m).matrix, gb = quantize_map(qb, m).matrix;
    CHECK(spectral_norm(gb - t * ga * t.adjoint()) <= 1e-8);
  }
}
