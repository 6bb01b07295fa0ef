#include "cohspace/lie.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <unsupported/Eigen/MatrixFunctions>

#include "cohspace/errors.hpp"
#include "cohspace/ode.hpp"

namespace cohspace {

namespace {

LieStarAlgebra empty_algebra(std::vector<std::string> names, int unit, double hbar, std::string convention) {
  LieStarAlgebra a;
  const auto d = names.size();
  a.names = std::move(names);
  a.structure.assign(d * d * d, cd(0.0));
  a.involution = MatC::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  a.unit = unit;
  a.hbar = hbar;
  a.convention = std::move(convention);
  return a;
}

void check_vec(const LieStarAlgebra& alg, const VecC& x) {
  if (x.size() != alg.dim()) throw PreconditionError("coefficient vector does not match the algebra dimension");
}

int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((a - b) * (b - c) * (c - a)) / 2 > 0 ? 1 : -1;
}

std::string describe(const LieStarAlgebra& alg, const VecC& v) {
  std::ostringstream os;
  bool first = true;
  for (int a = 0; a < alg.dim(); ++a) {
    if (std::abs(v(a)) <= 1e-12) continue;
    os << (first ? "" : " + ") << "(" << v(a).real() << (v(a).imag() < 0 ? "-" : "+") << std::abs(v(a).imag())
       << "i) " << alg.names[static_cast<std::size_t>(a)];
    first = false;
  }
  return first ? "0" : os.str();
}

nlohmann::json cjson(cd v) { return nlohmann::json::array({v.real(), v.imag()}); }

cd from_cjson(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("expected a complex number as [re, im], got " + j.dump());
}

}  // namespace

nlohmann::json LieStarAlgebra::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  const int d = dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int k = 0; k < d; ++k)
        if (c(a, b, k) != cd(0.0)) s.push_back({a, b, k, c(a, b, k).real(), c(a, b, k).imag()});
  nlohmann::json inv = nlohmann::json::array();
  for (int i = 0; i < d; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < d; ++k) row.push_back(cjson(involution(i, k)));
    inv.push_back(row);
  }
  return {{"names", names}, {"unit", unit},       {"hbar", hbar},
          {"convention", convention}, {"structure", s}, {"involution", inv}};
}

LieStarAlgebra LieStarAlgebra::from_json(const nlohmann::json& j) {
  auto names = j.at("names").get<std::vector<std::string>>();
  if (names.empty()) throw std::invalid_argument("algebra needs at least one basis element");
  const int d = static_cast<int>(names.size());
  LieStarAlgebra a = empty_algebra(std::move(names), j.value("unit", 0), j.value("hbar", 1.0),
                                   j.value("convention", std::string("quantum")));
  if (a.unit < 0 || a.unit >= d) throw std::invalid_argument("algebra unit index out of range");
  for (const auto& t : j.at("structure")) {
    if (!t.is_array() || t.size() < 4 || t.size() > 5)
      throw std::invalid_argument("structure entries are [a, b, c, re] or [a, b, c, re, im]");
    const int x = t[0].get<int>(), y = t[1].get<int>(), z = t[2].get<int>();
    if (std::min({x, y, z}) < 0 || std::max({x, y, z}) >= d) throw std::invalid_argument("structure index out of range");
    a.c(x, y, z) = {t[3].get<double>(), t.size() == 5 ? t[4].get<double>() : 0.0};
  }
  if (j.contains("involution")) {
    const auto& inv = j.at("involution");
    if (!inv.is_array() || static_cast<int>(inv.size()) != d) throw std::invalid_argument("involution must be dim x dim");
    for (int i = 0; i < d; ++i) {
      if (!inv[i].is_array() || static_cast<int>(inv[i].size()) != d)
        throw std::invalid_argument("involution must be dim x dim");
      for (int k = 0; k < d; ++k) a.involution(i, k) = from_cjson(inv[i][k]);
    }
  }
  return a;
}

VecC lie_product(const LieStarAlgebra& alg, const VecC& x, const VecC& y) {
  check_vec(alg, x);
  check_vec(alg, y);
  const int d = alg.dim();
  VecC r = VecC::Zero(d);
  for (int a = 0; a < d; ++a) {
    if (x(a) == cd(0.0)) continue;
    for (int b = 0; b < d; ++b) {
      if (y(b) == cd(0.0)) continue;
      const cd w = x(a) * y(b);
      for (int k = 0; k < d; ++k) r(k) += w * alg.c(a, b, k);
    }
  }
  return r;
}

VecC star(const LieStarAlgebra& alg, const VecC& x) {
  check_vec(alg, x);
  return alg.involution * x.conjugate();
}

AxiomReport check_axioms(const LieStarAlgebra& alg) {
  AxiomReport r;
  const int d = alg.dim();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int k = 0; k < d; ++k) r.antisymmetry = std::max(r.antisymmetry, std::abs(alg.c(a, b, k) + alg.c(b, a, k)));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int k = 0; k < d; ++k) {
        const VecC xa = alg.basis(a), xb = alg.basis(b), xc = alg.basis(k);
        const VecC j = lie_product(alg, xa, lie_product(alg, xb, xc)) + lie_product(alg, xb, lie_product(alg, xc, xa)) +
                       lie_product(alg, xc, lie_product(alg, xa, xb));
        r.jacobi = std::max(r.jacobi, j.cwiseAbs().maxCoeff());
      }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const VecC xa = alg.basis(a), xb = alg.basis(b);
      const VecC lhs = star(alg, lie_product(alg, xa, xb));
      const VecC rhs = lie_product(alg, star(alg, xa), star(alg, xb));
      r.involution = std::max(r.involution, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  const MatC jj = alg.involution * alg.involution.conjugate();
  r.involution = std::max(r.involution, (jj - MatC::Identity(d, d)).cwiseAbs().maxCoeff());
  r.involution = std::max(r.involution, (star(alg, alg.basis(alg.unit)) - alg.basis(alg.unit)).cwiseAbs().maxCoeff());
  for (int a = 0; a < d; ++a) {
    r.unit = std::max(r.unit, lie_product(alg, alg.basis(a), alg.basis(alg.unit)).cwiseAbs().maxCoeff());
    r.unit = std::max(r.unit, lie_product(alg, alg.basis(alg.unit), alg.basis(a)).cwiseAbs().maxCoeff());
  }
  return r;
}

MatC represent(const AlgebraRep& rep, const VecC& x) {
  if (rep.empty() || static_cast<Eigen::Index>(rep.size()) != x.size())
    throw PreconditionError("representation does not match the coefficient vector");
  MatC m = MatC::Zero(rep[0].rows(), rep[0].cols());
  for (std::size_t a = 0; a < rep.size(); ++a)
    if (x(static_cast<Eigen::Index>(a)) != cd(0.0)) m += x(static_cast<Eigen::Index>(a)) * rep[a];
  return m;
}

LieStarAlgebra algebra_from_matrices(std::vector<std::string> names, const AlgebraRep& mats, int unit, double hbar) {
  if (names.size() != mats.size() || mats.empty()) throw PreconditionError("need one name per matrix");
  if (!(hbar > 0.0)) throw PreconditionError("hbar must be positive");
  const int d = static_cast<int>(mats.size());
  const auto n = mats[0].rows();
  MatC a(n * n, d);
  for (int i = 0; i < d; ++i) {
    if (mats[static_cast<std::size_t>(i)].rows() != n || mats[static_cast<std::size_t>(i)].cols() != n)
      throw PreconditionError("representation matrices must be square and of one size");
    a.col(i) = mats[static_cast<std::size_t>(i)].reshaped();
  }
  Eigen::CompleteOrthogonalDecomposition<MatC> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() != d) throw PreconditionError("representation matrices are linearly dependent");
  LieStarAlgebra alg = empty_algebra(names, unit, hbar, "quantum");
  auto solve = [&](const MatC& m, const std::string& what) {
    const VecC v = m.reshaped();
    VecC c = qr.solve(v);
    const double res = (a * c - v).norm();
    if (res > 1e-10 * (1.0 + v.norm())) throw NonClosingAlgebraError(what + " leaves the span (residual " + std::to_string(res) + ")");
    for (auto& z : c) {
      if (std::abs(z.real()) < 1e-14) z.real(0.0);
      if (std::abs(z.imag()) < 1e-14) z.imag(0.0);
    }
    return c;
  };
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      const auto& mx = mats[static_cast<std::size_t>(x)];
      const auto& my = mats[static_cast<std::size_t>(y)];
      const VecC c = solve(cd(0.0, 1.0 / hbar) * (mx * my - my * mx), names[x] + " |> " + names[y]);
      for (int k = 0; k < d; ++k) alg.c(x, y, k) = c(k);
    }
  for (int x = 0; x < d; ++x) alg.involution.col(x) = solve(mats[static_cast<std::size_t>(x)].adjoint(), names[x] + "*");
  return alg;
}

double representation_defect(const LieStarAlgebra& alg, const AlgebraRep& rep) {
  if (static_cast<int>(rep.size()) != alg.dim()) throw PreconditionError("representation size does not match the algebra");
  double worst = 0.0;
  for (int a = 0; a < alg.dim(); ++a)
    for (int b = 0; b < alg.dim(); ++b) {
      const MatC& ma = rep[static_cast<std::size_t>(a)];
      const MatC& mb = rep[static_cast<std::size_t>(b)];
      const MatC lhs = cd(0.0, 1.0 / alg.hbar) * (ma * mb - mb * ma);
      const MatC rhs = represent(rep, lie_product(alg, alg.basis(a), alg.basis(b)));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  return worst;
}

std::pair<LieStarAlgebra, AlgebraRep> qubit_algebra(double hbar) {
  if (!(hbar > 0.0)) throw PreconditionError("hbar must be positive");
  LieStarAlgebra alg = empty_algebra({"1", "s1", "s2", "s3"}, 0, hbar, "quantum");
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int k = 1; k <= 3; ++k) alg.c(a, b, k) = -2.0 / hbar * levi_civita(a, b, k);
  AlgebraRep rep(4, MatC::Zero(2, 2));
  rep[0] = MatC::Identity(2, 2);
  rep[1] << 0.0, 1.0, 1.0, 0.0;
  rep[2] << 0.0, cd(0.0, -1.0), cd(0.0, 1.0), 0.0;
  rep[3] << 1.0, 0.0, 0.0, -1.0;
  return {alg, rep};
}

std::pair<LieStarAlgebra, AlgebraRep> rotator_algebra(int n) {
  if (n < 1) throw PreconditionError("rotator representation needs 2j >= 1");
  LieStarAlgebra alg = empty_algebra({"1", "J1", "J2", "J3"}, 0, 1.0, "quantum");
  for (int a = 1; a <= 3; ++a)
    for (int b = 1; b <= 3; ++b)
      for (int k = 1; k <= 3; ++k) alg.c(a, b, k) = static_cast<double>(levi_civita(a, b, k));
  // spin-n/2 matrices S_a; rep(J_a) = -S_a turns (i)[.,.] into the cross product
  const double j = 0.5 * n;
  const int d = n + 1;
  MatC sz = MatC::Zero(d, d), sp = MatC::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = j - k;
    sz(k, k) = m;
    if (k > 0) sp(k - 1, k) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  const MatC sm = sp.adjoint();
  AlgebraRep rep{MatC::Identity(d, d), -0.5 * (sp + sm), -cd(0.0, -0.5) * (sp - sm), -sz};
  return {alg, rep};
}

std::vector<double> koopman_angles(int grid) {
  std::vector<double> phi(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) phi[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / grid;
  return phi;
}

std::pair<LieStarAlgebra, AlgebraRep> koopman_algebra(int modes, int grid, double action) {
  if (modes < 1 || grid < 2) throw PreconditionError("koopman algebra needs modes >= 1 and grid >= 2");
  std::vector<std::string> names{"1", "I"};
  for (int k = 1; k <= modes; ++k) {
    names.push_back("cos" + std::to_string(k));
    names.push_back("sin" + std::to_string(k));
  }
  LieStarAlgebra alg = empty_algebra(names, 0, 1.0, "negative-poisson");
  // -{I, cos k phi} = -k sin k phi, -{I, sin k phi} = k cos k phi
  for (int k = 1; k <= modes; ++k) {
    const int c = 2 * k, s = 2 * k + 1;
    alg.c(1, c, s) = -static_cast<double>(k);
    alg.c(c, 1, s) = static_cast<double>(k);
    alg.c(1, s, c) = static_cast<double>(k);
    alg.c(s, 1, c) = -static_cast<double>(k);
  }
  const auto phi = koopman_angles(grid);
  AlgebraRep rep;
  rep.push_back(MatC::Identity(grid, grid));
  rep.push_back(action * MatC::Identity(grid, grid));
  for (int k = 1; k <= modes; ++k) {
    VecC cv(grid), sv(grid);
    for (int i = 0; i < grid; ++i) {
      cv(i) = std::cos(k * phi[static_cast<std::size_t>(i)]);
      sv(i) = std::sin(k * phi[static_cast<std::size_t>(i)]);
    }
    rep.push_back(cv.asDiagonal());
    rep.push_back(sv.asDiagonal());
  }
  return {alg, rep};
}

void validate_state(const LieStarAlgebra& alg, const AlgebraState& s) {
  const int d = alg.dim();
  if (s.form.rows() != d || s.form.cols() != d) throw PreconditionError("state form does not match the algebra");
  const double scale = std::max(1.0, s.form.cwiseAbs().maxCoeff());
  if ((s.form - s.form.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw StatePositivityError("state form is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (s.form + s.form.adjoint()));
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    std::ostringstream os;
    os << "state form is not positive semidefinite (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
    throw StatePositivityError(os.str());
  }
  if (std::abs(s.form(alg.unit, alg.unit) - 1.0) > 1e-10) throw NormalizationError("state needs <1,1> = 1");
}

void validate_density(const DensityState& d) {
  const auto& r = d.rho;
  if (r.rows() != r.cols() || r.rows() == 0) throw PreconditionError("density matrix must be square");
  if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw StatePositivityError("density matrix is not Hermitian");
  if (std::abs(r.trace() - 1.0) > 1e-12) throw NormalizationError("density matrix needs unit trace");
  Eigen::SelfAdjointEigenSolver<MatC> es(r);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << es.eigenvalues().minCoeff();
    throw StatePositivityError(os.str());
  }
}

cd uncertain_value(const LieStarAlgebra& alg, const AlgebraState& s, const VecC& x) {
  check_vec(alg, x);
  return (s.form * x)(alg.unit);
}

Uncertainty uncertainty(const LieStarAlgebra& alg, const AlgebraState& s, const VecC& x) {
  check_vec(alg, x);
  const cd mean = uncertain_value(alg, s, x);
  const double xx = x.dot(s.form * x).real();
  Uncertainty u;
  u.variance = xx - std::norm(mean);
  if (u.variance < -1e-8 * std::max(1.0, xx)) {
    std::ostringstream os;
    os << "negative variance " << u.variance << "; the state form is not positive";
    throw StatePositivityError(os.str());
  }
  u.clamped = u.variance < 0.0;
  u.sigma = std::sqrt(std::max(0.0, u.variance));
  return u;
}

AlgebraState state_from_density(const LieStarAlgebra& alg, const AlgebraRep& rep, const DensityState& d) {
  validate_density(d);
  const int n = alg.dim();
  if (static_cast<int>(rep.size()) != n) throw PreconditionError("representation size does not match the algebra");
  AlgebraState s;
  s.form.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const MatC& ra = rep[static_cast<std::size_t>(a)];
    if (ra.rows() != d.rho.rows() || ra.cols() != d.rho.cols())
      throw PreconditionError("representation and density matrix sizes differ");
    const MatC left = d.rho * ra.adjoint();
    for (int b = 0; b < n; ++b) s.form(a, b) = (rep[static_cast<std::size_t>(b)] * left).trace();
  }
  validate_state(alg, s);
  return s;
}

ExpectationTable evolve_expectations(const LieStarAlgebra& alg, const AlgebraRep& rep, const VecC& h,
                                     const DensityState& state0, const std::vector<VecC>& observables,
                                     std::pair<double, double> t_span, double rtol, std::vector<double> sample_times) {
  check_vec(alg, h);
  if (observables.empty()) throw PreconditionError("evolve_expectations: no observables");
  if (!(t_span.second >= t_span.first)) throw PreconditionError("time span must be increasing");
  const AlgebraState s0 = state_from_density(alg, rep, state0);
  const auto m = static_cast<Eigen::Index>(observables.size());
  MatC b(alg.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    check_vec(alg, observables[static_cast<std::size_t>(i)]);
    b.col(i) = observables[static_cast<std::size_t>(i)];
  }
  Eigen::CompleteOrthogonalDecomposition<MatC> qr(b);
  qr.setThreshold(1e-12);
  if (qr.rank() != m) throw PreconditionError("evolve_expectations: observables are linearly dependent");

  ExpectationTable out;
  out.closure.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const VecC y = lie_product(alg, h, b.col(i));
    const VecC c = qr.solve(y);
    const VecC r = y - b * c;
    if (r.norm() > 1e-10 * (1.0 + y.norm())) {
      throw NonClosingAlgebraError("H |> observable " + std::to_string(i) + " escapes the observable span along " +
                                   describe(alg, r));
    }
    out.closure.col(i) = c;
  }
  VecC e0(m);
  for (Eigen::Index i = 0; i < m; ++i) e0(i) = uncertain_value(alg, s0, b.col(i));

  if (sample_times.empty())
    for (int i = 0; i <= 100; ++i) sample_times.push_back(t_span.first + (t_span.second - t_span.first) * i / 100.0);
  std::sort(sample_times.begin(), sample_times.end());
  OdeOptions o;
  o.rtol = rtol;
  o.atol = 1e-14;
  const MatC mt = out.closure.transpose();
  VecC y = e0;
  dopri5([&](double, const VecC& v, VecC& dv) { dv.noalias() = mt * v; }, t_span.first, y, t_span.second, o,
         sample_times, [&](double t, const VecC& v) {
           out.times.push_back(t);
           out.values.push_back(v);
         });

  if (representation_defect(alg, rep) <= 1e-10) {
    const MatC u = (cd(0.0, -(t_span.second - t_span.first) / alg.hbar) * represent(rep, h)).exp();
    const MatC rho = u * state0.rho * u.adjoint();
    double gap = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) gap = std::max(gap, std::abs(y(i) - (represent(rep, b.col(i)) * rho).trace()));
    out.von_neumann_gap = gap;
  }
  return out;
}

namespace {

cd expectation(const AlgebraRep& rep, const DensityState& d, const VecC& x) { return (represent(rep, x) * d.rho).trace(); }

DensityState fetch(const StateField& field, const Site& s) {
  auto d = field(s);
  if (!d) {
    std::ostringstream os;
    os << "state field is not defined at site (";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    throw DomainError(os.str());
  }
  validate_density(*d);
  return *d;
}

}  // namespace

std::vector<double> covariant_ehrenfest_residual(const LieStarAlgebra& alg, const AlgebraRep& rep,
                                                 const std::vector<VecC>& p, const StateField& field, const VecC& x,
                                                 const Site& site, double dx) {
  check_vec(alg, x);
  if (!(dx > 0.0)) throw PreconditionError("lattice spacing must be positive");
  if (p.size() != site.size()) throw PreconditionError("need one generator per lattice direction");
  const DensityState here = fetch(field, site);
  std::vector<double> out;
  for (std::size_t nu = 0; nu < p.size(); ++nu) {
    Site fwd = site, bwd = site;
    ++fwd[nu];
    --bwd[nu];
    const cd deriv = (expectation(rep, fetch(field, fwd), x) - expectation(rep, fetch(field, bwd), x)) / (2.0 * dx);
    out.push_back(std::abs(deriv - expectation(rep, here, lie_product(alg, p[nu], x))));
  }
  return out;
}

ObservabilityReport observability(const LieStarAlgebra& alg, const AlgebraRep& rep, const StateField& field,
                                  const VecC& x, const Site& site, const std::vector<Site>& shifts, double delta) {
  check_vec(alg, x);
  const DensityState here = fetch(field, site);
  ObservabilityReport r;
  const cd mean = expectation(rep, here, x);
  r.mean = std::abs(mean);
  r.sigma = uncertainty(alg, state_from_density(alg, rep, here), x).sigma;
  for (const auto& h : shifts) {
    if (h.size() != site.size()) throw PreconditionError("shift dimension does not match the site");
    Site s = site;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += h[i];
    r.max_shift_change = std::max(r.max_shift_change, std::abs(expectation(rep, fetch(field, s), x) - mean));
  }
  r.imperceptible_shifts = r.max_shift_change <= delta;
  r.sharp = r.sigma < r.mean + delta;
  return r;
}

}  // namespace cohspace
