#include "cohspace/quantum_space.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cohspace/catalog.hpp"
#include "cohspace/errors.hpp"

namespace cohspace {

VecC QuantumBasis::coordinates(const VecC& kernel_column) const {
  VecC c = eigenvectors.adjoint() * kernel_column;
  for (int a = 0; a < rank; ++a) c(a) /= std::sqrt(eigenvalues(a));
  return c;
}

VecC QuantumBasis::kernel_column(const Point& y) const {
  VecC k(static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) k(static_cast<Eigen::Index>(j)) = space.product(points[j], y);
  return k;
}

MatC QuantumBasis::factor_pinv() const {
  MatC p = eigenvectors;
  for (int a = 0; a < rank; ++a) p.col(a) /= std::sqrt(eigenvalues(a));
  return p;
}

int QuantumBasis::index_of(const Point& z) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (label_distance(points[i], z) <= 1e-12) return static_cast<int>(i);
  return -1;
}

nlohmann::json QuantumBasis::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < gram.cols(); ++j) row.push_back({gram(i, j).real(), gram(i, j).imag()});
    g.push_back(row);
  }
  nlohmann::json ev = nlohmann::json::array();
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) ev.push_back(eigenvalues(i));
  return {{"space", space.descriptor()},
          {"points", points_to_json(points)},
          {"gram", g},
          {"rank", rank},
          {"eigenvalues", ev},
          {"truncation_tol", truncation_tol}};
}

QuantumBasis build_quantum_space(const KernelSpace& space, const PointList& points, double tol, double psd_tol) {
  if (points.empty()) throw PreconditionError("build_quantum_space: empty point list");
  if (!(tol > 0.0 && tol < 1.0)) throw PreconditionError("build_quantum_space: tol must lie in (0, 1)");
  QuantumBasis qb;
  qb.space = space;
  qb.points = points;
  qb.truncation_tol = tol;
  qb.gram = gram_matrix(space, points);
  Eigen::SelfAdjointEigenSolver<MatC> es(qb.gram);
  if (es.info() != Eigen::Success) throw NumericalError("build_quantum_space: eigen-solver did not converge");
  const VecR& ev = es.eigenvalues();  // ascending
  const double top = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -psd_tol * std::max(1.0, top)) {
    std::ostringstream os;
    os << "Gram matrix is not positive semidefinite: min eigenvalue " << ev.minCoeff() << " (norm " << top << ")";
    throw KernelNotPsdError(os.str());
  }
  const auto n = ev.size();
  int r = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (ev(i) > tol * top) ++r;
  qb.rank = r;
  qb.eigenvalues.resize(r);
  qb.eigenvectors.resize(n, r);
  for (int a = 0; a < r; ++a) {
    qb.eigenvalues(a) = ev(n - 1 - a);
    qb.eigenvectors.col(a) = es.eigenvectors().col(n - 1 - a);
  }
  qb.factor = qb.eigenvectors.adjoint();
  for (int a = 0; a < r; ++a) qb.factor.row(a) *= std::sqrt(qb.eigenvalues(a));
  return qb;
}

QuantumBasis quantum_space_from_json(const nlohmann::json& j) {
  if (!j.contains("space") || !j.contains("points")) throw std::invalid_argument("basis JSON needs 'space' and 'points'");
  return build_quantum_space(space_from_json(j.at("space")), points_from_json(j.at("points")),
                             j.value("truncation_tol", 1e-10));
}

namespace {

void check_span_state(const SpanState& s) {
  if (s.coefficients.empty() || s.coefficients.size() != s.labels.size())
    throw PreconditionError("span state needs equally many coefficients and labels (at least one)");
}

}  // namespace

VecC embed_state(const QuantumBasis& qb, const SpanState& s) {
  check_span_state(s);
  VecC v = VecC::Zero(qb.rank);
  for (std::size_t k = 0; k < s.labels.size(); ++k) {
    const int i = qb.index_of(s.labels[k]);
    if (i < 0) throw OutOfSpanError("embed_state: label " + std::to_string(k) + " is not a basis point; rebuild the basis including it");
    v += s.coefficients[k] * qb.factor.col(i);
  }
  return v;
}

cd inner_product(const KernelSpace& space, const SpanState& a, const SpanState& b) {
  check_span_state(a);
  check_span_state(b);
  for (const auto& p : a.labels) space.validate(p);
  for (const auto& p : b.labels) space.validate(p);
  cd s = 0.0;
  for (std::size_t j = 0; j < a.labels.size(); ++j)
    for (std::size_t k = 0; k < b.labels.size(); ++k)
      s += std::conj(a.coefficients[j]) * b.coefficients[k] * space.product(a.labels[j], b.labels[k]);
  return s;
}

namespace {

Point checked(const KernelSpace& space, const DerivativeState& d, double t) {
  Point p = d.path(t);
  space.validate(p);
  return p;
}

}  // namespace

VecC path_velocity(const KernelSpace& space, const DerivativeState& d, double h) {
  checked(space, d, d.time);
  if (d.velocity) return d.velocity(d.time);
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto cdiff = [&](double s) -> VecC {
    return (checked(space, d, d.time + s).coords - checked(space, d, d.time - s).coords) / (2.0 * s);
  };
  return richardson<VecC>(cdiff(h), cdiff(h / 2));
}

cd derivative_inner(const KernelSpace& space, const DerivativeState& d1, const DerivativeState& d2, double h) {
  if (space.has_partials()) {
    const Point u = checked(space, d1, d1.time), v = checked(space, d2, d2.time);
    const VecC du = path_velocity(space, d1, h), dv = path_velocity(space, d2, h);
    return du.dot(space.model().partial_mixed(u, v) * dv);
  }
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto cdiff = [&](double s) {
    const Point up = checked(space, d1, d1.time + s), um = checked(space, d1, d1.time - s);
    const Point vp = checked(space, d2, d2.time + s), vm = checked(space, d2, d2.time - s);
    return (space.product(up, vp) - space.product(up, vm) - space.product(um, vp) + space.product(um, vm)) /
           (4.0 * s * s);
  };
  return richardson(cdiff(h), cdiff(h / 2));
}

cd mixed_inner(const KernelSpace& space, const Point& z, const DerivativeState& d, double h) {
  space.validate(z);
  if (space.has_partials()) {
    const Point u = checked(space, d, d.time);
    return space.model().partial_second(z, u).transpose() * path_velocity(space, d, h);
  }
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto cdiff = [&](double s) {
    return (space.product(z, checked(space, d, d.time + s)) - space.product(z, checked(space, d, d.time - s))) /
           (2.0 * s);
  };
  return richardson(cdiff(h), cdiff(h / 2));
}

}  // namespace cohspace
