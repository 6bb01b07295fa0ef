#include "cohspace/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "cohspace/errors.hpp"

namespace cohspace {

double label_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = a.size() ? (a.coords - b.coords).cwiseAbs().maxCoeff() : 0.0;
  if (a.multiplier.has_value() != b.multiplier.has_value()) return std::numeric_limits<double>::infinity();
  if (a.multiplier) d = std::max(d, std::abs(*a.multiplier - *b.multiplier));
  return d;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Trivial: return "trivial";
    case KernelKind::Klauder: return "klauder";
    case KernelKind::Spin: return "spin";
    case KernelKind::SpinTranspose: return "spin_t";
    case KernelKind::Moebius: return "moebius";
    case KernelKind::DeBranges: return "debranges";
    case KernelKind::ClassicalLimit: return "classical_limit";
    case KernelKind::Power: return "power";
    case KernelKind::EuclideanSubset: return "euclidean_subset";
    case KernelKind::Discrete: return "discrete";
    case KernelKind::Heisenberg: return "heisenberg";
  }
  return "unknown";
}

std::optional<std::string> KernelModel::violation(const Point&) const { return std::nullopt; }

Point KernelModel::conjugate(const Point& z) const {
  Point out(z.coords.conjugate());
  if (z.multiplier) out.multiplier = std::conj(*z.multiplier);
  return out;
}

VecC KernelModel::partial_second(const Point&, const Point&) const {
  throw UnsupportedError(to_string(kind()) + ": no analytic partials");
}

MatC KernelModel::partial_mixed(const Point&, const Point&) const {
  throw UnsupportedError(to_string(kind()) + ": no analytic partials");
}

ChartPoint KernelModel::to_chart(const Point&) const {
  throw UnsupportedError(to_string(kind()) + ": no holomorphic chart");
}

Point KernelModel::from_chart(const ChartPoint&) const {
  throw UnsupportedError(to_string(kind()) + ": no holomorphic chart");
}

std::optional<std::pair<ChartPoint, MatC>> KernelModel::switch_chart(const ChartPoint&) const {
  return std::nullopt;
}

std::optional<MatC> KernelModel::chart_metric(const ChartPoint&) const { return std::nullopt; }

std::optional<MatC> KernelModel::linear_adjoint(const MatC& a) const { return MatC(a.adjoint()); }

Point KernelModel::apply_linear(const MatC& a, const Point& z) const {
  Point out(a * z.coords);
  out.multiplier = z.multiplier;
  return out;
}

void KernelSpace::validate(const Point& z) const {
  const std::string name = to_string(kind());
  if (z.size() != label_dim()) {
    throw InvalidPointError(name + ": label dimension " + std::to_string(z.size()) + " != " +
                            std::to_string(label_dim()));
  }
  if (!z.coords.allFinite()) throw InvalidPointError(name + ": non-finite label coordinate");
  if (model_->uses_multiplier()) {
    if (!z.multiplier) throw InvalidPointError(name + ": projective point needs a multiplier");
    if (*z.multiplier == cd(0.0)) throw InvalidPointError(name + ": multiplier must be nonzero");
    if (!std::isfinite(z.multiplier->real()) || !std::isfinite(z.multiplier->imag()))
      throw InvalidPointError(name + ": non-finite multiplier");
  } else if (z.multiplier) {
    throw InvalidPointError(name + ": multiplier given for a non-projective space");
  }
  if (auto v = model_->violation(z)) throw InvalidPointError(name + ": " + *v);
}

PointList KernelSpace::sample(std::mt19937_64& rng, std::size_t count) const {
  PointList out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(model_->sample(rng));
  return out;
}

cd KernelSpace::product(const Point& z, const Point& z2) const {
  if (model_->form() == KernelForm::Sesquilinear) return model_->raw(z, z2);
  Point zc(z.coords.conjugate());
  if (z.multiplier) zc.multiplier = std::conj(*z.multiplier);
  return model_->raw(zc, z2);
}

cd eval_kernel(const KernelSpace& space, const Point& z, const Point& z2) {
  space.validate(z);
  space.validate(z2);
  return space.model().raw(z, z2);
}

cd coherent_product(const KernelSpace& space, const Point& z, const Point& z2) {
  space.validate(z);
  space.validate(z2);
  return space.product(z, z2);
}

double distance(const KernelSpace& space, const Point& z, const Point& z2) {
  space.validate(z);
  space.validate(z2);
  const double a = space.product(z, z).real();
  const double b = space.product(z2, z2).real();
  const double c = space.product(z, z2).real();
  const double rad = a + b - 2.0 * c;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (rad < -1e-6 * scale) {
    std::ostringstream os;
    os << to_string(space.kind()) << ": negative squared distance " << rad << " (kernel not PSD near these points)";
    throw CoherenceViolationError(os.str());
  }
  return std::sqrt(std::max(0.0, rad));
}

MatC gram_matrix(const KernelSpace& space, std::span<const Point> points, int threads) {
  if (points.empty()) throw PreconditionError("gram_matrix: empty point list");
  for (const auto& p : points) space.validate(p);
  const auto n = static_cast<Eigen::Index>(points.size());
  MatC g(n, n);
  auto fill_rows = [&](Eigen::Index begin, Eigen::Index step) {
    for (Eigen::Index i = begin; i < n; i += step) {
      g(i, i) = cd(space.product(points[i], points[i]).real(), 0.0);
      for (Eigen::Index j = i + 1; j < n; ++j) g(i, j) = space.product(points[i], points[j]);
    }
  };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads == 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(fill_rows, t, threads);
    for (auto& th : pool) th.join();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) g(j, i) = std::conj(g(i, j));
  return g;
}

PsdVerdict psd_verdict(const MatC& gram, double tol) {
  Eigen::SelfAdjointEigenSolver<MatC> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigen-solver did not converge on a " << gram.rows() << "x" << gram.cols()
       << " Gram matrix (max |entry| " << gram.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }
  const VecR& ev = es.eigenvalues();
  PsdVerdict v;
  v.min_eigenvalue = ev.minCoeff();
  v.gram_norm = ev.cwiseAbs().maxCoeff();
  v.tolerance_used = tol;
  v.passed = v.min_eigenvalue >= -tol * std::max(1.0, v.gram_norm);
  return v;
}

PsdVerdict check_coherence(const KernelSpace& space, std::span<const Point> points, double tol) {
  if (points.size() < 2) throw PreconditionError("check_coherence: need at least 2 points");
  return psd_verdict(gram_matrix(space, points), tol);
}

CoherentMapCheck check_coherent_map(const KernelSpace& space, const LabelMap& a, const LabelMap& a_adj,
                                    std::span<const std::pair<Point, Point>> samples, double tol) {
  CoherentMapCheck out;
  out.passed = true;
  for (const auto& [z, z2] : samples) {
    space.validate(z);
    space.validate(z2);
    const Point az2 = a(z2);
    const Point adz = a_adj(z);
    space.validate(az2);
    space.validate(adz);
    const cd lhs = space.product(z, az2);
    const cd rhs = space.product(adz, z2);
    const double r = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    out.max_residual = std::max(out.max_residual, r);
    if (!(r <= tol)) out.passed = false;
  }
  return out;
}

MoebiusMembership moebius_semigroup_member(const MatC& a) {
  if (a.rows() != 2 || a.cols() != 2) throw PreconditionError("moebius_semigroup_member: need a 2x2 matrix");
  MoebiusMembership m;
  m.alpha = std::norm(a(0, 0)) - std::norm(a(1, 0));
  m.beta = std::conj(a(0, 0)) * a(0, 1) - std::conj(a(1, 0)) * a(1, 1);
  m.gamma = std::norm(a(1, 1)) - std::norm(a(0, 1));
  m.member = m.alpha > 0 && std::abs(m.beta) <= m.alpha && m.gamma <= m.alpha - 2.0 * std::abs(m.beta);
  return m;
}

Point scale_point(const KernelSpace& space, cd lambda, const Point& z) {
  if (!space.projective_degree()) throw UnsupportedError(to_string(space.kind()) + ": not a projective space");
  Point out = z;
  out.multiplier = lambda * z.multiplier.value_or(cd(1.0));
  return out;
}

ProjectiveCheck check_projective_law(const KernelSpace& space, std::span<const std::pair<Point, Point>> samples,
                                     std::span<const cd> scalars, double tol) {
  const auto e = space.projective_degree();
  if (!e) throw UnsupportedError(to_string(space.kind()) + ": no projective degree");
  ProjectiveCheck out;
  out.passed = true;
  for (const auto& [z, z2] : samples) {
    const cd base = eval_kernel(space, z, z2);
    for (const cd& lam : scalars) {
      const cd lhs = eval_kernel(space, scale_point(space, lam, z), z2);
      const cd rhs = std::pow(lam, *e) * base;
      const double r = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
      out.max_residual = std::max(out.max_residual, r);
      if (!(r <= tol)) out.passed = false;
    }
  }
  return out;
}

namespace {

Point shifted(const Point& z, Eigen::Index k, double h) {
  Point p = z;
  p.coords(k) += h;
  return p;
}

}  // namespace

VecC product_partial_second(const KernelSpace& space, const Point& z, const Point& z2, double h) {
  if (space.has_partials()) return space.model().partial_second(z, z2);
  const auto n = z2.size();
  VecC out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    auto cdiff = [&](double s) {
      return (space.product(z, shifted(z2, k, s)) - space.product(z, shifted(z2, k, -s))) / (2.0 * s);
    };
    out(k) = richardson(cdiff(h), cdiff(h / 2));
  }
  return out;
}

MatC product_partial_mixed(const KernelSpace& space, const Point& z, const Point& z2, double h) {
  if (space.has_partials()) return space.model().partial_mixed(z, z2);
  const auto n = z.size();
  MatC out(n, n);
  // P is antiholomorphic in its first slot, so real steps there give d/d(conj z).
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      auto cdiff = [&](double s) {
        const Point a = shifted(z, j, s), b = shifted(z, j, -s);
        const Point c = shifted(z2, k, s), d = shifted(z2, k, -s);
        return (space.product(a, c) - space.product(a, d) - space.product(b, c) + space.product(b, d)) /
               (4.0 * s * s);
      };
      out(j, k) = richardson(cdiff(h), cdiff(h / 2));
    }
  return out;
}

}  // namespace cohspace
