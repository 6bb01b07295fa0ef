#include "cohspace/quantization.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "cohspace/errors.hpp"

namespace cohspace {

double spectral_norm(const MatC& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatC> svd(m);
  return svd.singularValues()(0);
}

CoherentMapSpec linear_map(const KernelSpace& space, const MatC& a) {
  if (a.rows() != space.label_dim() || a.cols() != space.label_dim())
    throw PreconditionError("linear_map: matrix does not match the label dimension");
  const auto adj = space.model().linear_adjoint(a);
  if (!adj) throw UnsupportedError(to_string(space.kind()) + ": linear map has no adjoint on this space");
  CoherentMapSpec m;
  m.forward = [space, a](const Point& z) { return space.model().apply_linear(a, z); };
  m.adjoint = [space, b = *adj](const Point& z) { return space.model().apply_linear(b, z); };
  m.linear_rep = a;
  return m;
}

CoherentMapSpec compose(const CoherentMapSpec& a, const CoherentMapSpec& b) {
  CoherentMapSpec m;
  m.forward = [fa = a.forward, fb = b.forward](const Point& z) { return fa(fb(z)); };
  m.adjoint = [aa = a.adjoint, ab = b.adjoint](const Point& z) { return ab(aa(z)); };
  if (a.linear_rep && b.linear_rep) m.linear_rep = MatC(*a.linear_rep * *b.linear_rep);
  return m;
}

GeneratorSpec linear_generator(const KernelSpace& space, const MatC& x) {
  if (x.rows() != space.label_dim() || x.cols() != space.label_dim())
    throw PreconditionError("linear_generator: matrix does not match the label dimension");
  GeneratorSpec g;
  g.flow = [space, x](double s, const Point& z) {
    if (s == 0.0) return z;
    const MatC u = (cd(0.0, s) * x).exp();
    return space.model().apply_linear(u, z);
  };
  g.analytic_derivative = [x](const Point& z) -> VecC { return I * (x * z.coords); };
  return g;
}

namespace {

struct ImageCoords {
  MatC coords;
  double residual = 0.0;
  int worst = -1;
};

double relative_deficit(double norm2, double captured) {
  if (norm2 <= 0.0) return std::abs(captured);
  return std::abs(norm2 - captured) / norm2;
}

ImageCoords images(const QuantumBasis& qb, const LabelMap& f) {
  ImageCoords out;
  const auto n = static_cast<Eigen::Index>(qb.points.size());
  out.coords.resize(qb.rank, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point y = f(qb.points[i]);
    qb.space.validate(y);
    const VecC c = qb.coordinates(qb.kernel_column(y));
    out.coords.col(i) = c;
    const double r = relative_deficit(qb.space.product(y, y).real(), c.squaredNorm());
    if (r > out.residual) {
      out.residual = r;
      out.worst = static_cast<int>(i);
    }
  }
  return out;
}

void require_in_span(const ImageCoords& im, double tol, const char* what) {
  if (im.residual > tol) {
    std::ostringstream os;
    os << what << ": image of basis point " << im.worst << " leaves the sampled span (relative residual "
       << im.residual << " > " << tol << "); enrich the basis with image points";
    throw SpanEscapeError(os.str());
  }
}

}  // namespace

QuantizedOperator quantize_map(const QuantumBasis& qb, const CoherentMapSpec& a, double tol) {
  const ImageCoords im = images(qb, a.forward);
  require_in_span(im, tol, "quantize_map");
  return {im.coords * qb.factor_pinv(), im.residual};
}

double check_homomorphism(const QuantumBasis& qb, const CoherentMapSpec& a, const CoherentMapSpec& b, double tol) {
  const MatC ga = quantize_map(qb, a, tol).matrix;
  const MatC gb = quantize_map(qb, b, tol).matrix;
  const MatC gab = quantize_map(qb, compose(a, b), tol).matrix;
  return spectral_norm(gab - ga * gb) / (1.0 + spectral_norm(gab));
}

QuantizedOperator generator_matrix(const QuantumBasis& qb, const GeneratorSpec& x, double s, double tol) {
  const auto n = static_cast<Eigen::Index>(qb.points.size());
  if (x.analytic_derivative) {
    ImageCoords im;
    im.coords.resize(qb.rank, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Point& z = qb.points[i];
      const VecC v = x.analytic_derivative(z);
      VecC k(n);
      for (Eigen::Index j = 0; j < n; ++j)
        k(j) = product_partial_second(qb.space, qb.points[j], z).transpose() * v;
      const VecC c = qb.coordinates(k);
      im.coords.col(i) = -I * c;
      const double norm2 = v.dot(product_partial_mixed(qb.space, z, z) * v).real();
      const double r = relative_deficit(norm2, c.squaredNorm());
      if (r > im.residual) {
        im.residual = r;
        im.worst = static_cast<int>(i);
      }
    }
    require_in_span(im, tol, "generator_matrix");
    return {im.coords * qb.factor_pinv(), im.residual};
  }
  if (!(s > 0.0)) throw PreconditionError("generator_matrix: step must be positive");
  double residual = 0.0;
  auto gamma = [&](double t) {
    CoherentMapSpec m;
    m.forward = [&x, t](const Point& z) { return x.flow(t, z); };
    const QuantizedOperator q = quantize_map(qb, m, tol);
    residual = std::max(residual, q.residual);
    return q.matrix;
  };
  auto cdiff = [&](double h) -> MatC { return (gamma(h) - gamma(-h)) / cd(0.0, 2.0 * h); };
  const MatC coarse = cdiff(s), fine = cdiff(s / 2);
  const MatC best = richardson<MatC>(coarse, fine);
  const double gap = spectral_norm(coarse - fine) / (1.0 + spectral_norm(best));
  if (gap > 100.0 * tol) {
    std::ostringstream os;
    os << "generator_matrix: difference quotients at s and s/2 differ by " << gap << " > " << 100.0 * tol
       << "; decrease s or supply an analytic tangent";
    throw StepSizeError(os.str());
  }
  return {best, residual};
}

MatC change_of_basis(const QuantumBasis& from, const QuantumBasis& to, double tol) {
  const auto n = static_cast<Eigen::Index>(from.points.size());
  MatC c(to.rank, n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point& z = from.points[i];
    const VecC v = to.coordinates(to.kernel_column(z));
    c.col(i) = v;
    worst = std::max(worst, relative_deficit(to.space.product(z, z).real(), v.squaredNorm()));
  }
  if (worst > tol) {
    std::ostringstream os;
    os << "change_of_basis: source points leave the target span (relative residual " << worst << ")";
    throw SpanEscapeError(os.str());
  }
  return c * from.factor_pinv();
}

}  // namespace cohspace
