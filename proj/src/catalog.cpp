#include "cohspace/catalog.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cohspace/errors.hpp"

namespace cohspace {

using nlohmann::json;

cd DeBrangesE::value(cd z) const {
  if (type == Type::PaleyWiener) return std::exp(-I * a * z);
  cd v = 1.0;
  for (const cd& r : roots) v *= z - r;
  return v;
}

cd DeBrangesE::derivative(cd z) const {
  if (type == Type::PaleyWiener) return -I * a * std::exp(-I * a * z);
  cd sum = 0.0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    cd term = 1.0;
    for (std::size_t l = 0; l < roots.size(); ++l)
      if (l != k) term *= z - roots[l];
    sum += term;
  }
  return sum;
}

namespace {

// A fresh distribution per draw keeps samples a pure function of the engine state.
double gauss(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

cd complex_gauss(std::mt19937_64& rng) {
  const double re = gauss(rng);
  return {re, gauss(rng)};
}

VecC gauss_vector(std::mt19937_64& rng, int n) {
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_gauss(rng);
  return v;
}

bool is_integer(double x) { return std::abs(x - std::round(x)) == 0.0; }

cd power_of(cd w, double n) {
  if (is_integer(n)) return std::pow(w, static_cast<int>(std::lround(n)));
  return std::pow(w, cd(n, 0.0));
}

json cjson(cd v) { return json::array({v.real(), v.imag()}); }

cd cparse(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("expected a complex number as [re, im], got " + j.dump());
}

// Projective charts on unit-vector spaces: patch p sets component p to 1.
Eigen::Index argmax_abs(const VecC& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return k;
}

ChartPoint proj_to_chart(const VecC& z) {
  const auto m = z.size();
  const auto p = argmax_abs(z);
  ChartPoint c;
  c.patch = static_cast<int>(p);
  c.w.resize(m - 1);
  for (Eigen::Index i = 0, a = 0; i < m; ++i)
    if (i != p) c.w(a++) = z(i) / z(p);
  return c;
}

VecC proj_section(const ChartPoint& c, Eigen::Index m) {
  if (c.w.size() != m - 1 || c.patch < 0 || c.patch >= m) throw PreconditionError("chart point has wrong shape");
  VecC s(m);
  for (Eigen::Index i = 0, a = 0; i < m; ++i) s(i) = (i == c.patch) ? cd(1.0) : c.w(a++);
  return s;
}

std::optional<std::pair<ChartPoint, MatC>> proj_switch(const ChartPoint& c, Eigen::Index m) {
  if (c.w.size() == 0 || c.w.cwiseAbs().maxCoeff() <= 2.0) return std::nullopt;
  const VecC s = proj_section(c, m);
  ChartPoint nc = proj_to_chart(s);
  const auto q = static_cast<Eigen::Index>(nc.patch);
  auto label_of = [m](Eigen::Index patch, Eigen::Index a) { return a < patch ? a : a + 1; };
  MatC jac = MatC::Zero(m - 1, m - 1);
  for (Eigen::Index a = 0; a < m - 1; ++a) {
    const auto ia = label_of(q, a);
    for (Eigen::Index b = 0; b < m - 1; ++b) {
      const auto ib = label_of(c.patch, b);
      cd d = (ia == ib) ? cd(1.0) : cd(0.0);
      if (ib == q) d -= nc.w(a);
      jac(a, b) = d / s(q);
    }
  }
  return std::make_pair(nc, jac);
}

MatC fs_metric(const VecC& w, double scale) {
  const double r = 1.0 + w.squaredNorm();
  MatC g = MatC::Identity(w.size(), w.size()) / r - (w * w.adjoint()) / (r * r);
  return scale * g;
}

// Unit vectors in C^m carry the projective chart. The trivial space uses
// the same chart for its normalized rays.
class TrivialModel final : public KernelModel {
 public:
  explicit TrivialModel(int dim) : dim_(dim) {
    if (dim < 1) throw PreconditionError("trivial space needs dim >= 1");
  }
  KernelKind kind() const override { return KernelKind::Trivial; }
  int label_dim() const override { return dim_; }
  cd raw(const Point& z, const Point& z2) const override { return z.coords.dot(z2.coords); }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point&) const override { return z.coords.conjugate(); }
  MatC partial_mixed(const Point&, const Point&) const override { return MatC::Identity(dim_, dim_); }
  int chart_dim() const override { return dim_ - 1; }
  ChartPoint to_chart(const Point& z) const override { return proj_to_chart(z.coords); }
  Point from_chart(const ChartPoint& c) const override { return Point(proj_section(c, dim_).normalized()); }
  std::optional<std::pair<ChartPoint, MatC>> switch_chart(const ChartPoint& c) const override {
    return proj_switch(c, dim_);
  }
  std::optional<MatC> chart_metric(const ChartPoint& c) const override { return fs_metric(c.w, 1.0); }
  Point sample(std::mt19937_64& rng) const override { return Point(gauss_vector(rng, dim_)); }
  json descriptor() const override { return {{"kind", "trivial"}, {"dim", dim_}}; }

 private:
  int dim_;
};

class KlauderModel final : public KernelModel {
 public:
  explicit KlauderModel(int modes) : modes_(modes) {
    if (modes < 1) throw PreconditionError("klauder space needs modes >= 1");
  }
  KernelKind kind() const override { return KernelKind::Klauder; }
  int label_dim() const override { return modes_ + 1; }
  cd raw(const Point& z, const Point& z2) const override {
    return std::exp(std::conj(z.coords(0)) + z2.coords(0) + z.coords.tail(modes_).dot(z2.coords.tail(modes_)));
  }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point& z2) const override {
    VecC b = z.coords.conjugate();
    b(0) = 1.0;
    return raw(z, z2) * b;
  }
  MatC partial_mixed(const Point& z, const Point& z2) const override {
    VecC a = z2.coords;
    a(0) = 1.0;
    VecC b = z.coords.conjugate();
    b(0) = 1.0;
    MatC m = a * b.transpose();
    for (int i = 1; i <= modes_; ++i) m(i, i) += 1.0;
    return raw(z, z2) * m;
  }
  int chart_dim() const override { return modes_; }
  ChartPoint to_chart(const Point& z) const override { return {0, z.coords.tail(modes_)}; }
  Point from_chart(const ChartPoint& c) const override {
    VecC z(modes_ + 1);
    z(0) = -0.5 * c.w.squaredNorm();
    z.tail(modes_) = c.w;
    return Point(z);
  }
  std::optional<MatC> chart_metric(const ChartPoint&) const override { return MatC::Identity(modes_, modes_); }
  std::optional<MatC> linear_adjoint(const MatC& a) const override {
    // Only maps fixing z0 and acting linearly on zeta are coherent.
    if (a(0, 0) != cd(1.0)) return std::nullopt;
    for (int i = 1; i <= modes_; ++i)
      if (a(0, i) != cd(0.0) || a(i, 0) != cd(0.0)) return std::nullopt;
    return MatC(a.adjoint());
  }
  Point sample(std::mt19937_64& rng) const override {
    VecC z = gauss_vector(rng, modes_ + 1);
    z(0) *= 0.25;
    return Point(z);
  }
  json descriptor() const override { return {{"kind", "klauder"}, {"modes", modes_}}; }

 private:
  int modes_;
};

class SpinModel final : public KernelModel {
 public:
  SpinModel(double exponent, bool transpose) : n_(exponent), transpose_(transpose) {
    if (!(exponent >= 0.0) || !std::isfinite(exponent)) throw PreconditionError("spin exponent must be >= 0");
  }
  KernelKind kind() const override { return transpose_ ? KernelKind::SpinTranspose : KernelKind::Spin; }
  int label_dim() const override { return 2; }
  KernelForm form() const override { return transpose_ ? KernelForm::Bilinear : KernelForm::Sesquilinear; }
  bool normalized() const override { return true; }
  std::optional<std::string> violation(const Point& z) const override {
    const double r = std::abs(z.coords.squaredNorm() - 1.0);
    if (r > 1e-12) {
      std::ostringstream os;
      os << "unit-sphere constraint |z*z - 1| <= 1e-12 violated (residual " << r << ")";
      return os.str();
    }
    return std::nullopt;
  }
  cd raw(const Point& z, const Point& z2) const override {
    const cd w = transpose_ ? z.coords.transpose() * z2.coords : z.coords.dot(z2.coords);
    return power_of(w, n_);
  }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point& z2) const override {
    if (n_ == 0.0) return VecC::Zero(2);
    const cd w = z.coords.dot(z2.coords);
    return n_ * power_of(w, n_ - 1.0) * z.coords.conjugate();
  }
  MatC partial_mixed(const Point& z, const Point& z2) const override {
    if (n_ == 0.0) return MatC::Zero(2, 2);
    const cd w = z.coords.dot(z2.coords);
    MatC m = n_ * power_of(w, n_ - 1.0) * MatC::Identity(2, 2);
    if (n_ != 1.0) m += n_ * (n_ - 1.0) * power_of(w, n_ - 2.0) * (z2.coords * z.coords.adjoint());
    return m;
  }
  int chart_dim() const override { return 1; }
  ChartPoint to_chart(const Point& z) const override { return proj_to_chart(z.coords); }
  Point from_chart(const ChartPoint& c) const override { return Point(proj_section(c, 2).normalized()); }
  std::optional<std::pair<ChartPoint, MatC>> switch_chart(const ChartPoint& c) const override {
    return proj_switch(c, 2);
  }
  std::optional<MatC> chart_metric(const ChartPoint& c) const override { return fs_metric(c.w, n_); }
  Point retract(const Point& z) const override { return Point(z.coords.normalized()); }
  Point sample(std::mt19937_64& rng) const override { return Point(gauss_vector(rng, 2).normalized()); }
  json descriptor() const override { return {{"kind", transpose_ ? "spin_t" : "spin"}, {"exponent", n_}}; }

 private:
  double n_;
  bool transpose_;
};

class MoebiusModel final : public KernelModel {
 public:
  KernelKind kind() const override { return KernelKind::Moebius; }
  int label_dim() const override { return 2; }
  std::optional<std::string> violation(const Point& z) const override {
    if (!(std::abs(z.coords(0)) > std::abs(z.coords(1)))) return "constraint |z1| > |z2| violated";
    return std::nullopt;
  }
  cd raw(const Point& z, const Point& z2) const override { return 1.0 / form_of(z, z2); }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point& z2) const override {
    const cd q = form_of(z, z2);
    VecC c(2);
    c << std::conj(z.coords(0)), -std::conj(z.coords(1));
    return -c / (q * q);
  }
  MatC partial_mixed(const Point& z, const Point& z2) const override {
    const cd q = form_of(z, z2);
    VecC c(2), d(2);
    c << std::conj(z.coords(0)), -std::conj(z.coords(1));
    d << z2.coords(0), -z2.coords(1);
    MatC j = MatC::Zero(2, 2);
    j(0, 0) = 1.0;
    j(1, 1) = -1.0;
    return 2.0 / (q * q * q) * (d * c.transpose()) - j / (q * q);
  }
  int chart_dim() const override { return 1; }
  ChartPoint to_chart(const Point& z) const override {
    ChartPoint c;
    c.w = VecC::Constant(1, z.coords(1) / z.coords(0));
    return c;
  }
  Point from_chart(const ChartPoint& c) const override {
    const double r = 1.0 - std::norm(c.w(0));
    if (!(r > 0.0)) throw InvalidPointError("moebius: chart point outside the unit disk");
    const double z1 = 1.0 / std::sqrt(r);
    VecC z(2);
    z << z1, c.w(0) * z1;
    return Point(z);
  }
  std::optional<MatC> chart_metric(const ChartPoint& c) const override {
    const double r = 1.0 - std::norm(c.w(0));
    return MatC::Constant(1, 1, 1.0 / (r * r));
  }
  std::optional<MatC> linear_adjoint(const MatC& a) const override {
    MatC j = MatC::Zero(2, 2);
    j(0, 0) = 1.0;
    j(1, 1) = -1.0;
    return MatC(j * a.adjoint() * j);
  }
  Point sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(0.0, 0.9), phase(0.0, 2.0 * std::numbers::pi);
    const cd z1 = complex_gauss(rng) + cd(0.1, 0.0);
    VecC z(2);
    z << z1, z1 * std::polar(u(rng), phase(rng));
    return Point(z);
  }
  json descriptor() const override { return {{"kind", "moebius"}}; }

 private:
  static cd form_of(const Point& z, const Point& z2) {
    return std::conj(z.coords(0)) * z2.coords(0) - std::conj(z.coords(1)) * z2.coords(1);
  }
};

class DeBrangesModel final : public KernelModel {
 public:
  explicit DeBrangesModel(DeBrangesE e) : e_(std::move(e)) {
    if (e_.type == DeBrangesE::Type::PaleyWiener && !(e_.a > 0.0))
      throw PreconditionError("debranges: Paley-Wiener type needs a > 0");
    if (e_.type == DeBrangesE::Type::PolyRoots) {
      for (const cd& r : e_.roots)
        if (!(r.imag() < 0.0)) throw PreconditionError("debranges: polynomial roots must lie in the lower half plane");
    }
  }
  KernelKind kind() const override { return KernelKind::DeBranges; }
  int label_dim() const override { return 1; }
  cd raw(const Point& zp, const Point& z2p) const override {
    const cd z = zp.coords(0), x = z2p.coords(0);
    const cd zc = std::conj(z);
    const cd ez = std::conj(e_.value(z)), ezc = e_.value(zc);
    const cd d = zc - x;
    if (std::abs(d) <= 1e-12 * (1.0 + std::abs(z))) {
      const cd dn = ez * e_.derivative(zc) - ezc * e_.sharp_derivative(zc);
      return -dn / (2.0 * I);
    }
    return (ez * e_.value(x) - ezc * e_.sharp(x)) / (2.0 * I * d);
  }
  Point sample(std::mt19937_64& rng) const override {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return Point{cd(u(rng), u(rng))};
  }
  json descriptor() const override {
    json e;
    if (e_.type == DeBrangesE::Type::PaleyWiener) {
      e = {{"type", "paley_wiener"}, {"a", e_.a}};
    } else {
      json roots = json::array();
      for (const cd& r : e_.roots) roots.push_back(cjson(r));
      e = {{"type", "poly_roots"}, {"roots", roots}};
    }
    return {{"kind", "debranges"}, {"E", e}};
  }

 private:
  DeBrangesE e_;
};

class ClassicalLimitModel final : public KernelModel {
 public:
  explicit ClassicalLimitModel(KernelSpace base) : base_(std::move(base)) {}
  KernelKind kind() const override { return KernelKind::ClassicalLimit; }
  int label_dim() const override { return base_.label_dim(); }
  KernelForm form() const override { return KernelForm::Bilinear; }
  bool uses_multiplier() const override { return base_.model().uses_multiplier(); }
  bool normalized() const override { return true; }
  std::optional<std::string> violation(const Point& z) const override { return base_.model().violation(z); }
  Point conjugate(const Point& z) const override { return base_.conjugate(z); }
  cd raw(const Point& z, const Point& z2) const override {
    return label_distance(base_.conjugate(z), z2) <= 1e-12 ? cd(1.0) : cd(0.0);
  }
  Point sample(std::mt19937_64& rng) const override { return base_.sample(rng); }
  json descriptor() const override { return {{"kind", "classical_limit"}, {"base", base_.descriptor()}}; }

 private:
  KernelSpace base_;
};

class PowerModel final : public KernelModel {
 public:
  PowerModel(KernelSpace base, int n) : base_(std::move(base)), n_(n) {
    if (n < 1) throw PreconditionError("power space needs n >= 1");
  }
  KernelKind kind() const override { return KernelKind::Power; }
  int label_dim() const override { return base_.label_dim(); }
  KernelForm form() const override { return base_.form(); }
  bool uses_multiplier() const override { return base_.model().uses_multiplier(); }
  bool normalized() const override { return base_.normalized(); }
  std::optional<int> projective_degree() const override {
    if (auto e = base_.projective_degree()) return *e * n_;
    return std::nullopt;
  }
  std::optional<std::string> violation(const Point& z) const override { return base_.model().violation(z); }
  Point conjugate(const Point& z) const override { return base_.conjugate(z); }
  cd raw(const Point& z, const Point& z2) const override { return std::pow(base_.model().raw(z, z2), n_); }
  bool has_partials() const override { return base_.has_partials(); }
  VecC partial_second(const Point& z, const Point& z2) const override {
    const cd p = base_.product(z, z2);
    return static_cast<double>(n_) * std::pow(p, n_ - 1) * base_.model().partial_second(z, z2);
  }
  MatC partial_mixed(const Point& z, const Point& z2) const override {
    const cd p = base_.product(z, z2);
    MatC m = static_cast<double>(n_) * std::pow(p, n_ - 1) * base_.model().partial_mixed(z, z2);
    if (n_ > 1) {
      const VecC d2 = base_.model().partial_second(z, z2);
      const VecC d1 = base_.model().partial_second(z2, z).conjugate();
      m += static_cast<double>(n_ * (n_ - 1)) * std::pow(p, n_ - 2) * (d1 * d2.transpose());
    }
    return m;
  }
  Point retract(const Point& z) const override { return base_.model().retract(z); }
  int chart_dim() const override { return base_.chart_dim(); }
  ChartPoint to_chart(const Point& z) const override { return base_.model().to_chart(z); }
  Point from_chart(const ChartPoint& c) const override { return base_.model().from_chart(c); }
  std::optional<std::pair<ChartPoint, MatC>> switch_chart(const ChartPoint& c) const override {
    return base_.model().switch_chart(c);
  }
  std::optional<MatC> chart_metric(const ChartPoint& c) const override {
    if (auto g = base_.model().chart_metric(c)) return MatC(static_cast<double>(n_) * *g);
    return std::nullopt;
  }
  std::optional<MatC> linear_adjoint(const MatC& a) const override { return base_.model().linear_adjoint(a); }
  Point apply_linear(const MatC& a, const Point& z) const override { return base_.model().apply_linear(a, z); }
  Point sample(std::mt19937_64& rng) const override { return base_.sample(rng); }
  json descriptor() const override { return {{"kind", "power"}, {"base", base_.descriptor()}, {"n", n_}}; }

 private:
  KernelSpace base_;
  int n_;
};

class EuclideanModel final : public KernelModel {
 public:
  EuclideanModel(int dim, std::vector<VecR> points, bool icosahedron)
      : dim_(dim), points_(std::move(points)), icosahedron_(icosahedron) {
    if (dim < 1) throw PreconditionError("euclidean_subset needs dim >= 1");
    for (const auto& p : points_)
      if (p.size() != dim) throw PreconditionError("euclidean_subset: point of wrong dimension");
  }
  KernelKind kind() const override { return KernelKind::EuclideanSubset; }
  int label_dim() const override { return dim_; }
  std::optional<std::string> violation(const Point& z) const override {
    if (z.coords.imag().cwiseAbs().maxCoeff() > 1e-12) return "labels must be real vectors";
    if (points_.empty()) return std::nullopt;
    for (const auto& p : points_)
      if ((z.coords.real() - p).cwiseAbs().maxCoeff() <= 1e-12) return std::nullopt;
    return "label is not a member of the declared subset";
  }
  cd raw(const Point& z, const Point& z2) const override { return z.coords.dot(z2.coords); }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point&) const override { return z.coords.conjugate(); }
  MatC partial_mixed(const Point&, const Point&) const override { return MatC::Identity(dim_, dim_); }
  std::optional<MatC> linear_adjoint(const MatC& a) const override { return MatC(a.adjoint()); }
  Point sample(std::mt19937_64& rng) const override {
    if (!points_.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
      return Point(points_[pick(rng)].cast<cd>());
    }
    VecC v(dim_);
    for (int i = 0; i < dim_; ++i) v(i) = gauss(rng);
    return Point(v);
  }
  json descriptor() const override {
    if (icosahedron_) return {{"kind", "icosahedron"}};
    json pts = json::array();
    for (const auto& p : points_) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    return {{"kind", "euclidean_subset"}, {"dim", dim_}, {"points", pts}};
  }

 private:
  int dim_;
  std::vector<VecR> points_;
  bool icosahedron_;
};

class DiscreteModel final : public KernelModel {
 public:
  DiscreteModel(std::vector<VecC> points, MatC table) : points_(std::move(points)), table_(std::move(table)) {
    if (points_.empty()) throw PreconditionError("discrete space needs at least one point");
    const auto n = static_cast<Eigen::Index>(points_.size());
    if (table_.rows() != n || table_.cols() != n) throw PreconditionError("discrete space: table must be n x n");
    dim_ = static_cast<int>(points_[0].size());
    for (const auto& p : points_)
      if (p.size() != dim_) throw PreconditionError("discrete space: points differ in dimension");
    const double asym = (table_ - table_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + table_.cwiseAbs().maxCoeff()))
      throw PreconditionError("discrete space: kernel table is not Hermitian");
  }
  KernelKind kind() const override { return KernelKind::Discrete; }
  int label_dim() const override { return dim_; }
  std::optional<std::string> violation(const Point& z) const override {
    if (index_of(z) < 0) return "label is not one of the listed points";
    return std::nullopt;
  }
  cd raw(const Point& z, const Point& z2) const override {
    const auto i = index_of(z), j = index_of(z2);
    if (i < 0 || j < 0) throw InvalidPointError("discrete: label is not one of the listed points");
    return table_(i, j);
  }
  Point sample(std::mt19937_64& rng) const override {
    std::uniform_int_distribution<std::size_t> pick(0, points_.size() - 1);
    return Point(points_[pick(rng)]);
  }
  json descriptor() const override {
    json pts = json::array(), tab = json::array();
    for (const auto& p : points_) {
      json q = json::array();
      for (Eigen::Index i = 0; i < p.size(); ++i) q.push_back(cjson(p(i)));
      pts.push_back(q);
    }
    for (Eigen::Index i = 0; i < table_.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < table_.cols(); ++j) row.push_back(cjson(table_(i, j)));
      tab.push_back(row);
    }
    return {{"kind", "discrete"}, {"points", pts}, {"table", tab}};
  }

 private:
  Eigen::Index index_of(const Point& z) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (z.size() == dim_ && (z.coords - points_[i]).cwiseAbs().maxCoeff() <= 1e-12)
        return static_cast<Eigen::Index>(i);
    return -1;
  }
  std::vector<VecC> points_;
  MatC table_;
  int dim_ = 0;
};

class HeisenbergModel final : public KernelModel {
 public:
  HeisenbergModel(int dim, double hbar) : dim_(dim), hbar_(hbar) {
    if (dim < 1) throw PreconditionError("heisenberg space needs dim >= 1");
    if (!(hbar > 0.0)) throw PreconditionError("hbar must be positive");
  }
  KernelKind kind() const override { return KernelKind::Heisenberg; }
  int label_dim() const override { return dim_; }
  KernelForm form() const override { return KernelForm::Bilinear; }
  bool uses_multiplier() const override { return true; }
  std::optional<int> projective_degree() const override { return 1; }
  cd raw(const Point& z, const Point& z2) const override {
    const cd s = z.coords.transpose() * z2.coords;
    return *z.multiplier * *z2.multiplier * std::exp(s / hbar_);
  }
  bool has_partials() const override { return true; }
  VecC partial_second(const Point& z, const Point& z2) const override {
    return herm(z, z2) / hbar_ * z.coords.conjugate();
  }
  MatC partial_mixed(const Point& z, const Point& z2) const override {
    MatC m = (z2.coords * z.coords.adjoint()) / (hbar_ * hbar_) + MatC::Identity(dim_, dim_) / hbar_;
    return herm(z, z2) * m;
  }
  int chart_dim() const override { return dim_; }
  ChartPoint to_chart(const Point& z) const override { return {0, z.coords}; }
  Point from_chart(const ChartPoint& c) const override {
    return Point(c.w, cd(std::exp(-0.5 * c.w.squaredNorm() / hbar_), 0.0));
  }
  std::optional<MatC> chart_metric(const ChartPoint&) const override {
    return MatC(MatC::Identity(dim_, dim_) / hbar_);
  }
  Point apply_linear(const MatC& a, const Point& z) const override { return Point(a * z.coords, *z.multiplier); }
  Point sample(std::mt19937_64& rng) const override {
    cd lam = complex_gauss(rng);
    if (std::abs(lam) < 1e-3) lam = 1.0;
    return Point(gauss_vector(rng, dim_), lam);
  }
  json descriptor() const override { return {{"kind", "heisenberg"}, {"dim", dim_}, {"hbar", hbar_}}; }

 private:
  cd herm(const Point& z, const Point& z2) const {
    return std::conj(*z.multiplier) * *z2.multiplier * std::exp(z.coords.dot(z2.coords) / hbar_);
  }
  int dim_;
  double hbar_;
};

}  // namespace

KernelSpace trivial_space(int dim) { return KernelSpace(std::make_shared<TrivialModel>(dim)); }
KernelSpace klauder_space(int modes) { return KernelSpace(std::make_shared<KlauderModel>(modes)); }
KernelSpace spin_space(double exponent) { return KernelSpace(std::make_shared<SpinModel>(exponent, false)); }
KernelSpace spin_t_space(double exponent) { return KernelSpace(std::make_shared<SpinModel>(exponent, true)); }
KernelSpace moebius_space() { return KernelSpace(std::make_shared<MoebiusModel>()); }
KernelSpace debranges_space(DeBrangesE e) { return KernelSpace(std::make_shared<DeBrangesModel>(std::move(e))); }
KernelSpace classical_limit_space(KernelSpace base) {
  return KernelSpace(std::make_shared<ClassicalLimitModel>(std::move(base)));
}
KernelSpace power_space(KernelSpace base, int n) {
  return KernelSpace(std::make_shared<PowerModel>(std::move(base), n));
}
KernelSpace euclidean_subset_space(int dim, std::vector<VecR> points) {
  return KernelSpace(std::make_shared<EuclideanModel>(dim, std::move(points), false));
}
KernelSpace icosahedron_space() {
  return KernelSpace(std::make_shared<EuclideanModel>(3, icosahedron_vertices(), true));
}
KernelSpace discrete_space(std::vector<VecC> points, MatC table) {
  return KernelSpace(std::make_shared<DiscreteModel>(std::move(points), std::move(table)));
}
KernelSpace heisenberg_space(int dim, double hbar) {
  return KernelSpace(std::make_shared<HeisenbergModel>(dim, hbar));
}

std::vector<VecR> icosahedron_vertices() {
  const double phi = std::numbers::phi;
  std::vector<VecR> v;
  for (double a : {-1.0, 1.0})
    for (double b : {-phi, phi}) {
      v.push_back((VecR(3) << 0.0, a, b).finished());
      v.push_back((VecR(3) << a, b, 0.0).finished());
      v.push_back((VecR(3) << b, 0.0, a).finished());
    }
  for (auto& x : v) x.normalize();
  return v;
}

namespace {

void require_keys(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (!j.contains(k)) throw std::invalid_argument(std::string("space descriptor missing '") + k + "'");
}

}  // namespace

KernelSpace space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("space descriptor needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "trivial") {
    require_keys(j, {"dim"});
    return trivial_space(j.at("dim").get<int>());
  }
  if (kind == "klauder") return klauder_space(j.value("modes", 1));
  if (kind == "spin" || kind == "spin_t") {
    require_keys(j, {"exponent"});
    const double n = j.at("exponent").get<double>();
    return kind == "spin" ? spin_space(n) : spin_t_space(n);
  }
  if (kind == "moebius") return moebius_space();
  if (kind == "debranges") {
    require_keys(j, {"E"});
    const json& e = j.at("E");
    DeBrangesE de;
    const auto type = e.at("type").get<std::string>();
    if (type == "paley_wiener") {
      de.type = DeBrangesE::Type::PaleyWiener;
      de.a = e.at("a").get<double>();
    } else if (type == "poly_roots") {
      for (const auto& r : e.at("roots")) de.roots.push_back(cparse(r));
    } else {
      throw std::invalid_argument("unknown de Branges E type '" + type + "'");
    }
    return debranges_space(std::move(de));
  }
  if (kind == "classical_limit") {
    require_keys(j, {"base"});
    return classical_limit_space(space_from_json(j.at("base")));
  }
  if (kind == "power") {
    require_keys(j, {"base", "n"});
    return power_space(space_from_json(j.at("base")), j.at("n").get<int>());
  }
  if (kind == "icosahedron") return icosahedron_space();
  if (kind == "euclidean_subset") {
    require_keys(j, {"dim"});
    std::vector<VecR> pts;
    for (const auto& p : j.value("points", json::array())) {
      const auto v = p.get<std::vector<double>>();
      pts.push_back(Eigen::Map<const VecR>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return euclidean_subset_space(j.at("dim").get<int>(), std::move(pts));
  }
  if (kind == "discrete") {
    require_keys(j, {"points", "table"});
    std::vector<VecC> pts;
    for (const auto& p : j.at("points")) pts.push_back(point_from_json(p).coords);
    const auto& t = j.at("table");
    const auto n = static_cast<Eigen::Index>(t.size());
    MatC tab(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      if (t[a].size() != static_cast<std::size_t>(n)) throw std::invalid_argument("discrete table must be square");
      for (Eigen::Index b = 0; b < n; ++b) tab(a, b) = cparse(t[a][b]);
    }
    return discrete_space(std::move(pts), std::move(tab));
  }
  if (kind == "heisenberg") {
    require_keys(j, {"dim"});
    return heisenberg_space(j.at("dim").get<int>(), j.value("hbar", 1.0));
  }
  throw std::invalid_argument("unknown space kind '" + kind + "'");
}

json point_to_json(const Point& p) {
  json coords = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) coords.push_back(cjson(p.coords(i)));
  if (!p.multiplier) return coords;
  return {{"coords", coords}, {"multiplier", cjson(*p.multiplier)}};
}

Point point_from_json(const json& j) {
  const json* coords = &j;
  std::optional<cd> mult;
  if (j.is_object()) {
    if (!j.contains("coords")) throw std::invalid_argument("point object needs 'coords'");
    coords = &j.at("coords");
    if (j.contains("multiplier")) mult = cparse(j.at("multiplier"));
  }
  if (!coords->is_array()) throw std::invalid_argument("point coords must be an array of [re, im] pairs");
  VecC c(static_cast<Eigen::Index>(coords->size()));
  for (std::size_t i = 0; i < coords->size(); ++i) c(static_cast<Eigen::Index>(i)) = cparse((*coords)[i]);
  Point p(c);
  p.multiplier = mult;
  return p;
}

json points_to_json(const PointList& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_to_json(p));
  return out;
}

PointList points_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("point list must be a JSON array");
  PointList out;
  for (const auto& p : j) out.push_back(point_from_json(p));
  return out;
}

}  // namespace cohspace
