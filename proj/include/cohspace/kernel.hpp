#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "cohspace/types.hpp"

namespace cohspace {

enum class KernelKind {
  Trivial,
  Klauder,
  Spin,
  SpinTranspose,
  Moebius,
  DeBranges,
  ClassicalLimit,
  Power,
  EuclideanSubset,
  Discrete,
  Heisenberg,
};

std::string to_string(KernelKind kind);

// Sesquilinear spaces evaluate <z|z'> directly. Bilinear spaces follow the
// transpose convention <z|z'> = K(conj z, z').
enum class KernelForm { Sesquilinear, Bilinear };

// Holomorphic chart coordinates of a point. `patch` selects the chart when
// the space needs more than one.
struct ChartPoint {
  int patch = 0;
  VecC w;
};

// Implementation interface behind KernelSpace. The catalog provides one
// subclass per kind; user code normally goes through KernelSpace.
class KernelModel {
 public:
  virtual ~KernelModel() = default;

  virtual KernelKind kind() const = 0;
  virtual int label_dim() const = 0;
  virtual KernelForm form() const { return KernelForm::Sesquilinear; }
  virtual bool uses_multiplier() const { return false; }
  virtual bool normalized() const { return false; }
  virtual std::optional<int> projective_degree() const { return std::nullopt; }

  // Raw kernel value K(z, z') in the space's own form.
  virtual cd raw(const Point& z, const Point& z2) const = 0;

  // Empty when the point satisfies the space's constraints, otherwise a
  // description of the violated constraint.
  virtual std::optional<std::string> violation(const Point& z) const;

  virtual Point conjugate(const Point& z) const;
  // Nearest valid label for a point that drifted off the constraint set
  // through roundoff or integration error.
  virtual Point retract(const Point& z) const { return z; }

  // Analytic partials of the coherent product P(z,z') = <z|z'> with respect
  // to the label coordinates: dP/dz'_k and d^2P/d(conj z_j) dz'_k.
  virtual bool has_partials() const { return false; }
  virtual VecC partial_second(const Point& z, const Point& z2) const;
  virtual MatC partial_mixed(const Point& z, const Point& z2) const;

  // Charts. chart_dim() == 0 means the space has no holomorphic chart.
  virtual int chart_dim() const { return 0; }
  virtual ChartPoint to_chart(const Point& z) const;
  virtual Point from_chart(const ChartPoint& c) const;
  // Re-expresses c in a better-conditioned patch if needed, together with the
  // Jacobian d w_new / d w_old. Returns nullopt when c is fine as is.
  virtual std::optional<std::pair<ChartPoint, MatC>> switch_chart(const ChartPoint& c) const;
  virtual std::optional<MatC> chart_metric(const ChartPoint& c) const;

  // Default adjoint of a linear label map (conjugate transpose unless the
  // coherent product uses an indefinite form).
  virtual std::optional<MatC> linear_adjoint(const MatC& a) const;
  virtual Point apply_linear(const MatC& a, const Point& z) const;

  virtual Point sample(std::mt19937_64& rng) const = 0;
  virtual nlohmann::json descriptor() const = 0;
};

// A coherent space: a set of labels with a positive semidefinite kernel.
// Cheap to copy; the model is shared and immutable.
class KernelSpace {
 public:
  KernelSpace() = default;
  explicit KernelSpace(std::shared_ptr<const KernelModel> model) : model_(std::move(model)) {}

  const KernelModel& model() const { return *model_; }
  bool valid() const { return static_cast<bool>(model_); }

  KernelKind kind() const { return model_->kind(); }
  int label_dim() const { return model_->label_dim(); }
  KernelForm form() const { return model_->form(); }
  bool normalized() const { return model_->normalized(); }
  std::optional<int> projective_degree() const { return model_->projective_degree(); }
  bool has_partials() const { return model_->has_partials(); }
  int chart_dim() const { return model_->chart_dim(); }

  // Throws InvalidPointError naming the violated constraint.
  void validate(const Point& z) const;
  Point conjugate(const Point& z) const { return model_->conjugate(z); }
  Point sample(std::mt19937_64& rng) const { return model_->sample(rng); }
  PointList sample(std::mt19937_64& rng, std::size_t count) const;

  // Hermitian coherent product <z|z'> without validation (hot path).
  cd product(const Point& z, const Point& z2) const;
  nlohmann::json descriptor() const { return model_->descriptor(); }

 private:
  std::shared_ptr<const KernelModel> model_;
};

struct PsdVerdict {
  double min_eigenvalue = 0.0;
  double gram_norm = 0.0;
  bool passed = false;
  double tolerance_used = 0.0;
};

struct CoherentMapCheck {
  bool passed = false;
  double max_residual = 0.0;
};

struct MoebiusMembership {
  bool member = false;
  double alpha = 0.0;
  cd beta;
  double gamma = 0.0;
};

struct ProjectiveCheck {
  bool passed = false;
  double max_residual = 0.0;
};

using LabelMap = std::function<Point(const Point&)>;

// Raw kernel K(z, z2) in the space's form; validates both points.
cd eval_kernel(const KernelSpace& space, const Point& z, const Point& z2);

// Coherent product <z|z2> (Hermitian in its arguments); validates both points.
cd coherent_product(const KernelSpace& space, const Point& z, const Point& z2);

// Distance sqrt(K(z,z) + K(z2,z2) - 2 Re K(z,z2)).
double distance(const KernelSpace& space, const Point& z, const Point& z2);

// Hermitian Gram matrix G_jk = <z_j|z_k>. Entries are computed independently,
// so the result does not depend on the thread count.
MatC gram_matrix(const KernelSpace& space, std::span<const Point> points, int threads = 1);

// Positivity test: passed iff min eigenvalue >= -tol * max(1, ||G||_2).
PsdVerdict check_coherence(const KernelSpace& space, std::span<const Point> points, double tol = 1e-8);
PsdVerdict psd_verdict(const MatC& gram, double tol);

// Checks <z|A z'> == <A_adj z|z'> on the sample pairs.
CoherentMapCheck check_coherent_map(const KernelSpace& space, const LabelMap& a, const LabelMap& a_adj,
                                    std::span<const std::pair<Point, Point>> samples, double tol = 1e-8);

// Compression-semigroup membership for 2x2 matrices acting on the Moebius space.
MoebiusMembership moebius_semigroup_member(const MatC& a);

// Projective law K(lambda z, z') = lambda^e K(z, z') on the given samples.
ProjectiveCheck check_projective_law(const KernelSpace& space, std::span<const std::pair<Point, Point>> samples,
                                     std::span<const cd> scalars, double tol = 1e-10);

// Scalar multiplication of a projective point (scales the multiplier).
Point scale_point(const KernelSpace& space, cd lambda, const Point& z);

// dP(z,z')/dz'_k and d^2P/d(conj z_j) dz'_k. Analytic when the space has
// partials, otherwise central differences with Richardson over (h, h/2).
VecC product_partial_second(const KernelSpace& space, const Point& z, const Point& z2, double h = 1e-4);
MatC product_partial_mixed(const KernelSpace& space, const Point& z, const Point& z2, double h = 1e-4);

// Richardson combination of two central-difference estimates at steps h and h/2.
template <class T>
T richardson(const T& coarse, const T& fine) {
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace cohspace
