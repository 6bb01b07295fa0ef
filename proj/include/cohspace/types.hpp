#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace cohspace {

using cd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr cd I{0.0, 1.0};

// A label of a coherent state. `multiplier` is only used by projective spaces,
// where it is the scalar of the line-bundle fiber.
struct Point {
  VecC coords;
  std::optional<cd> multiplier;

  Point() = default;
  explicit Point(VecC c) : coords(std::move(c)) {}
  Point(VecC c, cd m) : coords(std::move(c)), multiplier(m) {}
  Point(std::initializer_list<cd> c) : coords(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (const cd& v : c) coords(i++) = v;
  }

  Eigen::Index size() const { return coords.size(); }
};

// Max-norm distance between two labels, including the multiplier.
double label_distance(const Point& a, const Point& b);

using PointList = std::vector<Point>;

}  // namespace cohspace
