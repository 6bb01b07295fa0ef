#pragma once

#include <cmath>
#include <vector>

namespace oracle {

// Radial Schroedinger equation -(hbar^2/2m) u'' + (l(l+1) hbar^2/(2 m r^2) - alpha/r) u = E u
// on (0, r_max) with u = 0 at both ends, three-point differences on `points`
// interior nodes. Eigenvalues by Sturm-sequence bisection.
class RadialCoulomb {
 public:
  RadialCoulomb(double mass, double alpha, int l, double r_max, int points, double hbar = 1.0)
      : d_(static_cast<std::size_t>(points)) {
    const double h = r_max / (points + 1);
    const double t = hbar * hbar / (2.0 * mass * h * h);
    off2_ = t * t;
    for (int i = 0; i < points; ++i) {
      const double r = (i + 1) * h;
      d_[static_cast<std::size_t>(i)] = 2.0 * t + l * (l + 1) * hbar * hbar / (2.0 * mass * r * r) - alpha / r;
    }
    lo_ = -alpha * alpha * mass / (hbar * hbar) * 4.0 - 4.0 * t;
    hi_ = 4.0 * t + 1.0;
  }

  // number of eigenvalues below x
  int count_below(double x) const {
    int c = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d_.size(); ++i) {
      q = d_[i] - x - (i == 0 ? 0.0 : off2_ / q);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++c;
    }
    return c;
  }

  // k-th eigenvalue, k = 0, 1, ...
  double eigenvalue(int k) const {
    double a = lo_, b = hi_;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double m = 0.5 * (a + b);
      (count_below(m) > k ? b : a) = m;
    }
    return 0.5 * (a + b);
  }

 private:
  std::vector<double> d_;
  double off2_;
  double lo_, hi_;
};

}  // namespace oracle
