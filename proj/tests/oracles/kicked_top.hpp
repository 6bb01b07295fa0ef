#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace oracle {

// Classical kicked top on the unit sphere: rotation by p about y, then a
// twist about z by angle k * z.
struct KickedTop {
  double k;
  double p;

  Eigen::Vector3d step(const Eigen::Vector3d& n) const {
    const double c = std::cos(p), s = std::sin(p);
    const Eigen::Vector3d r(n.x() * c + n.z() * s, n.y(), n.z() * c - n.x() * s);
    const double th = k * r.z();
    return {r.x() * std::cos(th) - r.y() * std::sin(th), r.x() * std::sin(th) + r.y() * std::cos(th), r.z()};
  }

  Eigen::Matrix3d jacobian(const Eigen::Vector3d& n) const {
    const double c = std::cos(p), s = std::sin(p);
    Eigen::Matrix3d rot;
    rot << c, 0, s, 0, 1, 0, -s, 0, c;
    const Eigen::Vector3d r = rot * n;
    const double th = k * r.z(), ct = std::cos(th), st = std::sin(th);
    Eigen::Matrix3d tw;
    tw << ct, -st, k * (-r.x() * st - r.y() * ct), st, ct, k * (r.x() * ct - r.y() * st), 0, 0, 1;
    return tw * rot;
  }

  // Average log stretch per kick of a tangent vector.
  double lyapunov(Eigen::Vector3d n, int kicks) const {
    Eigen::Vector3d v = n.unitOrthogonal();
    double total = 0.0;
    for (int i = 0; i < kicks; ++i) {
      v = jacobian(n) * v;
      n = step(n);
      v -= v.dot(n) * n;
      const double l = v.norm();
      total += std::log(l);
      v /= l;
    }
    return total / kicks;
  }
};

}  // namespace oracle
