#include "cohspace/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "cohspace/errors.hpp"
#include "cohspace/quantization.hpp"

namespace cohspace {

LinearHamiltonianFlow LinearHamiltonianFlow::constant(MatC h, double hbar) {
  if (!(hbar > 0.0)) throw PreconditionError("hbar must be positive");
  LinearHamiltonianFlow f;
  f.h = [m = std::move(h)](double) { return m; };
  f.hbar = hbar;
  f.time_independent = true;
  return f;
}

namespace {

void check_span(std::pair<double, double> span) {
  if (!std::isfinite(span.first) || !std::isfinite(span.second) || span.second < span.first)
    throw PreconditionError("time span must be finite and increasing");
}

std::vector<double> outputs_for(const FlowOptions& opt, std::pair<double, double> span) {
  std::vector<double> out = opt.sample_times;
  for (double t : out)
    if (t < span.first || t > span.second) throw PreconditionError("sample time outside the time span");
  std::sort(out.begin(), out.end());
  return out;
}

double real_product(const KernelSpace& s, const Point& z) { return s.product(z, z).real(); }

std::string format_directions(const Eigen::SelfAdjointEigenSolver<MatC>& es, double cut) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) >= cut) continue;
    os << " [";
    for (Eigen::Index k = 0; k < es.eigenvectors().rows(); ++k) {
      const cd v = es.eigenvectors()(k, i);
      os << (k ? ", " : "") << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
    }
    os << "]";
  }
  return os.str();
}

MatC checked_metric(MatC g) {
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatC> es(g);
  const double tr = g.trace().real();
  const double cut = 1e-12 * std::abs(tr);
  if (!(tr > 0.0) || es.eigenvalues().minCoeff() < cut) {
    std::ostringstream os;
    os << "Kaehler metric is singular (min eigenvalue " << es.eigenvalues().minCoeff() << ", trace " << tr
       << "); null directions:" << format_directions(es, std::max(cut, 0.0) + 1e-300);
    throw DegenerateMetricError(os.str());
  }
  return g;
}

ChartPoint shifted(const ChartPoint& c, Eigen::Index j, cd d) {
  ChartPoint s = c;
  s.w(j) += d;
  return s;
}

}  // namespace

Trajectory coherent_flow(const KernelSpace& space, const LinearHamiltonianFlow& flow, const Point& z0,
                         std::pair<double, double> t_span, const FlowOptions& opt) {
  check_span(t_span);
  space.validate(z0);
  if (!flow.h) throw PreconditionError("coherent_flow: missing generator");
  if (!(flow.hbar > 0.0)) throw PreconditionError("hbar must be positive");
  const auto d = space.label_dim();
  const MatC h0 = flow.h(t_span.first);
  if (h0.rows() != d || h0.cols() != d) throw PreconditionError("coherent_flow: H does not match the label dimension");

  Trajectory tr;
  const double norm0 = real_product(space, z0);
  const cd scale = -I / flow.hbar;
  auto rhs = [&](double t, const VecC& y, VecC& dy) {
    if (flow.time_independent)
      dy.noalias() = scale * (h0 * y);
    else
      dy.noalias() = scale * (flow.h(t) * y);
  };
  auto emit = [&](double t, const VecC& y) {
    Point p = z0.multiplier ? Point(y, *z0.multiplier) : Point(y);
    p = space.model().retract(p);
    if (auto v = space.model().violation(p))
      throw IntegratorFailureError("coherent_flow: trajectory left the space at t=" + std::to_string(t) + ": " + *v);
    const double nrm = real_product(space, p);
    tr.times.push_back(t);
    tr.energy.push_back(linear_energy(space, flow.time_independent ? h0 : flow.h(t)).value(p));
    tr.norm.push_back(nrm);
    tr.norm_drift = std::max(tr.norm_drift, std::abs(nrm - norm0) / std::max(norm0, 1e-300));
    tr.points.push_back(std::move(p));
  };
  VecC y = z0.coords;
  const auto outs = outputs_for(opt, t_span);
  tr.stats = dopri5(rhs, t_span.first, y, t_span.second, opt.ode, outs, emit);
  return tr;
}

FiniteRepresentation fock_representation(const KernelSpace& klauder, const LinearHamiltonianFlow& flow, int cutoff) {
  if (klauder.kind() != KernelKind::Klauder || klauder.label_dim() != 2)
    throw UnsupportedError("fock_representation needs the one-mode Klauder space");
  if (cutoff < 1) throw PreconditionError("Fock cutoff must be >= 1");
  FiniteRepresentation rep;
  rep.dim = cutoff;
  rep.time_independent = flow.time_independent;
  rep.embed = [cutoff](const Point& z) {
    VecC e(cutoff);
    const cd zeta = z.coords(1);
    e(0) = std::exp(z.coords(0));
    for (int k = 1; k < cutoff; ++k) e(k) = e(k - 1) * zeta / std::sqrt(static_cast<double>(k));
    const double total = std::exp(2.0 * z.coords(0).real() + std::norm(zeta));
    const double tail = 1.0 - e.squaredNorm() / total;
    if (tail > 1e-12) {
      std::ostringstream os;
      os << "Fock cutoff " << cutoff << " leaves tail mass " << tail << " > 1e-12 at |zeta| = " << std::abs(zeta)
         << "; raise the cutoff";
      throw TruncationError(os.str());
    }
    return e;
  };
  rep.generator = [cutoff, h = flow.h](double t) {
    const MatC m = h(t);
    const double tol = 1e-14 * (1.0 + m.norm());
    if (std::abs(m(0, 0)) > tol || std::abs(m(0, 1)) > tol || std::abs(m(1, 0)) > tol)
      throw PreconditionError("fock_representation: H must have zero first row and column");
    MatC g = MatC::Zero(cutoff, cutoff);
    for (int k = 0; k < cutoff; ++k) g(k, k) = m(1, 1) * static_cast<double>(k);
    return g;
  };
  return rep;
}

FiniteRepresentation spin_representation(const KernelSpace& spin, const LinearHamiltonianFlow& flow) {
  if (spin.kind() != KernelKind::Spin) throw UnsupportedError("spin_representation needs a spin space");
  const double nd = spin.descriptor().at("exponent").get<double>();
  if (nd != std::round(nd)) throw UnsupportedError("spin_representation needs an integer exponent");
  const int n = static_cast<int>(nd);
  FiniteRepresentation rep;
  rep.dim = n + 1;
  rep.time_independent = flow.time_independent;
  std::vector<double> binom(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) binom[k] = binom[k - 1] * (n - k + 1) / k;
  rep.embed = [n, binom](const Point& z) {
    VecC e(n + 1);
    for (int k = 0; k <= n; ++k)
      e(k) = std::sqrt(binom[k]) * std::pow(z.coords(0), n - k) * std::pow(z.coords(1), k);
    return e;
  };
  // Schwinger bosons: state k has n-k quanta in mode 0 and k in mode 1.
  rep.generator = [n, h = flow.h](double t) {
    const MatC m = h(t);
    MatC g = MatC::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) {
      g(k, k) = m(0, 0) * static_cast<double>(n - k) + m(1, 1) * static_cast<double>(k);
      if (k > 0) g(k - 1, k) = m(0, 1) * std::sqrt(static_cast<double>((n - k + 1) * k));
      if (k < n) g(k + 1, k) = m(1, 0) * std::sqrt(static_cast<double>((n - k) * (k + 1)));
    }
    return g;
  };
  return rep;
}

FiniteRepresentation trivial_representation(const KernelSpace& trivial, const LinearHamiltonianFlow& flow) {
  if (trivial.kind() != KernelKind::Trivial) throw UnsupportedError("trivial_representation needs a trivial space");
  FiniteRepresentation rep;
  rep.dim = trivial.label_dim();
  rep.time_independent = flow.time_independent;
  rep.embed = [](const Point& z) { return z.coords; };
  rep.generator = flow.h;
  return rep;
}

FiniteRepresentation basis_representation(const QuantumBasis& qb, const LinearHamiltonianFlow& flow) {
  FiniteRepresentation rep;
  rep.dim = qb.rank;
  rep.time_independent = flow.time_independent;
  rep.embed = [qb](const Point& z) {
    const VecC c = qb.coordinates(qb.kernel_column(z));
    const double k = qb.space.product(z, z).real();
    const double leak = std::abs(k - c.squaredNorm()) / k;
    if (leak > 1e-8) {
      std::ostringstream os;
      os << "basis is not faithful: coherent state leaks " << leak << " of its norm out of the span";
      throw TruncationError(os.str());
    }
    return c;
  };
  if (flow.time_independent) {
    const MatC g = generator_matrix(qb, linear_generator(qb.space, flow.h(0.0))).matrix;
    rep.generator = [g](double) { return g; };
  } else {
    rep.generator = [qb, h = flow.h](double t) {
      return generator_matrix(qb, linear_generator(qb.space, h(t))).matrix;
    };
  }
  return rep;
}

double verify_schrodinger_lift(const KernelSpace& space, const FiniteRepresentation& rep, const Trajectory& traj,
                               const LinearHamiltonianFlow& flow, int n_checks) {
  if (traj.points.empty()) throw PreconditionError("verify_schrodinger_lift: empty trajectory");
  if (n_checks < 1) throw PreconditionError("verify_schrodinger_lift: need at least one checkpoint");
  const std::size_t n = traj.points.size();
  std::vector<std::size_t> idx;
  for (int c = 1; c <= n_checks; ++c) {
    const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(c) * (n - 1) / n_checks));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  const double t0 = traj.times.front();
  const VecC psi0 = rep.embed(traj.points.front());
  std::vector<VecC> psi;
  if (rep.time_independent) {
    const MatC g = rep.generator(t0);
    for (std::size_t i : idx) psi.push_back((cd(0.0, -(traj.times[i] - t0) / flow.hbar) * g).exp() * psi0);
  } else {
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    std::vector<double> ts;
    for (std::size_t i : idx) ts.push_back(traj.times[i]);
    VecC y = psi0;
    auto rhs = [&](double t, const VecC& v, VecC& dv) { dv.noalias() = cd(0.0, -1.0 / flow.hbar) * (rep.generator(t) * v); };
    dopri5(rhs, t0, y, ts.back(), o, ts, [&](double, const VecC& v) { psi.push_back(v); });
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const Point& z = traj.points[idx[c]];
    const VecC e = rep.embed(z);
    const double k = space.product(z, z).real();
    const double fid = std::norm(psi[c].dot(e)) / (psi[c].squaredNorm() * k);
    worst = std::max(worst, 1.0 - fid);
  }
  return worst;
}

ExpectationFunction linear_energy(const KernelSpace& space, const MatC& h) {
  ExpectationFunction e;
  e.value = [space, h](const Point& z) {
    const cd num = product_partial_second(space, z, z).transpose() * (h * z.coords);
    return num.real() / space.product(z, z).real();
  };
  return e;
}

Eigen::Vector3d bloch_vector(const Point& z) {
  const cd a = z.coords(0), b = z.coords(1);
  const double r = std::norm(a) + std::norm(b);
  const cd ab = std::conj(a) * b;
  return Eigen::Vector3d(2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)) / r;
}

ExpectationFunction spin_quadratic_energy(double n, const Eigen::Vector3d& a, const Eigen::Matrix3d& q, double c) {
  if (!(n > 0.0)) throw PreconditionError("spin energy needs 2j > 0");
  const double j = 0.5 * n;
  const Eigen::Matrix3d qs = 0.5 * (q + q.transpose());
  ExpectationFunction e;
  e.value = [j, a, qs, c](const Point& z) {
    const Eigen::Vector3d m = bloch_vector(z);
    return j * a.dot(m) + j * (j - 0.5) * m.dot(qs * m) + 0.5 * j * qs.trace() + c;
  };
  return e;
}

MatC chart_kahler_metric(const KernelSpace& space, const ChartPoint& c, double h) {
  if (auto g = space.model().chart_metric(c)) return checked_metric(*g);
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  const auto d = c.w.size();
  const Point z = space.model().from_chart(c);
  const cd p0 = space.product(z, z);
  auto f = [&](const ChartPoint& a, const ChartPoint& b) {
    return std::log(space.product(space.model().from_chart(a), space.model().from_chart(b)) / p0);
  };
  auto estimate = [&](double s) {
    MatC g(d, d);
    const cd dirs[2] = {cd(s, 0.0), cd(0.0, s)};
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) {
        cd dd[2][2];
        for (int u = 0; u < 2; ++u)
          for (int v = 0; v < 2; ++v) {
            const ChartPoint ap = shifted(c, j, dirs[u]), am = shifted(c, j, -dirs[u]);
            const ChartPoint bp = shifted(c, k, dirs[v]), bm = shifted(c, k, -dirs[v]);
            dd[u][v] = (f(ap, bp) - f(ap, bm) - f(am, bp) + f(am, bm)) / (4.0 * s * s);
          }
        // d/d(conj w1) = (d/dx + i d/dy)/2, d/dw2 = (d/dx - i d/dy)/2
        g(j, k) = 0.25 * (dd[0][0] - I * dd[0][1] + I * dd[1][0] + dd[1][1]);
      }
    return g;
  };
  return checked_metric(richardson<MatC>(estimate(h), estimate(h / 2)));
}

MatC kahler_metric(const KernelSpace& space, const Point& z, double h) {
  space.validate(z);
  if (space.chart_dim() > 0) return chart_kahler_metric(space, space.model().to_chart(z), h);
  const double p = space.product(z, z).real();
  if (!(p > 0.0)) throw PreconditionError("kahler_metric needs <z|z> > 0");
  const VecC d = product_partial_second(space, z, z, h);
  const MatC m = product_partial_mixed(space, z, z, h);
  return checked_metric(m / p - (d.conjugate() * d.transpose()) / (p * p));
}

VecC energy_gradient(const KernelSpace& space, const ExpectationFunction& energy, const ChartPoint& c, double step) {
  if (!(step > 0.0)) throw PreconditionError("gradient step must be positive");
  const auto d = c.w.size();
  auto at = [&](const ChartPoint& q) { return energy.value(space.model().from_chart(q)); };
  auto estimate = [&](double s) {
    VecC g(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dx = (at(shifted(c, j, cd(s, 0.0))) - at(shifted(c, j, cd(-s, 0.0)))) / (2.0 * s);
      const double dy = (at(shifted(c, j, cd(0.0, s))) - at(shifted(c, j, cd(0.0, -s)))) / (2.0 * s);
      g(j) = 0.5 * cd(dx, dy);
    }
    return g;
  };
  return richardson<VecC>(estimate(step), estimate(step / 2));
}

namespace {

// TDVP vector field in one chart patch.
struct TdvpField {
  const KernelSpace& space;
  const ExpectationFunction& energy;
  double hbar;
  double step;

  VecC operator()(int patch, const VecC& w) const {
    const ChartPoint c{patch, w};
    const VecC grad = energy.gradient ? energy.gradient(c) : energy_gradient(space, energy, c, step);
    const MatC g = chart_kahler_metric(space, c);
    return cd(0.0, -1.0 / hbar) * g.llt().solve(grad);
  }
};

ChartPoint start_chart(const KernelSpace& space, const Point& z0) {
  if (space.chart_dim() == 0) throw UnsupportedError(to_string(space.kind()) + ": no holomorphic chart for TDVP");
  space.validate(z0);
  ChartPoint c = space.model().to_chart(z0);
  if (auto sw = space.model().switch_chart(c)) c = sw->first;
  return c;
}

}  // namespace

Trajectory dirac_frenkel_flow(const KernelSpace& space, const ExpectationFunction& energy, const Point& z0,
                              std::pair<double, double> t_span, const FlowOptions& opt) {
  check_span(t_span);
  if (!energy.value) throw PreconditionError("dirac_frenkel_flow: missing energy");
  ChartPoint c = start_chart(space, z0);
  const TdvpField field{space, energy, opt.hbar, opt.gradient_step};
  Trajectory tr;
  const Point p0 = space.model().from_chart(c);
  const double e0 = energy.value(p0), n0 = real_product(space, p0);
  int patch = c.patch;
  auto rhs = [&](double, const VecC& w, VecC& dw) { dw = field(patch, w); };
  auto emit = [&](double t, const VecC& w) {
    const Point p = space.model().from_chart({patch, w});
    const double nrm = real_product(space, p);
    tr.times.push_back(t);
    tr.energy.push_back(energy.value(p));
    tr.norm.push_back(nrm);
    tr.norm_drift = std::max(tr.norm_drift, std::abs(nrm - n0) / n0);
    tr.points.push_back(p);
  };
  auto after = [&](double, VecC& w) {
    const Point p = space.model().from_chart({patch, w});
    tr.energy_drift = std::max(tr.energy_drift, std::abs(energy.value(p) - e0));
    if (auto sw = space.model().switch_chart({patch, w})) {
      patch = sw->first.patch;
      w = sw->first.w;
      return true;
    }
    return false;
  };
  VecC w = c.w;
  const auto outs = outputs_for(opt, t_span);
  tr.stats = dopri5(rhs, t_span.first, w, t_span.second, opt.ode, outs, emit, after);
  if (tr.energy_drift > opt.energy_drift_tol * std::max(std::abs(e0), 1e-12)) {
    std::ostringstream os;
    os << "dirac_frenkel_flow: energy drifted by " << tr.energy_drift << " from " << e0
       << "; tighten rtol or reduce max_step";
    throw IntegratorFailureError(os.str());
  }
  return tr;
}

namespace {

MatC propagator(const MatC& h, double t, double hbar) {
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff()))
    throw PreconditionError("ehrenfest_residual: H must be Hermitian");
  Eigen::SelfAdjointEigenSolver<MatC> es(h);
  VecC ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ph(i) = std::polar(1.0, -es.eigenvalues()(i) * t / hbar);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

void check_ehrenfest_shapes(Eigen::Index n, const MatC& x, const MatC& h, double dt, double hbar) {
  if (x.rows() != n || x.cols() != n || h.rows() != n || h.cols() != n)
    throw PreconditionError("ehrenfest_residual: matrices must share the state dimension");
  if (!(dt > 0.0) || !(hbar > 0.0)) throw PreconditionError("ehrenfest_residual: dt and hbar must be positive");
}

}  // namespace

double ehrenfest_residual(const VecC& psi0, const MatC& x, const MatC& h, double t, double dt, double hbar) {
  check_ehrenfest_shapes(psi0.size(), x, h, dt, hbar);
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) throw NormalizationError("ehrenfest_residual: state must have unit norm");
  auto expect = [&](double s) {
    const VecC p = propagator(h, s, hbar) * psi0;
    return cd(p.dot(x * p));
  };
  const cd lhs = (expect(t + dt) - expect(t - dt)) / (2.0 * dt);
  const VecC p = propagator(h, t, hbar) * psi0;
  const MatC comm = cd(0.0, 1.0 / hbar) * (h * x - x * h);
  return std::abs(lhs - p.dot(comm * p));
}

double ehrenfest_residual(const MatC& rho0, const MatC& x, const MatC& h, double t, double dt, double hbar) {
  check_ehrenfest_shapes(rho0.rows(), x, h, dt, hbar);
  if (rho0.rows() != rho0.cols()) throw PreconditionError("ehrenfest_residual: density matrix must be square");
  if (std::abs(rho0.trace() - 1.0) > 1e-12) throw NormalizationError("ehrenfest_residual: density matrix needs unit trace");
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw StatePositivityError("ehrenfest_residual: density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatC> es(rho0);
  if (es.eigenvalues().minCoeff() < -1e-12) throw StatePositivityError("ehrenfest_residual: density matrix is not PSD");
  auto rho = [&](double s) {
    const MatC u = propagator(h, s, hbar);
    return MatC(u * rho0 * u.adjoint());
  };
  const cd lhs = ((x * rho(t + dt)).trace() - (x * rho(t - dt)).trace()) / (2.0 * dt);
  const MatC comm = cd(0.0, 1.0 / hbar) * (h * x - x * h);
  return std::abs(lhs - (comm * rho(t)).trace());
}

LyapunovResult lyapunov_protocol(const KernelSpace& space, const std::vector<FlowSegment>& period, const Point& z0,
                                 int periods, const FlowOptions& opt) {
  if (period.empty() || periods < 1) throw PreconditionError("lyapunov: need a non-empty protocol and periods >= 1");
  double period_len = 0.0;
  for (const auto& s : period) {
    if (!(s.duration > 0.0) || !s.energy.value) throw PreconditionError("lyapunov: invalid flow segment");
    period_len += s.duration;
  }
  ChartPoint c = start_chart(space, z0);
  const auto d = c.w.size();
  int patch = c.patch;
  constexpr double eps = 1e-6;

  VecC y(2 * d);
  y.head(d) = c.w;
  for (Eigen::Index k = 0; k < d; ++k) y(d + k) = cd(1.0, 0.37 * static_cast<double>(k + 1));
  auto gnorm = [&](const VecC& state) {
    const MatC g = chart_kahler_metric(space, {patch, state.head(d)});
    return std::sqrt(std::max(0.0, state.tail(d).dot(g * state.tail(d)).real()));
  };
  y.tail(d) /= gnorm(y);

  LyapunovResult res;
  double total = 0.0;
  std::vector<double> logs;
  OdeOptions o = opt.ode;
  for (int it = 0; it < periods; ++it) {
    for (const auto& seg : period) {
      const TdvpField field{space, seg.energy, opt.hbar, opt.gradient_step};
      auto rhs = [&](double, const VecC& s, VecC& ds) {
        const VecC w = s.head(d), v = s.tail(d);
        ds.resize(2 * d);
        ds.head(d) = field(patch, w);
        const double nv = v.norm();
        if (nv == 0.0) {
          ds.tail(d).setZero();
          return;
        }
        const VecC u = v / nv;
        ds.tail(d) = (field(patch, w + eps * u) - field(patch, w - eps * u)) * (nv / (2.0 * eps));
      };
      auto after = [&](double, VecC& s) {
        if (auto sw = space.model().switch_chart({patch, s.head(d)})) {
          patch = sw->first.patch;
          s.head(d) = sw->first.w;
          s.tail(d) = (sw->second * s.tail(d)).eval();
          return true;
        }
        return false;
      };
      dopri5(rhs, 0.0, y, seg.duration, o, {}, {}, after);
    }
    const double stretch = gnorm(y);
    const double l = std::log(stretch);
    logs.push_back(l);
    total += l;
    y.tail(d) /= stretch;
    res.series.emplace_back((it + 1) * period_len, total / ((it + 1) * period_len));
  }
  res.lambda = total / (periods * period_len);
  res.lambda_per_period = total / periods;
  const int q = std::max(1, periods / 4);
  double tail = 0.0;
  for (int i = periods - q; i < periods; ++i) tail += logs[static_cast<std::size_t>(i)];
  res.lambda_tail = tail / (q * period_len);
  return res;
}

LyapunovResult lyapunov_max(const KernelSpace& space, const ExpectationFunction& energy, const Point& z0,
                            double t_total, double renorm_dt, const FlowOptions& opt) {
  if (!(t_total > 0.0) || !(renorm_dt > 0.0)) throw PreconditionError("lyapunov: times must be positive");
  const int periods = std::max(1, static_cast<int>(std::llround(t_total / renorm_dt)));
  return lyapunov_protocol(space, {{energy, t_total / periods}}, z0, periods, opt);
}

std::vector<FlowSegment> kicked_top_protocol(double n, double k, double p, bool haake) {
  if (!(n > 1.0)) throw PreconditionError("kicked top needs 2j > 1");
  const Eigen::Vector3d free(0.0, p, 0.0);
  Eigen::Matrix3d twist = Eigen::Matrix3d::Zero();
  twist(2, 2) = haake ? k / n : k / (n - 1.0);
  return {{spin_quadratic_energy(n, free, Eigen::Matrix3d::Zero()), 1.0},
          {spin_quadratic_energy(n, Eigen::Vector3d::Zero(), twist), 1.0}};
}

}  // namespace cohspace
