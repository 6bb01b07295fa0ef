#include "cohspace/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cohspace/errors.hpp"

namespace cohspace {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInvPhi = 0.6180339887498949;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void check_interval(std::pair<double, double> iv, double tol) {
  if (!std::isfinite(iv.first) || !std::isfinite(iv.second) || !(iv.first < iv.second))
    throw PreconditionError("search interval must be finite with lo < hi");
  if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
}

template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 2.0 * kEps * std::max({1.0, std::abs(a), std::abs(b)}); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Illinois false position on a sign-change bracket, bisecting whenever the
// bracket fails to halve.
template <class F>
std::pair<double, double> polish_root(F&& f, double a, double b, double fa, double fb) {
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    if (fa == 0.0) return {a, 0.0};
    if (fb == 0.0) return {b, 0.0};
    const double width = b - a;
    if (width <= 2.0 * kEps * std::max(std::abs(a), std::abs(b)) || width == 0.0) break;
    double x = (a * fb - b * fa) / (fb - fa);
    if (!(x > a && x < b) || it % 4 == 3) x = 0.5 * (a + b);
    const double fx = f(x);
    if (std::signbit(fx) == std::signbit(fa)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  const double la = std::abs(f(a)), lb = std::abs(f(b));
  return la <= lb ? std::pair{a, la} : std::pair{b, lb};
}

struct Partial {
  std::vector<SpectralRoot> roots;
  std::vector<std::string> warnings;
};

Partial scan_family(const ImplicitSpectralModel& model, int n, const std::vector<double>& grid, double tol) {
  Partial out;
  auto lam = [&](double e) { return model.lambda(n, e); };
  std::vector<double> v(grid.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    v[i] = lam(grid[i]);
    if (!std::isfinite(v[i]))
      throw PreconditionError("lambda_" + std::to_string(n) + " is not finite at E = " + fmt(grid[i]));
    scale = std::max(scale, std::abs(v[i]));
  }
  const double span = grid.back() - grid.front();
  auto push = [&](double e, double res) {
    SpectralRoot r{n, e, res, false};
    const double h = 1e-6 * std::max(1.0, std::abs(e));
    const double d = (lam(e + h) - lam(e - h)) / (2.0 * h);
    r.multiplicity_uncertain = std::abs(d) * span <= 1e-6 * std::max(scale, tol);
    out.roots.push_back(r);
  };
  auto bracket = [&](double a, double b, double fa, double fb) {
    auto [e, res] = polish_root(lam, a, b, fa, fb);
    if (res <= tol)
      push(e, res);
    else
      out.warnings.push_back("lambda_" + std::to_string(n) + " changes sign near E = " + fmt(e) +
                             " without reaching |lambda| <= tol (discontinuity?)");
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (v[i] == 0.0) {
      push(grid[i], 0.0);
      continue;
    }
    if (i + 1 < grid.size() && v[i + 1] != 0.0 && std::signbit(v[i]) != std::signbit(v[i + 1]))
      bracket(grid[i], grid[i + 1], v[i], v[i + 1]);
    if (i == 0 || i + 1 == grid.size()) continue;
    const bool same = std::signbit(v[i - 1]) == std::signbit(v[i]) && std::signbit(v[i + 1]) == std::signbit(v[i]) &&
                      v[i - 1] != 0.0 && v[i + 1] != 0.0;
    if (!same || !(std::abs(v[i]) < std::abs(v[i - 1]) && std::abs(v[i]) <= std::abs(v[i + 1]))) continue;
    // local dip of |lambda| with no sign change: look for a touching root
    double flip = std::numeric_limits<double>::quiet_NaN(), fflip = 0.0;
    auto [e, res] = golden_min(
        [&](double x) {
          const double f = lam(x);
          if (f != 0.0 && std::signbit(f) != std::signbit(v[i])) {
            flip = x;
            fflip = f;
          }
          return std::abs(f);
        },
        grid[i - 1], grid[i + 1]);
    if (!std::isnan(flip)) {
      bracket(grid[i - 1], flip, v[i - 1], fflip);
      bracket(flip, grid[i + 1], fflip, v[i + 1]);
    } else if (res <= tol) {
      push(e, res);
      out.roots.back().multiplicity_uncertain = true;
    } else {
      const double curv = v[i + 1] - 2.0 * v[i] + v[i - 1];
      const double vertex = curv != 0.0 ? v[i] - (v[i + 1] - v[i - 1]) * (v[i + 1] - v[i - 1]) / (8.0 * curv) : v[i];
      if (std::signbit(vertex) != std::signbit(v[i]) || res <= 1e3 * tol)
        out.warnings.push_back("possible missed tangency of lambda_" + std::to_string(n) + " near E = " + fmt(e) +
                               "; refine the scan grid");
    }
  }
  return out;
}

std::pair<double, double> lambda_range(const ImplicitSpectralModel& model, double e) {
  const double m = model.m(e), k = model.k(e);
  auto val = [&](double xi) { return m == 0.0 ? -k : m * xi - k; };
  const double a = val(model.xi_min(e)), b = val(model.xi_max(e));
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

double free_dispersion(double p, double mass, double c) {
  if (!(p >= 0.0) || !(mass >= 0.0) || !(c > 0.0)) throw PreconditionError("free_dispersion needs p, mass >= 0 and c > 0");
  return c * std::hypot(p, mass * c);
}

SpectrumResult solve_implicit_spectrum(const ImplicitSpectralModel& model, std::pair<double, double> interval,
                                       double tol, const SpectrumOptions& opt) {
  check_interval(interval, tol);
  if (opt.grid < 3) throw PreconditionError("scan grid needs at least 3 points");
  if (!model.m || !model.k) throw PreconditionError("spectral model needs m(E) and k(E)");
  if (!model.discrete() && !model.continuous()) throw PreconditionError("spectral model has no xi family");
  if (model.discrete() && model.n_max < model.n_min) throw PreconditionError("empty discrete family");

  SpectrumResult res;
  res.search_interval = interval;
  std::vector<double> grid(static_cast<std::size_t>(opt.grid));
  for (int i = 0; i < opt.grid; ++i)
    grid[static_cast<std::size_t>(i)] = interval.first + (interval.second - interval.first) * i / (opt.grid - 1);
  grid.back() = interval.second;

  for (double e : grid) {
    const double m = model.m(e), k = model.k(e);
    if (std::abs(m) <= 1e-14 && std::abs(k) <= 1e-14)
      throw ModelDegeneracyError("m(E) and k(E) both vanish at E = " + fmt(e));
  }

  if (model.discrete()) {
    const int count = model.n_max - model.n_min + 1;
    const int threads = std::clamp(opt.threads, 1, count);
    std::vector<std::future<Partial>> jobs;
    for (int t = 0; t < threads; ++t) {
      jobs.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, [&, t] {
        Partial p;
        for (int n = model.n_min + t; n <= model.n_max; n += threads) {
          auto q = scan_family(model, n, grid, tol);
          p.roots.insert(p.roots.end(), q.roots.begin(), q.roots.end());
          p.warnings.insert(p.warnings.end(), q.warnings.begin(), q.warnings.end());
        }
        return p;
      }));
    }
    for (auto& j : jobs) {
      auto p = j.get();
      res.discrete.insert(res.discrete.end(), p.roots.begin(), p.roots.end());
      res.warnings.insert(res.warnings.end(), p.warnings.begin(), p.warnings.end());
    }
    std::sort(res.discrete.begin(), res.discrete.end(), [](const SpectralRoot& a, const SpectralRoot& b) {
      return a.energy != b.energy ? a.energy < b.energy : a.n < b.n;
    });
    std::vector<SpectralRoot> unique;
    for (const auto& r : res.discrete) {
      const bool dup = std::any_of(unique.begin(), unique.end(), [&](const SpectralRoot& u) {
        return u.n == r.n && std::abs(u.energy - r.energy) <= 1e-10 * std::max(1.0, std::abs(r.energy));
      });
      if (!dup) unique.push_back(r);
    }
    res.discrete = std::move(unique);
    std::sort(res.warnings.begin(), res.warnings.end());
  }

  if (model.continuous()) {
    auto inside = [&](double e) {
      const auto [lo, hi] = lambda_range(model, e);
      return lo <= 0.0 && 0.0 <= hi;
    };
    auto edge = [&](double a, double b) {
      // inside(a) != inside(b); shrink to the switch point
      const bool ia = inside(a);
      for (int it = 0; it < 200 && b - a > 2.0 * kEps * std::max({1.0, std::abs(a), std::abs(b)}); ++it) {
        const double mid = 0.5 * (a + b);
        (inside(mid) == ia ? a : b) = mid;
      }
      return ia ? a : b;
    };
    double start = 0.0;
    bool prev = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const bool in = inside(grid[i]);
      if (in && !prev) start = i == 0 ? grid[0] : edge(grid[i - 1], grid[i]);
      if (!in && prev) res.continuous.emplace_back(start, edge(grid[i - 1], grid[i]));
      prev = in;
    }
    if (prev) res.continuous.emplace_back(start, grid.back());
  }
  return res;
}

ImplicitSpectralModel oscillator_model(double hbar_omega, int n_max) {
  if (!(hbar_omega > 0.0)) throw PreconditionError("oscillator needs hbar omega > 0");
  ImplicitSpectralModel m;
  m.name = "oscillator";
  m.m = [](double) { return 1.0; };
  m.k = [](double e) { return e; };
  m.xi = [hbar_omega](int n, double) { return hbar_omega * (n + 0.5); };
  m.n_min = 0;
  m.n_max = n_max;
  return m;
}

ImplicitSpectralModel coulomb_model(double mass, double alpha, double hbar, int l, int n_max) {
  if (!(mass > 0.0) || !(alpha > 0.0) || !(hbar > 0.0) || l < 0)
    throw PreconditionError("coulomb model needs mass, alpha, hbar > 0 and l >= 0");
  ImplicitSpectralModel m;
  m.name = "coulomb";
  m.m = [mass, hbar](double e) { return hbar * std::sqrt(std::max(0.0, -2.0 * e / mass)); };
  m.k = [alpha](double) { return alpha; };
  m.xi = [](int n, double) { return static_cast<double>(n); };
  m.n_min = l + 1;
  m.n_max = std::max(n_max, l + 1);
  return m;
}

ImplicitSpectralModel free_model(double mass, double c) {
  if (!(mass >= 0.0) || !(c > 0.0)) throw PreconditionError("free model needs mass >= 0 and c > 0");
  ImplicitSpectralModel m;
  m.name = "free";
  const double mc2 = mass * c * mass * c;
  m.m = [](double) { return 1.0; };
  m.k = [c](double e) { return e * e / (c * c); };
  m.xi_min = [mc2](double) { return mc2; };
  m.xi_max = [](double) { return std::numeric_limits<double>::infinity(); };
  return m;
}

ImplicitSpectralModel table_model(std::vector<double> mc, std::vector<double> kc, double a, double b, int n_min,
                                  int n_max) {
  if (mc.empty() || kc.empty()) throw PreconditionError("table model needs m and k coefficients");
  auto poly = [](std::vector<double> c) {
    return [c = std::move(c)](double e) {
      double s = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * e + *it;
      return s;
    };
  };
  ImplicitSpectralModel m;
  m.name = "table";
  m.m = poly(std::move(mc));
  m.k = poly(std::move(kc));
  m.xi = [a, b](int n, double) { return a * n + b; };
  m.n_min = n_min;
  m.n_max = n_max;
  return m;
}

ImplicitSpectralModel model_from_json(const nlohmann::json& j) {
  const auto kind = j.at("model").get<std::string>();
  const int n_max = j.value("n_max", 200);
  if (kind == "oscillator") return oscillator_model(j.value("hbar_omega", 1.0), n_max);
  if (kind == "coulomb")
    return coulomb_model(j.value("mass", 1.0), j.value("alpha", 1.0), j.value("hbar", 1.0), j.value("l", 0), n_max);
  if (kind == "free") return free_model(j.value("mass", 1.0), j.value("c", 1.0));
  if (kind == "table") {
    const auto& xi = j.at("xi");
    return table_model(j.at("m").get<std::vector<double>>(), j.at("k").get<std::vector<double>>(),
                       xi.value("a", 1.0), xi.value("b", 0.0), j.value("n_min", 0), n_max);
  }
  throw std::invalid_argument("unknown spectral model '" + kind + "' (oscillator, coulomb, free, table)");
}

SpectrumResult assemble_from_algebra(const AlgebraRep& rep, const CoefficientsOfE& coeffs,
                                     std::pair<double, double> interval, double tol, const AssembleOptions& opt) {
  check_interval(interval, tol);
  if (opt.grid < 3) throw PreconditionError("scan grid needs at least 3 points");
  if (rep.empty()) throw PreconditionError("empty representation");
  const auto dim = rep[0].rows();
  if (opt.trusted_dim && (*opt.trusted_dim < 1 || *opt.trusted_dim > dim))
    throw PreconditionError("trusted_dim outside the representation");

  auto system = [&](double e) {
    const VecC c = coeffs(e);
    if (static_cast<std::size_t>(c.size()) != rep.size())
      throw PreconditionError("coefficient vector does not match the representation");
    return represent(rep, c);
  };
  auto hermitian_at = [&](double e) {
    const MatC m = system(e);
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff());
  };
  const bool hermitian = rep[0].rows() == rep[0].cols() && hermitian_at(interval.first) &&
                         hermitian_at(0.5 * (interval.first + interval.second)) && hermitian_at(interval.second);

  bool tridiagonal = hermitian;
  for (const auto& r : rep)
    for (Eigen::Index i = 0; i < r.rows() && tridiagonal; ++i)
      for (Eigen::Index j = 0; j < r.cols(); ++j)
        if (std::abs(i - j) > 1 && r(i, j) != cd(0.0)) {
          tridiagonal = false;
          break;
        }

  // smallest and largest singular values
  auto sv = [&](double e) -> std::pair<double, double> {
    const MatC m = system(e);
    if (tridiagonal) {
      // a diagonal phase change makes the off-diagonal real and positive
      VecR d = m.diagonal().real(), sub(std::max<Eigen::Index>(dim - 1, 0));
      for (Eigen::Index i = 0; i + 1 < dim; ++i) sub(i) = std::abs(m(i + 1, i));
      Eigen::SelfAdjointEigenSolver<MatR> es;
      es.computeFromTridiagonal(d, sub, Eigen::EigenvaluesOnly);
      const auto a = es.eigenvalues().cwiseAbs();
      return {a.minCoeff(), a.maxCoeff()};
    }
    if (hermitian) {
      Eigen::SelfAdjointEigenSolver<MatC> es(m, Eigen::EigenvaluesOnly);
      const auto a = es.eigenvalues().cwiseAbs();
      return {a.minCoeff(), a.maxCoeff()};
    }
    Eigen::JacobiSVD<MatC> svd(m);
    const auto& s = svd.singularValues();
    return {s(s.size() - 1), s(0)};
  };
  auto null_vector = [&](double e) -> VecC {
    const MatC m = system(e);
    if (hermitian) {
      Eigen::SelfAdjointEigenSolver<MatC> es(m);
      Eigen::Index i = 0;
      es.eigenvalues().cwiseAbs().minCoeff(&i);
      return es.eigenvectors().col(i);
    }
    Eigen::JacobiSVD<MatC> svd(m, Eigen::ComputeFullV);
    return svd.matrixV().col(svd.matrixV().cols() - 1);
  };

  SpectrumResult res;
  res.search_interval = interval;
  const int g = opt.grid;
  std::vector<double> grid(static_cast<std::size_t>(g)), s(grid.size());
  for (int i = 0; i < g; ++i) {
    grid[static_cast<std::size_t>(i)] = interval.first + (interval.second - interval.first) * i / (g - 1);
    s[static_cast<std::size_t>(i)] = sv(grid[static_cast<std::size_t>(i)]).first;
  }
  grid.back() = interval.second;

  std::vector<double> found;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left = i == 0 || s[i] <= s[i - 1];
    const bool right = i + 1 == grid.size() || s[i] < s[i + 1];
    if (!left || !right) continue;
    const double a = grid[i == 0 ? 0 : i - 1], b = grid[std::min(i + 1, grid.size() - 1)];
    auto [e, smin] = golden_min([&](double x) { return sv(x).first; }, a, b);
    const double norm = sv(e).second;
    if (smin > tol * std::max(norm, 1e-300)) continue;
    if (std::any_of(found.begin(), found.end(),
                    [&](double f) { return std::abs(f - e) <= 1e-10 * std::max(1.0, std::abs(e)); }))
      continue;
    if (opt.trusted_dim) {
      const VecC v = null_vector(e);
      const double tail = v.tail(dim - *opt.trusted_dim).norm();
      if (tail > opt.tail_bound) {
        const std::string msg = "root E = " + fmt(e) + " has truncation tail " + fmt(tail) + " > " + fmt(opt.tail_bound);
        if (opt.strict) throw TruncationError(msg);
        res.warnings.push_back(msg + "; dropped");
        continue;
      }
    }
    found.push_back(e);
    res.discrete.push_back({0, e, smin, false});
  }
  std::sort(res.discrete.begin(), res.discrete.end(),
            [](const SpectralRoot& a, const SpectralRoot& b) { return a.energy < b.energy; });
  for (std::size_t i = 0; i < res.discrete.size(); ++i) res.discrete[i].n = static_cast<int>(i);
  return res;
}

AlgebraRep su11_discrete_series(double k, int dim) {
  if (!(k > 0.0) || dim < 1) throw PreconditionError("discrete series needs k > 0 and dim >= 1");
  MatC k3 = MatC::Zero(dim, dim), kp = MatC::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) {
    k3(m, m) = k + m;
    if (m + 1 < dim) kp(m + 1, m) = std::sqrt((m + 1.0) * (m + 2.0 * k));
  }
  const MatC km = kp.adjoint();
  return {MatC::Identity(dim, dim), 0.5 * (kp + km), cd(0.0, -0.5) * (kp - km), k3};
}

CoefficientsOfE coulomb_su11_coefficients(double mass, double alpha) {
  if (!(mass > 0.0)) throw PreconditionError("mass must be positive");
  return [mass, alpha](double e) {
    VecC c(4);
    c << -alpha, 0.5 / mass + e, 0.0, 0.5 / mass - e;
    return c;
  };
}

nlohmann::json spectrum_to_json(const SpectrumResult& r) {
  nlohmann::json d = nlohmann::json::array();
  for (const auto& x : r.discrete)
    d.push_back({{"n", x.n}, {"E", x.energy}, {"residual", x.residual}, {"multiplicity_uncertain", x.multiplicity_uncertain}});
  nlohmann::json c = nlohmann::json::array();
  for (const auto& [a, b] : r.continuous) c.push_back({a, b});
  return {{"discrete", d},
          {"continuous", c},
          {"search_interval", {r.search_interval.first, r.search_interval.second}},
          {"warnings", r.warnings}};
}

}  // namespace cohspace
