#include "cohspace/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cohspace/errors.hpp"

namespace cohspace {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double wnorm(const VecC& v, const VecC& ya, const VecC& yb, const OdeOptions& o) {
  if (v.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(ya(i)), std::abs(yb(i)));
    s += std::norm(v(i)) / (sc * sc);
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

double initial_step(const OdeRhs& f, double t0, const VecC& y0, const VecC& k1, double span, const OdeOptions& o) {
  const double dn0 = wnorm(y0, y0, y0, o), dn1 = wnorm(k1, y0, y0, o);
  double h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
  h = std::min({h, o.max_step, span});
  const VecC y1 = y0 + h * k1;
  VecC k2(y0.size());
  f(t0 + h, y1, k2);
  const double dn2 = wnorm(k2 - k1, y0, y0, o) / h;
  const double der = std::max(dn1, dn2);
  const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
  return std::min({100.0 * h, h1, o.max_step, span});
}

}  // namespace

OdeStats dopri5(const OdeRhs& f, double t0, VecC& y, double t1, const OdeOptions& o, std::span<const double> outputs,
                const OdeEmit& emit, const OdeAfterStep& after_step) {
  if (!(t1 >= t0)) throw PreconditionError("dopri5: need t1 >= t0");
  if (!(o.rtol > 0.0) || !(o.atol >= 0.0)) throw PreconditionError("dopri5: tolerances must be positive");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] < t0 || outputs[i] > t1) throw PreconditionError("dopri5: output time outside the span");
    if (i > 0 && outputs[i] < outputs[i - 1]) throw PreconditionError("dopri5: output times must be ascending");
  }
  OdeStats st;
  const bool every = outputs.empty();
  std::size_t next = 0;
  if (every) {
    if (emit) emit(t0, y);
  } else {
    while (next < outputs.size() && outputs[next] == t0) emit(outputs[next++], y);
  }
  if (t1 == t0) return st;

  const auto n = y.size();
  VecC k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n), err(n);
  f(t0, y, k1);
  double t = t0;
  double h = o.initial_step > 0.0 ? std::min(o.initial_step, t1 - t0) : initial_step(f, t0, y, k1, t1 - t0, o);
  constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9, facc1 = 5.0, facc2 = 0.1;
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < t1) {
    if (st.steps + st.rejected >= o.max_steps) throw IntegratorFailureError("dopri5: step budget exhausted");
    const bool final_step = t + h >= t1;
    if (final_step) h = t1 - t;
    if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow at t=" << t << " (h=" << h
         << "); the flow is stiff or singular here: loosen rtol, shorten the span or check the generator";
      throw StiffnessError(os.str());
    }
    yt = y + h * a21 * k1;
    f(t + c2 * h, yt, k2);
    yt = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, yt, k3);
    yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, yt, k4);
    yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, yt, k5);
    yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double tph = final_step ? t1 : t + h;
    f(tph, yt, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(tph, y1, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = wnorm(err, y, y1, o);
    if (!std::isfinite(e)) {
      ++st.rejected;
      h *= 0.1;
      last_rejected = true;
      continue;
    }
    const double fac11 = std::pow(e, expo1);
    if (e <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double hnew = h / fac;
      facold = std::max(e, 1e-4);
      ++st.steps;
      st.last_error = e;
      if (every) {
        if (emit) emit(tph, y1);
      } else {
        const VecC ydiff = y1 - y;
        const VecC bspl = h * k1 - ydiff;
        const VecC r4 = ydiff - h * k7 - bspl;
        const VecC r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next < outputs.size() && (outputs[next] <= tph || final_step)) {
          const double to = outputs[next++];
          if (to == tph) {
            emit(to, y1);
            continue;
          }
          const double s = (to - t) / h, s1 = 1.0 - s;
          emit(to, y + s * (ydiff + s1 * (bspl + s * (r4 + s1 * r5))));
        }
      }
      y = y1;
      k1 = k7;
      t = tph;
      if (after_step && after_step(t, y)) f(t, y, k1);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = std::min(hnew, o.max_step);
    } else {
      h /= std::min(facc1, fac11 / safe);
      ++st.rejected;
      last_rejected = true;
    }
  }
  return st;
}

}  // namespace cohspace
