#pragma once

#include <functional>
#include <limits>
#include <span>

#include "cohspace/types.hpp"

namespace cohspace {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 picks one from the derivative scale
  long max_steps = 50'000'000;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  double last_error = 0.0;  // normalized error estimate of the last accepted step
};

using OdeRhs = std::function<void(double t, const VecC& y, VecC& dy)>;
using OdeEmit = std::function<void(double t, const VecC& y)>;
// Called after every accepted step. May replace y by an equivalent state
// (a chart change, say) and must then return true.
using OdeAfterStep = std::function<bool(double t, VecC& y)>;

// Dormand-Prince 5(4) with dense output. `emit` receives the solution at each
// time of `outputs` (ascending, inside [t0, t1]); with no outputs it receives
// every accepted step instead. Returns the final state through `y`.
// Throws StiffnessError when the step size underflows.
OdeStats dopri5(const OdeRhs& f, double t0, VecC& y, double t1, const OdeOptions& opt,
                std::span<const double> outputs, const OdeEmit& emit, const OdeAfterStep& after_step = {});

}  // namespace cohspace
