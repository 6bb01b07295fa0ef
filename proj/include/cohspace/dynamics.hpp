#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cohspace/kernel.hpp"
#include "cohspace/ode.hpp"
#include "cohspace/quantum_space.hpp"

namespace cohspace {

// H(t) acting linearly on label vectors: i hbar dz/dt = H(t) z.
struct LinearHamiltonianFlow {
  std::function<MatC(double)> h;
  double hbar = 1.0;
  bool time_independent = true;

  static LinearHamiltonianFlow constant(MatC h, double hbar = 1.0);
  VecC generator(double t, const VecC& z) const { return h(t) * z; }
};

struct Trajectory {
  std::vector<double> times;
  PointList points;
  std::vector<double> energy;  // empty when no energy is attached
  std::vector<double> norm;    // <z|z> along the path
  OdeStats stats;
  double energy_drift = 0.0;   // max |h - h0| over accepted steps
  double norm_drift = 0.0;     // max relative change of <z|z>
};

// Real energy h(z) = <z|H|z>/<z|z> as a function of labels. `gradient`, when
// set, returns dh/d(conj w) in chart coordinates.
struct ExpectationFunction {
  std::function<double(const Point&)> value;
  std::function<VecC(const ChartPoint&)> gradient;
};

struct FlowOptions {
  OdeOptions ode;
  std::vector<double> sample_times;  // empty: every accepted step
  double hbar = 1.0;
  double energy_drift_tol = 1e-6;    // relative, tdvp only
  double gradient_step = 1e-3;
};

// i hbar z' = H z on labels with adaptive RK 5(4).
Trajectory coherent_flow(const KernelSpace& space, const LinearHamiltonianFlow& flow, const Point& z0,
                         std::pair<double, double> t_span, const FlowOptions& opt = {});

// Finite Hilbert space carrying both the coherent states and dGamma(H(t)).
struct FiniteRepresentation {
  int dim = 0;
  std::function<VecC(const Point&)> embed;
  std::function<MatC(double)> generator;
  bool time_independent = true;
};

// Fock space of the one-mode Klauder space, levels 0..cutoff-1. H must fix
// z0 (zero first row and column). embed throws TruncationError if the tail
// beyond the cutoff carries more than 1e-12 of the norm.
FiniteRepresentation fock_representation(const KernelSpace& klauder, const LinearHamiltonianFlow& flow, int cutoff);
// Symmetric power of C^2 for spin(n) with integer n, basis |j, j-k>.
FiniteRepresentation spin_representation(const KernelSpace& spin, const LinearHamiltonianFlow& flow);
FiniteRepresentation trivial_representation(const KernelSpace& trivial, const LinearHamiltonianFlow& flow);
// Orthonormal coordinates of a rank-complete basis; dGamma from generator_matrix.
FiniteRepresentation basis_representation(const QuantumBasis& qb, const LinearHamiltonianFlow& flow);

// Max over n_checks checkpoints of 1 - |<psi_t, e(z(t))>|^2 / (|psi_t|^2 <z|z>).
double verify_schrodinger_lift(const KernelSpace& space, const FiniteRepresentation& rep, const Trajectory& traj,
                               const LinearHamiltonianFlow& flow, int n_checks);

// <z|dGamma(H)|z>/<z|z>, the energy of a linear H.
ExpectationFunction linear_energy(const KernelSpace& space, const MatC& h);

// Spin(n) energy a . <J> + sum_ab q_ab <J_a J_b>_sym + c with Bloch vector
// expectations <J> = j m, <J_a J_b>_sym = j(j - 1/2) m_a m_b + (j/2) delta_ab.
ExpectationFunction spin_quadratic_energy(double n, const Eigen::Vector3d& a, const Eigen::Matrix3d& q,
                                          double c = 0.0);
Eigen::Vector3d bloch_vector(const Point& z);

// Kaehler metric d^2 log<z|z'> / d(conj w) dw' on the diagonal, in chart
// coordinates when the space has a chart and in label coordinates otherwise.
// Throws DegenerateMetricError if min eigenvalue < 1e-12 trace.
MatC kahler_metric(const KernelSpace& space, const Point& z, double h = 1e-4);
MatC chart_kahler_metric(const KernelSpace& space, const ChartPoint& c, double h = 1e-4);

// dh/d(conj w) by central differences with Richardson over (step, step/2).
VecC energy_gradient(const KernelSpace& space, const ExpectationFunction& energy, const ChartPoint& c, double step);

// i hbar g(w) w' = dh/d(conj w) in the space's chart.
Trajectory dirac_frenkel_flow(const KernelSpace& space, const ExpectationFunction& energy, const Point& z0,
                              std::pair<double, double> t_span, const FlowOptions& opt = {});

// d<X>/dt by central difference at t minus <(i/hbar)[H, X]>, state propagated
// from time 0 under H.
double ehrenfest_residual(const VecC& psi0, const MatC& x, const MatC& h, double t, double dt, double hbar = 1.0);
double ehrenfest_residual(const MatC& rho0, const MatC& x, const MatC& h, double t, double dt, double hbar = 1.0);

// A piece of a periodic protocol: TDVP flow of `energy` for `duration`.
struct FlowSegment {
  ExpectationFunction energy;
  double duration = 1.0;
};

struct LyapunovResult {
  double lambda = 0.0;         // per unit time
  double lambda_tail = 0.0;    // estimate from the last quarter of the run
  double lambda_per_period = 0.0;
  std::vector<std::pair<double, double>> series;  // (time, running estimate)
};

// Benettin estimate of the largest exponent of the TDVP flow; the tangent is
// advanced with directional differences of the vector field (step 1e-6) and
// measured in the Kaehler metric.
LyapunovResult lyapunov_max(const KernelSpace& space, const ExpectationFunction& energy, const Point& z0,
                            double t_total, double renorm_dt, const FlowOptions& opt = {});
// Same for a periodic protocol, renormalized once per period.
LyapunovResult lyapunov_protocol(const KernelSpace& space, const std::vector<FlowSegment>& period, const Point& z0,
                                 int periods, const FlowOptions& opt = {});

// Kicked top on spin(n): free precession p<J_y> for unit time, then a kick
// with torsion k for unit time. The default kick k/(2j-1) <J_z^2> reproduces
// the classical twist angle k m_z exactly; `haake` uses k/(2j) instead.
std::vector<FlowSegment> kicked_top_protocol(double n, double k, double p, bool haake = false);

}  // namespace cohspace
