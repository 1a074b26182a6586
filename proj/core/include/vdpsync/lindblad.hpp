#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vdpsync/fock.hpp"

namespace vdpsync::lindblad {

using fock::Complex;
using fock::DensityMatrix;
using fock::Matrix;
using fock::MomentSet;
using fock::QuantumParams;

/// One sampled control segment; linear interpolation between samples.
struct ControlSegment {
  std::vector<double> times;
  std::vector<double> eps1;
  std::vector<double> eps2;
};

/// Piecewise control: sampled transient segments covering [0, tau] (jumps are
/// allowed at segment boundaries and preserved), then constant tail values.
struct ControlSchedule {
  std::vector<ControlSegment> segments;
  double tau = 0.0;
  double tail_eps1 = 1.0;
  double tail_eps2 = 0.0;

  static ControlSchedule constant(double eps1, double eps2);

  /// Control values at t; the tail applies for t > tau.  At an interior
  /// segment boundary the later segment wins (right-continuous).
  std::pair<double, double> eval(double t) const;

  /// Segment holding t (-1 for the tail); used to evaluate one-sided limits
  /// when integration steps touch a breakpoint.
  int segment_index(double t) const;

  /// Evaluation clamped into one segment (tail when seg_idx < 0).
  std::pair<double, double> eval_in(int seg_idx, double t) const;

  /// Times where the controls may jump (segment boundaries and tau).
  std::vector<double> breakpoints() const;

  void validate() const;
};

/// 2*O*rho*O^dag - O^dag*O*rho - rho*O^dag*O, dense and generic.
Matrix dissipator(const Matrix& op, const Matrix& rho);

/// Precomputed sparse ladder algebra for the master equation
///   drho/dt = -i[H(t), rho] + kappa1*D[a^dag]rho + kappa2*D[a^2]rho.
/// Operator products are formed in the truncated space, which keeps the
/// right-hand side exactly traceless.
class LindbladEngine {
 public:
  explicit LindbladEngine(const QuantumParams& p);

  Matrix rhs(const Matrix& rho, double eps1, double eps2) const;
  const QuantumParams& params() const { return params_; }

 private:
  QuantumParams params_;
};

/// Convenience wrapper matching the schedule-driven signature.
Matrix master_rhs(const Matrix& rho, double t, const ControlSchedule& schedule,
                  const QuantumParams& p);

struct PropagateOptions {
  double dt = 1e-3;
  int observable_stride = 1;   ///< record a MomentSet every k-th step
  int guard_stride = 250;      ///< eigenvalue/truncation checks every k-th step
  double positivity_floor = -1e-6;
  double truncation_guard = 1e-6;  ///< allowed population in the top 10% of levels
  double blowup_guard = 1e6;       ///< hard cap on any matrix entry
};

/// Hermiticity/trace bookkeeping accumulated by the propagator.
struct PropagationStats {
  double cumulative_trace_correction = 0.0;
  double cumulative_hermiticity_correction = 0.0;
  double min_eigenvalue_seen = 0.0;
};

struct QuantumTrajectory {
  std::vector<double> times;
  std::vector<MomentSet> observables;
  std::vector<double> trace_dist;  ///< filled when a reference state is supplied
  std::vector<std::pair<double, DensityMatrix>> snapshots;
  PropagationStats stats;
};

/// Fixed-step RK4 on the matrix equation.  Steps are aligned to control
/// breakpoints; after each step the state is re-hermitized and its trace
/// renormalized, with the corrections accumulated in stats.  When
/// `distance_ref` is given, the trace distance to it is recorded at every
/// observable sample.
QuantumTrajectory propagate(const DensityMatrix& rho0, const ControlSchedule& schedule,
                            double t_end, const QuantumParams& p,
                            const PropagateOptions& opts = {},
                            std::span<const double> snapshot_times = {},
                            const DensityMatrix* distance_ref = nullptr);

/// Advance a state from t0 to t1 under the schedule (absolute times); the
/// cheap entry point for design loops that only need the final state.
DensityMatrix propagate_between(const DensityMatrix& rho0, const ControlSchedule& schedule,
                                double t0, double t1, const QuantumParams& p,
                                const PropagateOptions& opts = {},
                                PropagationStats* stats = nullptr);

struct SteadyStateOptions {
  double tol = 1e-8;     ///< Frobenius norm of the right-hand side at the fixed point
  double t_max = 600.0;  ///< give up beyond this propagation time
  double dt = 1e-3;
  double check_interval = 1.0;  ///< time between convergence checks
};

/// Long-time propagation under constant controls from `seed` (vacuum when
/// absent) until the right-hand side norm falls below tol.
DensityMatrix steady_state(double eps1, double eps2, const QuantumParams& p,
                           const SteadyStateOptions& opts = {},
                           const DensityMatrix* seed = nullptr);

/// Half the absolute-eigenvalue sum of rho1 - rho2.
double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

struct DistanceCurve {
  std::vector<double> times;
  std::vector<double> values;
};

/// T(rho(t), rho_ref) sampled along a propagation.
DistanceCurve trace_distance_curve(const ControlSchedule& schedule, const QuantumParams& p,
                                   const DensityMatrix& rho0, const DensityMatrix& rho_ref,
                                   double horizon, double sample_dt,
                                   const PropagateOptions& opts = {});

/// First time the curve drops below `threshold` and stays below it to the end
/// (linear interpolation between samples).  Throws NeverCrossesError.
double crossing_time(const DistanceCurve& curve, double threshold);

}  // namespace vdpsync::lindblad
