#pragma once

#include <span>

#include "vdpsync/lindblad.hpp"

namespace vdpsync::designer {

using fock::Complex;
using fock::DensityMatrix;
using fock::MomentSet;
using fock::QuantumParams;
using lindblad::ControlSchedule;

/// Two-segment reference path for the mean position: alpha0 to the offset
/// midpoint to alpha_inf, each leg at constant speed over tau/2.
struct PathSpec {
  Complex alpha0;
  Complex alpha_inf;
  double delta_y = 0.0;
  double tau = 1.0;

  Complex midpoint() const { return 0.5 * (alpha0 + alpha_inf); }
  Complex intermediate() const { return midpoint() + Complex(0.0, delta_y); }
  void validate() const;
};

/// Piecewise-linear mean path through possibly corrected waypoints; the
/// velocity jumps at tau/2.
class PiecewisePath {
 public:
  PiecewisePath(Complex start, Complex mid, Complex end, double tau);

  Complex value(double t) const;
  Complex derivative(double t) const;  ///< one-sided from the segment containing t
  double switch_time() const { return 0.5 * tau_; }
  double duration() const { return tau_; }

 private:
  Complex start_, mid_, end_;
  double tau_;
};

/// Controls that hold the mean-field flow on a point moving with velocity
/// p_dot through p_val:
///   (eps2 + i*eps1)/2 = -p_dot - i*delta*p + (kappa1 + 2*kappa2)*p - 2*kappa2*|p|^2*p.
std::pair<double, double> semiclassical_controls(Complex p_val, Complex p_dot,
                                                 const QuantumParams& p);

/// Sample the inversion over [0, tau] on the dt grid, one control segment per
/// path leg; the jump at tau/2 is preserved.
ControlSchedule semiclassical_inversion(const PiecewisePath& path, const QuantumParams& p,
                                        double dt, double tail_eps1 = 1.0,
                                        double tail_eps2 = 0.0);

enum class IterationMode { PerSegment, WholePath };

struct IterationRecord {
  int iteration = 0;
  int segment = 0;  ///< 1 or 2 in per-segment mode, 0 in whole-path mode
  Complex offset;
  Complex corrected_target;
};

struct DesignOptions {
  int n_max = 12;
  double tol = 1e-3;  ///< |offset| to call a segment converged
  IterationMode mode = IterationMode::PerSegment;
  double dt = 1e-3;
  double tail_eps1 = 1.0;
  double tail_eps2 = 0.0;
  bool throw_on_failure = true;
  lindblad::PropagateOptions propagate;
  lindblad::SteadyStateOptions steady;  ///< used by the scans for the targets
};

struct DesignResult {
  ControlSchedule schedule;
  std::vector<IterationRecord> records;
  bool converged = false;
  DensityMatrix rho_end;  ///< full-equation state at tau under the final controls
};

/// Iterative correction loop: invert the mean-field equation along the
/// reference path, propagate the full master equation, shift the waypoint
/// target by the landing offset, repeat.  Per-segment mode corrects each leg
/// against its own waypoint; whole-path mode applies a single end-point
/// correction.
DesignResult iterate_design(const PathSpec& spec, const QuantumParams& p,
                            const DesignOptions& opts = {});

/// Euclidean mismatch of the two symmetric third-moment components.
double delta3(const MomentSet& final_moments, const MomentSet& target);

struct ScanCell {
  double delta_y = 0.0;
  double tau = 0.0;
  double delta3 = 0.0;
  MomentSet final_moments;
  bool converged = false;
  std::vector<IterationRecord> records;
};

struct ScanResult {
  std::vector<ScanCell> cells;  ///< row-major over (delta_y, tau), grid order
  MomentSet target;
};

/// Design + propagate every (delta_y, tau) cell; failures are recorded
/// in-row and the scan continues.  Cells run on `workers` threads and are
/// merged in grid order.
ScanResult scan_delta3(std::span<const double> delta_y_grid, std::span<const double> tau_grid,
                       const PathSpec& path_template, const QuantumParams& p,
                       const DesignOptions& opts = {}, int workers = 1);

struct MomentsVsTauRow {
  double tau = 0.0;
  double third_x = 0.0;
  double third_y = 0.0;
  bool converged = false;
};

struct MomentsVsTauResult {
  std::vector<MomentsVsTauRow> rows;
  double target_x = 0.0;
  double target_y = 0.0;
};

/// Final third moments after designed transients of each duration, plus the
/// stationary targets.
MomentsVsTauResult moments_vs_tau(std::span<const double> tau_grid, const PathSpec& path_template,
                                  const QuantumParams& p, const DesignOptions& opts = {},
                                  int workers = 1);

}  // namespace vdpsync::designer
