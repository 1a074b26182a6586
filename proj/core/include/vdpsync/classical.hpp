#pragma once

#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "vdpsync/errors.hpp"

namespace vdpsync::classical {

using Complex = std::complex<double>;

/// Parameters of the driven self-sustained oscillator
///
///   d(alpha)/dt = i*omega0*alpha + alpha*(kappa1 - 2*kappa2*|alpha|^2) - i*eps(t)/2
///
/// written for alpha = x + i y.  The free rotation is counterclockwise (the
/// locked phase advances at +omega), the drive couples to the y component:
///
///   dx/dt = -omega0*y + x*(kappa1 - 2*kappa2*(x^2+y^2))
///   dy/dt = +omega0*x + y*(kappa1 - 2*kappa2*(x^2+y^2)) - eps(t)/2
///
/// Natural units set T0 = 2*pi/omega0 = 1, i.e. omega0 = 2*pi and rates given
/// per T0.
struct ClassicalParams {
  double omega0 = 2.0 * std::numbers::pi;  ///< free oscillator angular frequency
  double kappa1 = 1.0;                     ///< linear gain rate
  double kappa2 = 0.5;                     ///< nonlinear loss rate
  double omega = 1.05 * 2.0 * std::numbers::pi;  ///< driving angular frequency
  double eps0 = 1.5;                       ///< sinusoidal driving amplitude

  double period() const { return 2.0 * std::numbers::pi / omega0; }

  /// Dimensionless values (rates and amplitude scaled by T0).
  double kappa1_scaled() const { return kappa1 * period(); }
  double kappa2_scaled() const { return kappa2 * period(); }
  double eps0_scaled() const { return eps0 * period(); }

  /// Build from dimensionless inputs: kappa_i*T0, eps0*T0 and omega/omega0.
  static ClassicalParams from_dimensionless(double kappa1_t0, double kappa2_t0, double eps0_t0,
                                            double omega_ratio,
                                            double omega0 = 2.0 * std::numbers::pi);

  void validate() const;  ///< throws ConfigError on an invalid combination
};

struct PhasePoint {
  double x = 0.0;
  double y = 0.0;

  Complex to_complex() const { return {x, y}; }
  static PhasePoint from_complex(Complex a) { return {a.real(), a.imag()}; }
  double norm() const { return std::hypot(x, y); }
};

/// Piecewise driving: sampled transient on [0, tau], sinusoidal tail after.
struct DrivingSignal {
  std::vector<double> times;   ///< strictly increasing, first 0, last tau
  std::vector<double> values;  ///< transient amplitude samples
  double tau = 0.0;
  double eps0 = 0.0;  ///< tail amplitude
  double omega = 0.0;  ///< tail angular frequency
  double phi = 0.0;   ///< tail phase

  /// Pure sinusoid eps0*cos(omega*t + phi) switched on at t = 0.
  static DrivingSignal sinusoid(double eps0, double omega, double phi = 0.0);

  /// Linear interpolation on [0, tau], analytic tail for t > tau.
  double operator()(double t) const;

  /// Mismatch |eps(tau-) - eps0*cos(omega*tau + phi)| at the junction.
  double junction_mismatch() const;

  void validate(double continuity_tol) const;
};

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  double dt = 0.0;

  PhasePoint at_time(double t) const;  ///< linear interpolation between samples
};

/// Right-hand side of the flow at one point; pure function.
Complex vdp_derivative(Complex alpha, double t, double eps, const ClassicalParams& p);

struct IntegrateOptions {
  double blowup_cap = 1e3;  ///< abort when |alpha| exceeds this
  int record_stride = 1;    ///< keep every k-th step in the trajectory
};

/// Fixed-step RK4. Driving values at stage times come from linear
/// interpolation of the transient samples and the analytic tail.
ClassicalTrajectory integrate(PhasePoint alpha0, const DrivingSignal& drive, double t_end,
                              double dt, const ClassicalParams& p,
                              const IntegrateOptions& opts = {});

struct BranchPoint {
  PhasePoint point;      ///< position under the sudden sinusoid at t_inf
  double y_slope = 0.0;  ///< dy/dt evaluated from the flow at that position
  bool short_horizon = false;  ///< set when t_inf spans fewer than 20 driving periods
};

/// Late-time position on the synchronized orbit under eps0*cos(omega*t)
/// switched on at t = 0.
BranchPoint find_branch_point(const ClassicalParams& p, double t_inf, double dt,
                              PhasePoint alpha0 = {});

/// Cubic transient path for the pilot coordinate, y(t) = P(t/tau) with
///   P(u) = y_inf + s*tau*(u-1) + (y0 - y_inf + s*tau)*(u-1)^2 + gamma*u*(u-1)^2,
/// s = slope_inf.  Boundary values y(0) = y0, y(tau) = y_inf, y'(tau) = s hold
/// for every gamma.
struct PolynomialPath {
  double y0 = 0.0;
  double y_inf = 0.0;
  double slope_inf = 0.0;
  double tau = 1.0;
  double gamma = 0.0;

  double value(double t) const;
  double derivative(double t) const;
};

/// Fixed boundary data of the path family; gamma stays free for shooting.
struct PathBoundary {
  double y0 = 0.0;
  double y_inf = 0.0;
  double slope_inf = 0.0;

  PolynomialPath with_gamma(double gamma, double tau) const {
    return {y0, y_inf, slope_inf, tau, gamma};
  }
};

/// RK4 solution of the follower equation
///   dx/dt = -omega0*y(t) + kappa1*x - 2*kappa2*(x^2 + y(t)^2)*x
/// with y evaluated analytically at stage times.  Returns x on the uniform
/// grid t_k = k*dt covering [0, tau].
std::vector<double> solve_slave(const std::function<double(double)>& y_path, double x0,
                                double tau, double dt, const ClassicalParams& p,
                                double blowup_cap = 1e3);

struct ShootOptions {
  double tol = 1e-10;      ///< |x(tau) - x_inf| target
  double gamma_max = 1e6;  ///< bracket expansion bound
  int max_iterations = 200;
};

/// Bisection on gamma so that the follower coordinate lands on x_inf at tau.
/// The bracket is searched by geometric expansion starting from [-1, 1].
double shoot_gamma(double x0, double x_inf, const PathBoundary& boundary, double tau, double dt,
                   const ClassicalParams& p, const ShootOptions& opts = {});

/// Driving that holds the system on the sampled (x, y) trajectory; exact
/// inversion of the pilot component of the flow:
///   eps = -2*(dy/dt - omega0*x - kappa1*y + 2*kappa2*(x^2+y^2)*y).
/// `printed_extra_term` adds a spurious trailing +y term seen in one closed
/// form of this expression, kept selectable for comparison only.
std::vector<double> invert_driving(std::span<const double> x, const PolynomialPath& y_path,
                                   double dt, const ClassicalParams& p,
                                   bool printed_extra_term = false);

/// Overload for a sampled pilot coordinate; dy/dt comes from 4th-order finite
/// differences on the uniform grid.
std::vector<double> invert_driving(std::span<const double> x, std::span<const double> y,
                                   double dt, const ClassicalParams& p,
                                   bool printed_extra_term = false);

/// Transient samples on [0, tau] plus the phase-matched sinusoidal tail
/// phi = omega*(t_inf - tau).  Throws ContinuityViolationError when the
/// junction mismatch exceeds the tolerance.
DrivingSignal assemble_full_driving(std::span<const double> times, std::span<const double> eps,
                                    const ClassicalParams& p, double t_inf, double tau,
                                    double continuity_tol = 1e-5);

struct PhaseSeries {
  std::vector<double> times;
  std::vector<double> raw;     ///< atan2(y,x) - omega*t - phi, continuously unwrapped
  std::vector<double> folded;  ///< raw folded into [-pi/2, pi/2)
  bool origin_crossing = false;  ///< |alpha| dipped below the threshold somewhere
};

/// Oscillator-minus-drive phase along a trajectory.
PhaseSeries phase_difference(const ClassicalTrajectory& traj, double omega, double phi,
                             double origin_threshold = 1e-6);

/// Everything the transient design produces for one scenario.
struct ShortcutDesign {
  BranchPoint branch;
  double gamma0 = 0.0;
  std::vector<double> grid_times;  ///< uniform grid on [0, tau]
  std::vector<double> x_path;
  std::vector<double> y_path;
  DrivingSignal driving;
};

/// Full design pipeline: branch point, shooting, inversion, assembly.
ShortcutDesign design_shortcut(const ClassicalParams& p, PhasePoint alpha0, double tau,
                               double t_inf, double dt, const ShootOptions& shoot = {},
                               double continuity_tol = 1e-5);

}  // namespace vdpsync::classical
