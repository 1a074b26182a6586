#include "vdpsync/classical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vdpsync::classical {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

ClassicalParams ClassicalParams::from_dimensionless(double kappa1_t0, double kappa2_t0,
                                                    double eps0_t0, double omega_ratio,
                                                    double omega0) {
  ClassicalParams p;
  p.omega0 = omega0;
  const double t0 = 2.0 * std::numbers::pi / omega0;
  p.kappa1 = kappa1_t0 / t0;
  p.kappa2 = kappa2_t0 / t0;
  p.eps0 = eps0_t0 / t0;
  p.omega = omega_ratio * omega0;
  return p;
}

void ClassicalParams::validate() const {
  if (!(omega0 > 0.0)) throw ConfigError("omega0 must be positive");
  if (!(kappa1 > 0.0)) throw ConfigError("kappa1 must be positive");
  if (!(kappa2 > 0.0)) throw ConfigError("kappa2 must be positive");
  if (!(eps0 >= 0.0)) throw ConfigError("eps0 must be non-negative");
  if (!(omega > 0.0)) throw ConfigError("omega must be positive");
}

DrivingSignal DrivingSignal::sinusoid(double eps0, double omega, double phi) {
  DrivingSignal d;
  d.tau = 0.0;
  d.eps0 = eps0;
  d.omega = omega;
  d.phi = phi;
  return d;
}

double DrivingSignal::operator()(double t) const {
  if (t > tau || times.empty()) return eps0 * std::cos(omega * t + phi);
  if (t <= times.front()) return values.front();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi >= times.size()) return values.back();
  const std::size_t lo = hi - 1;
  const double f = (t - times[lo]) / (times[hi] - times[lo]);
  return values[lo] + f * (values[hi] - values[lo]);
}

double DrivingSignal::junction_mismatch() const {
  if (times.empty()) return 0.0;
  return std::abs(values.back() - eps0 * std::cos(omega * tau + phi));
}

void DrivingSignal::validate(double continuity_tol) const {
  if (times.size() != values.size()) throw ConfigError("driving sample size mismatch");
  if (!times.empty()) {
    if (times.front() != 0.0) throw ConfigError("driving samples must start at t = 0");
    if (std::abs(times.back() - tau) > 1e-12 * std::max(1.0, tau))
      throw ConfigError("driving samples must end at t = tau");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("driving sample times must increase");
    if (junction_mismatch() > continuity_tol)
      throw ContinuityViolationError("driving discontinuous at the transient/tail junction");
  }
}

PhasePoint ClassicalTrajectory::at_time(double t) const {
  if (times.empty()) return {};
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double f = (t - times[lo]) / (times[hi] - times[lo]);
  return {points[lo].x + f * (points[hi].x - points[lo].x),
          points[lo].y + f * (points[hi].y - points[lo].y)};
}

Complex vdp_derivative(Complex alpha, double /*t*/, double eps, const ClassicalParams& p) {
  const double g = p.kappa1 - 2.0 * p.kappa2 * std::norm(alpha);
  return Complex(0.0, p.omega0) * alpha + alpha * g - Complex(0.0, 0.5) * eps;
}

namespace {

// Shared RK4 core; calls `record` after every step.
template <typename DriveFn, typename RecordFn>
void rk4_flow(Complex alpha0, DriveFn&& eps_at, double t_end, double dt,
              const ClassicalParams& p, double blowup_cap, RecordFn&& record) {
  const long n = std::lround(t_end / dt);
  Complex a = alpha0;
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double e0 = eps_at(t);
    const double em = eps_at(t + 0.5 * dt);
    const double e1 = eps_at(t + dt);
    const Complex k1 = vdp_derivative(a, t, e0, p);
    const Complex k2 = vdp_derivative(a + 0.5 * dt * k1, t + 0.5 * dt, em, p);
    const Complex k3 = vdp_derivative(a + 0.5 * dt * k2, t + 0.5 * dt, em, p);
    const Complex k4 = vdp_derivative(a + dt * k3, t + dt, e1, p);
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t1 = static_cast<double>(i + 1) * dt;
    if (!finite(a.real()) || !finite(a.imag()) || std::abs(a) > blowup_cap) {
      std::ostringstream os;
      os << "trajectory diverged at t = " << t1 << " (|alpha| cap " << blowup_cap << ")";
      throw DivergenceError(t1, os.str());
    }
    record(i + 1, t1, a);
  }
}

}  // namespace

ClassicalTrajectory integrate(PhasePoint alpha0, const DrivingSignal& drive, double t_end,
                              double dt, const ClassicalParams& p, const IntegrateOptions& opts) {
  if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
  if (!(t_end > 0.0)) throw ConfigError("integration horizon must be positive");
  p.validate();

  const long n = std::lround(t_end / dt);
  const int stride = std::max(1, opts.record_stride);
  ClassicalTrajectory traj;
  traj.dt = dt * stride;
  traj.times.reserve(static_cast<std::size_t>(n / stride) + 2);
  traj.points.reserve(static_cast<std::size_t>(n / stride) + 2);
  traj.times.push_back(0.0);
  traj.points.push_back(alpha0);

  rk4_flow(alpha0.to_complex(), [&](double t) { return drive(t); }, t_end, dt, p,
           opts.blowup_cap, [&](long i, double t, Complex a) {
             if (i % stride == 0 || i == n) {
               traj.times.push_back(t);
               traj.points.push_back(PhasePoint::from_complex(a));
             }
           });
  return traj;
}

BranchPoint find_branch_point(const ClassicalParams& p, double t_inf, double dt,
                              PhasePoint alpha0) {
  p.validate();
  BranchPoint b;
  b.short_horizon = t_inf < 20.0 * 2.0 * std::numbers::pi / p.omega;

  Complex a = alpha0.to_complex();
  rk4_flow(a, [&](double t) { return p.eps0 * std::cos(p.omega * t); }, t_inf, dt, p, 1e3,
           [&](long, double, Complex v) { a = v; });
  b.point = PhasePoint::from_complex(a);

  const Complex rate =
      vdp_derivative(a, t_inf, p.eps0 * std::cos(p.omega * t_inf), p);
  b.y_slope = rate.imag();
  return b;
}

double PolynomialPath::value(double t) const {
  const double u = t / tau;
  const double v = u - 1.0;
  return y_inf + slope_inf * tau * v + (y0 - y_inf + slope_inf * tau) * v * v +
         gamma * u * v * v;
}

double PolynomialPath::derivative(double t) const {
  const double u = t / tau;
  const double v = u - 1.0;
  const double dPdu =
      slope_inf * tau + 2.0 * (y0 - y_inf + slope_inf * tau) * v + gamma * (v * v + 2.0 * u * v);
  return dPdu / tau;
}

std::vector<double> solve_slave(const std::function<double(double)>& y_path, double x0,
                                double tau, double dt, const ClassicalParams& p,
                                double blowup_cap) {
  if (!(dt > 0.0) || !(tau > 0.0)) throw ConfigError("solve_slave needs positive tau and dt");
  const long n = std::lround(tau / dt);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + 1);
  xs.push_back(x0);
  double x = x0;
  auto f = [&](double t, double xv) {
    const double yv = y_path(t);
    return -p.omega0 * yv + p.kappa1 * xv - 2.0 * p.kappa2 * (xv * xv + yv * yv) * xv;
  };
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double k1 = f(t, x);
    const double k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const double k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const double k4 = f(t + dt, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!finite(x) || std::abs(x) > blowup_cap) {
      const double t1 = static_cast<double>(i + 1) * dt;
      throw DivergenceError(t1, "follower coordinate diverged at t = " + std::to_string(t1));
    }
    xs.push_back(x);
  }
  return xs;
}

double shoot_gamma(double x0, double x_inf, const PathBoundary& boundary, double tau, double dt,
                   const ClassicalParams& p, const ShootOptions& opts) {
  auto residual = [&](double gamma) {
    const PolynomialPath path = boundary.with_gamma(gamma, tau);
    const auto xs = solve_slave([&](double t) { return path.value(t); }, x0, tau, dt, p);
    return xs.back() - x_inf;
  };

  // Expand [-b, b] geometrically until the endpoint residuals change sign.
  // Candidates whose slave solve blows up (the fixed-step integration turns
  // unstable at extreme path amplitudes) carry no usable sign and are skipped.
  auto try_residual = [&](double gamma, double& out) {
    try {
      out = residual(gamma);
      return true;
    } catch (const DivergenceError&) {
      return false;
    }
  };

  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  {
    const double f0 = residual(0.0);
    if (std::abs(f0) < opts.tol) return 0.0;
    double b = 1.0;
    bool found = false;
    double prev_neg = 0.0, prev_pos = 0.0;
    bool has_neg = f0 < 0.0, has_pos = f0 > 0.0;
    if (has_neg) prev_neg = 0.0;
    if (has_pos) prev_pos = 0.0;
    while (b <= opts.gamma_max) {
      for (double cand : {-b, b}) {
        double fc = 0.0;
        if (!try_residual(cand, fc)) continue;
        if (std::abs(fc) < opts.tol) return cand;
        if (fc < 0.0 && has_pos) {
          lo = cand; flo = fc; hi = prev_pos; fhi = residual(prev_pos); found = true; break;
        }
        if (fc > 0.0 && has_neg) {
          lo = prev_neg; flo = residual(prev_neg); hi = cand; fhi = fc; found = true; break;
        }
        if (fc < 0.0) { has_neg = true; prev_neg = cand; }
        if (fc > 0.0) { has_pos = true; prev_pos = cand; }
      }
      if (found) break;
      b *= 2.0;
    }
    if (!found)
      throw NoBracketError(
          "no sign change of the shooting residual within |gamma| <= " +
          std::to_string(opts.gamma_max) + "; branch point unreachable in the given tau");
  }

  // plain bisection; flo < 0 < fhi by construction
  if (flo > fhi) { std::swap(lo, hi); std::swap(flo, fhi); }
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if (std::abs(fm) < opts.tol) return mid;
    if (fm < 0.0) { lo = mid; } else { hi = mid; }
  }
  throw SlowConvergenceError("shooting bisection did not reach tolerance in " +
                             std::to_string(opts.max_iterations) + " iterations");
}

namespace {

std::vector<double> invert_core(std::span<const double> x, std::span<const double> y,
                                std::span<const double> ydot, const ClassicalParams& p,
                                bool printed_extra_term) {
  std::vector<double> eps(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r2 = x[i] * x[i] + y[i] * y[i];
    double e = -2.0 * (ydot[i] - p.omega0 * x[i] - p.kappa1 * y[i] + 2.0 * p.kappa2 * r2 * y[i]);
    if (printed_extra_term) e -= 2.0 * y[i];
    eps[i] = e;
  }
  return eps;
}

}  // namespace

std::vector<double> invert_driving(std::span<const double> x, const PolynomialPath& y_path,
                                   double dt, const ClassicalParams& p, bool printed_extra_term) {
  std::vector<double> y(x.size()), ydot(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    y[i] = y_path.value(t);
    ydot[i] = y_path.derivative(t);
  }
  return invert_core(x, y, ydot, p, printed_extra_term);
}

std::vector<double> invert_driving(std::span<const double> x, std::span<const double> y,
                                   double dt, const ClassicalParams& p, bool printed_extra_term) {
  if (x.size() != y.size()) throw ConfigError("invert_driving: sample size mismatch");
  if (y.size() < 5) throw ConfigError("invert_driving: need at least 5 samples");
  const std::size_t n = y.size();
  std::vector<double> ydot(n);
  // 4th-order centered stencil inside, one-sided at the edges
  for (std::size_t i = 2; i + 2 < n; ++i)
    ydot[i] = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * dt);
  auto fwd = [&](std::size_t i) {
    return (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] -
            3.0 * y[i + 4]) / (12.0 * dt);
  };
  auto bwd = [&](std::size_t i) {
    return (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] +
            3.0 * y[i - 4]) / (12.0 * dt);
  };
  ydot[0] = fwd(0);
  ydot[1] = fwd(1);
  ydot[n - 2] = bwd(n - 2);
  ydot[n - 1] = bwd(n - 1);
  return invert_core(x, y, ydot, p, printed_extra_term);
}

DrivingSignal assemble_full_driving(std::span<const double> times, std::span<const double> eps,
                                    const ClassicalParams& p, double t_inf, double tau,
                                    double continuity_tol) {
  if (times.size() != eps.size() || times.empty())
    throw ConfigError("assemble_full_driving: bad sample arrays");
  DrivingSignal d;
  d.times.assign(times.begin(), times.end());
  d.values.assign(eps.begin(), eps.end());
  d.tau = tau;
  d.eps0 = p.eps0;
  d.omega = p.omega;
  d.phi = p.omega * (t_inf - tau);
  const double mismatch = d.junction_mismatch();
  if (mismatch > continuity_tol) {
    std::ostringstream os;
    os << "junction mismatch " << mismatch << " exceeds tolerance " << continuity_tol;
    throw ContinuityViolationError(os.str());
  }
  return d;
}

PhaseSeries phase_difference(const ClassicalTrajectory& traj, double omega, double phi,
                             double origin_threshold) {
  PhaseSeries s;
  s.times = traj.times;
  s.raw.resize(traj.times.size());
  s.folded.resize(traj.times.size());
  double prev_angle = 0.0;
  double offset = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const PhasePoint& pt = traj.points[i];
    if (pt.norm() < origin_threshold) s.origin_crossing = true;
    const double angle = std::atan2(pt.y, pt.x);
    if (i > 0) {
      double jump = angle - prev_angle;
      while (jump > std::numbers::pi) { jump -= 2.0 * std::numbers::pi; }
      while (jump < -std::numbers::pi) { jump += 2.0 * std::numbers::pi; }
      offset += jump;
    } else {
      offset = angle;
    }
    prev_angle = angle;
    const double d = offset - omega * traj.times[i] - phi;
    s.raw[i] = d;
    s.folded[i] = d - std::numbers::pi * std::round(d / std::numbers::pi);
  }
  return s;
}

ShortcutDesign design_shortcut(const ClassicalParams& p, PhasePoint alpha0, double tau,
                               double t_inf, double dt, const ShootOptions& shoot,
                               double continuity_tol) {
  ShortcutDesign out;
  out.branch = find_branch_point(p, t_inf, dt, alpha0);
  const PathBoundary boundary{alpha0.y, out.branch.point.y, out.branch.y_slope};
  out.gamma0 = shoot_gamma(alpha0.x, out.branch.point.x, boundary, tau, dt, p, shoot);

  const PolynomialPath path = boundary.with_gamma(out.gamma0, tau);
  out.x_path = solve_slave([&](double t) { return path.value(t); }, alpha0.x, tau, dt, p);
  const long n = std::lround(tau / dt);
  out.grid_times.resize(static_cast<std::size_t>(n) + 1);
  out.y_path.resize(out.grid_times.size());
  for (std::size_t i = 0; i < out.grid_times.size(); ++i) {
    out.grid_times[i] = static_cast<double>(i) * dt;
    out.y_path[i] = path.value(out.grid_times[i]);
  }
  const auto eps = invert_driving(out.x_path, path, dt, p);
  out.driving = assemble_full_driving(out.grid_times, eps, p, t_inf, tau, continuity_tol);
  return out;
}

}  // namespace vdpsync::classical
