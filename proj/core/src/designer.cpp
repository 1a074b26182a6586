#include "vdpsync/designer.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace vdpsync::designer {

void PathSpec::validate() const {
  if (!(tau > 0.0)) throw ConfigError("path duration must be positive");
  if (!std::isfinite(alpha0.real()) || !std::isfinite(alpha0.imag()) ||
      !std::isfinite(alpha_inf.real()) || !std::isfinite(alpha_inf.imag()))
    throw ConfigError("path endpoints must be finite");
}

PiecewisePath::PiecewisePath(Complex start, Complex mid, Complex end, double tau)
    : start_(start), mid_(mid), end_(end), tau_(tau) {
  if (!(tau > 0.0)) throw ConfigError("path duration must be positive");
}

Complex PiecewisePath::value(double t) const {
  const double half = 0.5 * tau_;
  if (t <= half) return start_ + (mid_ - start_) * (t / half);
  return mid_ + (end_ - mid_) * ((t - half) / half);
}

Complex PiecewisePath::derivative(double t) const {
  const double half = 0.5 * tau_;
  if (t < half) return (mid_ - start_) / half;
  return (end_ - mid_) / half;
}

std::pair<double, double> semiclassical_controls(Complex p_val, Complex p_dot,
                                                 const QuantumParams& p) {
  const Complex z = -p_dot - Complex(0.0, p.delta) * p_val +
                    (p.kappa1 + 2.0 * p.kappa2) * p_val -
                    2.0 * p.kappa2 * std::norm(p_val) * p_val;
  return {2.0 * z.imag(), 2.0 * z.real()};  // (eps1, eps2)
}

namespace {

lindblad::ControlSegment sample_leg(Complex from, Complex to, double t0, double t1,
                                    const QuantumParams& p, double dt) {
  const long n = std::max<long>(1, std::lround((t1 - t0) / dt));
  const double h = (t1 - t0) / static_cast<double>(n);
  const Complex vel = (to - from) / (t1 - t0);
  lindblad::ControlSegment seg;
  seg.times.resize(static_cast<std::size_t>(n) + 1);
  seg.eps1.resize(seg.times.size());
  seg.eps2.resize(seg.times.size());
  for (long k = 0; k <= n; ++k) {
    const double t = (k == n) ? t1 : t0 + static_cast<double>(k) * h;
    const Complex val = from + vel * (t - t0);
    const auto [e1, e2] = semiclassical_controls(val, vel, p);
    seg.times[static_cast<std::size_t>(k)] = t;
    seg.eps1[static_cast<std::size_t>(k)] = e1;
    seg.eps2[static_cast<std::size_t>(k)] = e2;
  }
  return seg;
}

}  // namespace

ControlSchedule semiclassical_inversion(const PiecewisePath& path, const QuantumParams& p,
                                        double dt, double tail_eps1, double tail_eps2) {
  const double tau = path.duration();
  const double half = path.switch_time();
  ControlSchedule s;
  s.tau = tau;
  s.tail_eps1 = tail_eps1;
  s.tail_eps2 = tail_eps2;
  s.segments.push_back(sample_leg(path.value(0.0), path.value(half), 0.0, half, p, dt));
  s.segments.push_back(sample_leg(path.value(half), path.value(tau), half, tau, p, dt));
  return s;
}

DesignResult iterate_design(const PathSpec& spec, const QuantumParams& p,
                            const DesignOptions& opts) {
  spec.validate();
  p.validate();
  const Complex waypoint = spec.intermediate();
  const double half = 0.5 * spec.tau;
  const DensityMatrix rho0 = fock::coherent_state(spec.alpha0, p.dim);

  DesignResult out;
  bool converged1 = false, converged2 = false;

  if (opts.mode == IterationMode::PerSegment) {
    // leg 1: alpha0 -> waypoint over [0, tau/2]
    Complex target = waypoint;
    DensityMatrix rho_mid;
    lindblad::ControlSegment leg1;
    for (int n = 1; n <= opts.n_max; ++n) {
      leg1 = sample_leg(spec.alpha0, target, 0.0, half, p, opts.dt);
      ControlSchedule partial;
      partial.tau = half;
      partial.tail_eps1 = opts.tail_eps1;
      partial.tail_eps2 = opts.tail_eps2;
      partial.segments.push_back(leg1);
      rho_mid = lindblad::propagate_between(rho0, partial, 0.0, half, p, opts.propagate);
      const Complex offset = fock::moments(rho_mid).mean - waypoint;
      target -= offset;
      out.records.push_back({n, 1, offset, target});
      if (std::abs(offset) < opts.tol) {
        converged1 = true;
        break;
      }
    }
    // leg 2: waypoint -> alpha_inf over [tau/2, tau], from the achieved state
    Complex target2 = spec.alpha_inf;
    lindblad::ControlSegment leg2;
    for (int n = 1; n <= opts.n_max; ++n) {
      leg2 = sample_leg(waypoint, target2, half, spec.tau, p, opts.dt);
      ControlSchedule full;
      full.tau = spec.tau;
      full.tail_eps1 = opts.tail_eps1;
      full.tail_eps2 = opts.tail_eps2;
      full.segments.push_back(leg1);
      full.segments.push_back(leg2);
      out.rho_end = lindblad::propagate_between(rho_mid, full, half, spec.tau, p, opts.propagate);
      const Complex offset = fock::moments(out.rho_end).mean - spec.alpha_inf;
      target2 -= offset;
      out.records.push_back({n, 2, offset, target2});
      if (std::abs(offset) < opts.tol) {
        converged2 = true;
        break;
      }
    }
    out.schedule.tau = spec.tau;
    out.schedule.tail_eps1 = opts.tail_eps1;
    out.schedule.tail_eps2 = opts.tail_eps2;
    out.schedule.segments = {leg1, leg2};
  } else {
    // whole-path: single end-point correction, intermediate waypoint fixed
    Complex target = spec.alpha_inf;
    for (int n = 1; n <= opts.n_max; ++n) {
      ControlSchedule s;
      s.tau = spec.tau;
      s.tail_eps1 = opts.tail_eps1;
      s.tail_eps2 = opts.tail_eps2;
      s.segments.push_back(sample_leg(spec.alpha0, waypoint, 0.0, half, p, opts.dt));
      s.segments.push_back(sample_leg(waypoint, target, half, spec.tau, p, opts.dt));
      out.rho_end = lindblad::propagate_between(rho0, s, 0.0, spec.tau, p, opts.propagate);
      const Complex offset = fock::moments(out.rho_end).mean - spec.alpha_inf;
      target -= offset;
      out.records.push_back({n, 0, offset, target});
      out.schedule = s;
      if (std::abs(offset) < opts.tol) {
        converged1 = converged2 = true;
        break;
      }
    }
  }

  out.converged = converged1 && converged2;
  if (!out.converged && opts.throw_on_failure) {
    std::ostringstream os;
    os << "design loop not converged after " << opts.n_max << " iterations (last offset "
       << std::abs(out.records.back().offset) << ", tol " << opts.tol << ")";
    throw NotConvergedError(os.str());
  }
  return out;
}

double delta3(const MomentSet& final_moments, const MomentSet& target) {
  return std::abs(final_moments.third - target.third);
}

namespace {

template <typename CellFn>
void run_cells(std::size_t count, int workers, CellFn&& fn) {
  const int nw = std::max(1, workers);
  if (nw == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ScanResult scan_delta3(std::span<const double> delta_y_grid, std::span<const double> tau_grid,
                       const PathSpec& path_template, const QuantumParams& p,
                       const DesignOptions& opts, int workers) {
  ScanResult result;
  if (delta_y_grid.empty() || tau_grid.empty()) return result;

  const DensityMatrix rho_inf =
      lindblad::steady_state(opts.tail_eps1, opts.tail_eps2, p, opts.steady);
  result.target = fock::moments(rho_inf);
  Complex alpha_inf = path_template.alpha_inf;
  if (alpha_inf == Complex(0.0, 0.0)) alpha_inf = result.target.mean;

  result.cells.resize(delta_y_grid.size() * tau_grid.size());
  run_cells(result.cells.size(), workers, [&](std::size_t idx) {
    const std::size_t iy = idx / tau_grid.size();
    const std::size_t it = idx % tau_grid.size();
    ScanCell cell;
    cell.delta_y = delta_y_grid[iy];
    cell.tau = tau_grid[it];
    PathSpec spec = path_template;
    spec.alpha_inf = alpha_inf;
    spec.delta_y = cell.delta_y;
    spec.tau = cell.tau;
    DesignOptions cell_opts = opts;
    cell_opts.throw_on_failure = false;
    try {
      DesignResult design = iterate_design(spec, p, cell_opts);
      cell.converged = design.converged;
      cell.final_moments = fock::moments(design.rho_end);
      cell.delta3 = delta3(cell.final_moments, result.target);
      cell.records = std::move(design.records);
    } catch (const Error&) {
      cell.converged = false;
      cell.delta3 = std::numeric_limits<double>::quiet_NaN();
    }
    result.cells[idx] = cell;
  });
  return result;
}

MomentsVsTauResult moments_vs_tau(std::span<const double> tau_grid,
                                  const PathSpec& path_template, const QuantumParams& p,
                                  const DesignOptions& opts, int workers) {
  MomentsVsTauResult result;
  if (tau_grid.empty()) return result;
  const std::vector<double> dy{path_template.delta_y};
  const ScanResult scan = scan_delta3(dy, tau_grid, path_template, p, opts, workers);
  result.target_x = scan.target.third.real();
  result.target_y = scan.target.third.imag();
  result.rows.reserve(scan.cells.size());
  for (const ScanCell& cell : scan.cells) {
    result.rows.push_back(
        {cell.tau, cell.final_moments.third.real(), cell.final_moments.third.imag(),
         cell.converged});
  }
  return result;
}

}  // namespace vdpsync::designer
