#include "vdpsync/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace vdpsync::wigner {

void PDEConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("pde dt must be positive");
  if (points < 16) throw ConfigError("pde grid needs at least 16 points per axis");
  if (!(half_width > 0.0)) throw ConfigError("pde half_width must be positive");
  if (theta < 0.5 || theta > 1.0) throw ConfigError("theta must lie in [0.5, 1]");
  if (!(solver_tol > 0.0)) throw ConfigError("solver tolerance must be positive");
}

double WignerGrid::integral() const {
  double total = 0.0;
  for (int iy = 0; iy < m; ++iy) {
    const double wy = (iy == 0 || iy == m - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int ix = 0; ix < m; ++ix) {
      const double wx = (ix == 0 || ix == m - 1) ? 0.5 : 1.0;
      row += wx * at(ix, iy);
    }
    total += wy * row;
  }
  return total * dx * dx;
}

double WignerGrid::boundary_band_ratio(int band) const {
  const double peak = values.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  for (int iy = 0; iy < m; ++iy) {
    for (int ix = 0; ix < m; ++ix) {
      if (ix >= band && ix < m - band && iy >= band && iy < m - band) continue;
      edge = std::max(edge, std::abs(at(ix, iy)));
    }
  }
  return edge / peak;
}

WignerGrid initialize_coherent(Complex alpha0, const PDEConfig& cfg) {
  cfg.validate();
  if (std::abs(alpha0) + 3.0 >= cfg.half_width) {
    std::ostringstream os;
    os << "coherent state at |alpha| = " << std::abs(alpha0)
       << " does not fit the domain half-width " << cfg.half_width;
    throw DomainTooSmallError(os.str());
  }
  WignerGrid g;
  g.m = cfg.points;
  g.half_width = cfg.half_width;
  g.dx = 2.0 * cfg.half_width / static_cast<double>(cfg.points - 1);
  g.values.resize(static_cast<Eigen::Index>(g.m) * g.m);
  const double x0 = alpha0.real(), y0 = alpha0.imag();
  for (int iy = 0; iy < g.m; ++iy) {
    const double y = g.coord(iy);
    for (int ix = 0; ix < g.m; ++ix) {
      const double x = g.coord(ix);
      g.at(ix, iy) =
          (2.0 / std::numbers::pi) * std::exp(-2.0 * ((x - x0) * (x - x0) + (y - y0) * (y - y0)));
    }
  }
  g.values /= g.integral();
  return g;
}

MomentSet moments_from_wigner(const WignerGrid& g) {
  MomentSet out;
  double mx = 0.0, my = 0.0, t3r = 0.0, t3i = 0.0, r2m = 0.0;
  for (int iy = 0; iy < g.m; ++iy) {
    const double y = g.coord(iy);
    const double wy = (iy == 0 || iy == g.m - 1) ? 0.5 : 1.0;
    for (int ix = 0; ix < g.m; ++ix) {
      const double x = g.coord(ix);
      const double wx = (ix == 0 || ix == g.m - 1) ? 0.5 : 1.0;
      const double w = wx * wy * g.at(ix, iy);
      const double r2 = x * x + y * y;
      mx += w * x;
      my += w * y;
      t3r += w * r2 * x;
      t3i += w * r2 * y;
      r2m += w * r2;
    }
  }
  const double cell = g.dx * g.dx;
  out.mean = Complex(mx, my) * cell;
  out.third = Complex(t3r, t3i) * cell;
  out.phonon = r2m * cell - 0.5;  // symmetric-ordering offset
  return out;
}

WignerSolver::WignerSolver(const QuantumParams& p, const PDEConfig& cfg, unsigned terms)
    : params_(p), cfg_(cfg), terms_(terms) {
  cfg.validate();
  const int m = cfg.points;
  const Eigen::Index n = static_cast<Eigen::Index>(m) * m;
  const double dx = 2.0 * cfg.half_width / static_cast<double>(m - 1);
  const double k1 = (terms_ & kGain) ? p.kappa1 : 0.0;
  const double k2 = (terms_ & kLoss) ? p.kappa2 : 0.0;
  const double delta = (terms_ & kRotation) ? p.delta : 0.0;
  const bool with_drive = (terms_ & kDrive) != 0;

  // One shared pattern for the three matrices so values can be recombined
  // per step without re-allocating.
  std::vector<Eigen::Triplet<double>> ta, tb1, tb2;
  ta.reserve(static_cast<std::size_t>(n) * 13);
  tb1.reserve(static_cast<std::size_t>(n) * 13);
  tb2.reserve(static_cast<std::size_t>(n) * 13);

  const auto coord = [&](int i) { return -cfg.half_width + dx * static_cast<double>(i); };
  const auto htilde = [&](double px, double py) {
    return k1 + 4.0 * k2 * (px * px + py * py);
  };

  for (int iy = 0; iy < m; ++iy) {
    const double y = coord(iy);
    for (int ix = 0; ix < m; ++ix) {
      const double x = coord(ix);
      const Eigen::Index row = static_cast<Eigen::Index>(iy) * m + ix;

      // Face fluxes, each face contributing sgn*F/dx to the row.  Every term
      // lives in a flux, so the column sums of the operator vanish and mass is
      // conserved exactly.
      std::map<std::pair<int, int>, double> st;   // drift + dissipative part
      std::map<std::pair<int, int>, double> st1;  // eps1 coefficient
      std::map<std::pair<int, int>, double> st2;  // eps2 coefficient
      auto acc = [](auto& mp, int dxi, int dyi, double w) { mp[{dxi, dyi}] += w; };

      for (int sgn : {+1, -1}) {
        // --- x-direction face at (x + sgn*dx/2, y)
        {
          const double xf = x + 0.5 * sgn * dx;
          const double rf2 = xf * xf + y * y;
          const double cadv = -delta * y + xf * (-k1 + 2.0 * k2 * (rf2 - 1.0));
          const double wa = sgn * cadv / (2.0 * dx);  // centered face average
          acc(st, 0, 0, wa);
          acc(st, sgn, 0, wa);
          acc(st2, 0, 0, sgn * 0.5 / (2.0 * dx));
          acc(st2, sgn, 0, sgn * 0.5 / (2.0 * dx));
          // (1/4) d/dx (htilde W) - (kappa2/4) dW/dx, one-sided across the face
          const double hn = htilde(x + sgn * dx, y);
          const double hi = htilde(x, y);
          acc(st, sgn, 0, (0.25 * hn - 0.25 * k2) / (dx * dx));
          acc(st, 0, 0, -(0.25 * hi - 0.25 * k2) / (dx * dx));
          // (kappa2/8) xf * Lap W, Laplacian averaged over the two cells
          const double cl = sgn * (k2 / 8.0) * xf / (2.0 * dx);
          for (const auto& [ox, oy] : std::initializer_list<std::pair<int, int>>{{0, 0}, {sgn, 0}}) {
            acc(st, ox + 1, oy, cl / (dx * dx));
            acc(st, ox - 1, oy, cl / (dx * dx));
            acc(st, ox, oy + 1, cl / (dx * dx));
            acc(st, ox, oy - 1, cl / (dx * dx));
            acc(st, ox, oy, -4.0 * cl / (dx * dx));
          }
        }
        // --- y-direction face at (x, y + sgn*dx/2)
        {
          const double yf = y + 0.5 * sgn * dx;
          const double rf2 = x * x + yf * yf;
          const double cadv = delta * x + yf * (-k1 + 2.0 * k2 * (rf2 - 1.0));
          const double wa = sgn * cadv / (2.0 * dx);
          acc(st, 0, 0, wa);
          acc(st, 0, sgn, wa);
          acc(st1, 0, 0, sgn * 0.5 / (2.0 * dx));
          acc(st1, 0, sgn, sgn * 0.5 / (2.0 * dx));
          const double hn = htilde(x, y + sgn * dx);
          const double hi = htilde(x, y);
          acc(st, 0, sgn, (0.25 * hn - 0.25 * k2) / (dx * dx));
          acc(st, 0, 0, -(0.25 * hi - 0.25 * k2) / (dx * dx));
          const double cl = sgn * (k2 / 8.0) * yf / (2.0 * dx);
          for (const auto& [ox, oy] : std::initializer_list<std::pair<int, int>>{{0, 0}, {0, sgn}}) {
            acc(st, ox + 1, oy, cl / (dx * dx));
            acc(st, ox - 1, oy, cl / (dx * dx));
            acc(st, ox, oy + 1, cl / (dx * dx));
            acc(st, ox, oy - 1, cl / (dx * dx));
            acc(st, ox, oy, -4.0 * cl / (dx * dx));
          }
        }
      }

      std::map<std::pair<int, int>, double> pattern = st;
      for (const auto& [off, w] : st1) pattern[off] += 0.0;
      for (const auto& [off, w] : st2) pattern[off] += 0.0;
      pattern[{0, 0}] += 0.0;  // keep the diagonal structural
      for (const auto& [off, unused] : pattern) {
        const int jx = ix + off.first, jy = iy + off.second;
        if (jx < 0 || jy < 0 || jx >= m || jy >= m) continue;
        const Eigen::Index col = static_cast<Eigen::Index>(jy) * m + jx;
        ta.emplace_back(row, col, st.count(off) ? st[off] : 0.0);
        const auto it1 = st1.find(off);
        const auto it2 = st2.find(off);
        tb1.emplace_back(row, col, with_drive && it1 != st1.end() ? it1->second : 0.0);
        tb2.emplace_back(row, col, with_drive && it2 != st2.end() ? it2->second : 0.0);
      }
    }
  }
  a0_.resize(n, n);
  b1_.resize(n, n);
  b2_.resize(n, n);
  a0_.setFromTriplets(ta.begin(), ta.end());
  b1_.setFromTriplets(tb1.begin(), tb1.end(), [](double a, double b) { return a + b; });
  b2_.setFromTriplets(tb2.begin(), tb2.end(), [](double a, double b) { return a + b; });
  a0_.makeCompressed();
  b1_.makeCompressed();
  b2_.makeCompressed();

  lhs_ = a0_;
  rhs_ = a0_;
  // diagonal entry positions in the compressed layout
  diag_pos_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    bool found = false;
    for (Eigen::Index k = lhs_.outerIndexPtr()[r]; k < lhs_.outerIndexPtr()[r + 1]; ++k) {
      if (lhs_.innerIndexPtr()[k] == r) {
        diag_pos_[static_cast<std::size_t>(r)] = k;
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::Numerical, "wigner operator row without diagonal");
  }
  solver_.setTolerance(cfg.solver_tol);
  solver_.setMaxIterations(cfg.solver_max_iterations);
}

void WignerSolver::assemble(double eps1, double eps2, double lhs_scale, double rhs_scale) {
  const Eigen::Index nnz = a0_.nonZeros();
  const double* av = a0_.valuePtr();
  const double* b1v = b1_.valuePtr();
  const double* b2v = b2_.valuePtr();
  double* lv = lhs_.valuePtr();
  double* rv = rhs_.valuePtr();
  for (Eigen::Index k = 0; k < nnz; ++k) {
    const double a = av[k] + eps1 * b1v[k] + eps2 * b2v[k];
    lv[k] = lhs_scale * a;
    rv[k] = rhs_scale * a;
  }
  for (Eigen::Index d : diag_pos_) {
    lv[d] += 1.0;
    rv[d] += 1.0;
  }
}

void WignerSolver::step(WignerGrid& grid, double eps1, double eps2) {
  step(grid, eps1, eps2, cfg_.dt);
}

void WignerSolver::step(WignerGrid& grid, double eps1, double eps2, double h) {
  if (grid.m != cfg_.points) throw ConfigError("wigner grid does not match the solver");
  if (!values_current_ || eps1 != last_eps1_ || eps2 != last_eps2_ || h != last_h_) {
    assemble(eps1, eps2, -cfg_.theta * h, (1.0 - cfg_.theta) * h);
    solver_.compute(lhs_);
    last_eps1_ = eps1;
    last_eps2_ = eps2;
    last_h_ = h;
    values_current_ = true;
  }
  const Eigen::VectorXd rhs_vec = rhs_ * grid.values;
  const Eigen::VectorXd next = solver_.solveWithGuess(rhs_vec, grid.values);
  last_iterations_ = static_cast<int>(solver_.iterations());
  last_residual_ = solver_.error();
  if (solver_.info() != Eigen::Success) {
    std::ostringstream os;
    os << "linear solve stalled (residual " << solver_.error() << " after "
       << solver_.iterations() << " iterations)";
    throw SolverStallError(0.0, os.str());
  }
  grid.values = next;
}

Eigen::VectorXd WignerSolver::apply_generator(const WignerGrid& grid, double eps1,
                                              double eps2) const {
  return a0_ * grid.values + eps1 * (b1_ * grid.values) + eps2 * (b2_ * grid.values);
}

WignerSeries evolve(const lindblad::ControlSchedule& schedule, const QuantumParams& p,
                    const PDEConfig& cfg, Complex alpha0, double t_end, double sample_dt,
                    std::span<const double> snapshot_times) {
  cfg.validate();
  schedule.validate();
  WignerSolver solver(p, cfg);
  WignerGrid grid = initialize_coherent(alpha0, cfg);

  WignerSeries series;
  series.times.push_back(0.0);
  series.moments.push_back(moments_from_wigner(grid));
  series.mass.push_back(grid.integral());

  std::vector<double> snaps(snapshot_times.begin(), snapshot_times.end());
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
    series.snapshots.emplace_back(0.0, grid);
    ++next_snap;
  }

  // span edges: sampling instants plus control breakpoints
  std::vector<double> edges{0.0};
  const long nsamples = std::lround(t_end / sample_dt);
  for (long k = 1; k <= nsamples; ++k) edges.push_back(std::min(t_end, k * sample_dt));
  for (double b : schedule.breakpoints())
    if (b > 0.0 && b < t_end) edges.push_back(b);
  for (double s : snaps)
    if (s > 0.0 && s < t_end) edges.push_back(s);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              edges.end());
  if (edges.back() < t_end) edges.push_back(t_end);

  const double initial_mass = series.mass.front();
  auto is_sample_instant = [&](double t) {
    const double k = t / sample_dt;
    return std::abs(k - std::round(k)) < 1e-9 || std::abs(t - t_end) < 1e-12;
  };
  long steps_done = 0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double t0 = edges[e], t1 = edges[e + 1];
    const long n = std::max<long>(1, std::lround((t1 - t0) / cfg.dt));
    const double h = (t1 - t0) / static_cast<double>(n);
    const int seg = schedule.segment_index(0.5 * (t0 + t1));
    for (long i = 0; i < n; ++i) {
      const double tm = t0 + (static_cast<double>(i) + 0.5) * h;
      const auto [e1, e2] = schedule.eval_in(seg, tm);
      solver.step(grid, e1, e2, h);
      ++steps_done;
      if (cfg.guard_stride > 0 && steps_done % cfg.guard_stride == 0) {
        const double ratio = grid.boundary_band_ratio();
        if (ratio > cfg.boundary_guard) {
          std::ostringstream os;
          os << "boundary band carries " << ratio << " of the peak at t = "
             << t0 + (i + 1) * h << "; enlarge the domain";
          throw DomainTooSmallError(os.str());
        }
      }
    }
    const double mass = grid.integral();
    if (std::abs(mass - initial_mass) > cfg.mass_drift_tol)
      throw Error(ErrorKind::Numerical,
                  "phase-space mass drifted beyond tolerance; refine the grid or step");
    if (is_sample_instant(t1)) {
      series.times.push_back(t1);
      series.moments.push_back(moments_from_wigner(grid));
      series.mass.push_back(mass);
    }
    while (next_snap < snaps.size() && t1 >= snaps[next_snap] - 1e-12) {
      series.snapshots.emplace_back(t1, grid);
      ++next_snap;
    }
  }
  return series;
}

}  // namespace vdpsync::wigner
