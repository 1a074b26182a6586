#include "vdpsync/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace vdpsync::lindblad {

ControlSchedule ControlSchedule::constant(double eps1, double eps2) {
  ControlSchedule s;
  s.tau = 0.0;
  s.tail_eps1 = eps1;
  s.tail_eps2 = eps2;
  return s;
}

void ControlSchedule::validate() const {
  double prev_end = 0.0;
  for (const auto& seg : segments) {
    if (seg.times.size() != seg.eps1.size() || seg.times.size() != seg.eps2.size())
      throw ConfigError("control segment sample arrays differ in length");
    if (seg.times.size() < 2) throw ConfigError("control segment needs at least two samples");
    for (std::size_t i = 1; i < seg.times.size(); ++i)
      if (!(seg.times[i] > seg.times[i - 1]))
        throw ConfigError("control sample times must increase strictly");
    if (std::abs(seg.times.front() - prev_end) > 1e-12 * std::max(1.0, tau))
      throw ConfigError("control segments must be contiguous from t = 0");
    prev_end = seg.times.back();
  }
  if (!segments.empty() && std::abs(prev_end - tau) > 1e-12 * std::max(1.0, tau))
    throw ConfigError("control segments must end at tau");
}

int ControlSchedule::segment_index(double t) const {
  if (segments.empty() || t > tau) return -1;
  // later segment wins at a shared boundary
  for (int i = static_cast<int>(segments.size()) - 1; i >= 0; --i)
    if (t >= segments[static_cast<std::size_t>(i)].times.front()) return i;
  return 0;
}

std::pair<double, double> ControlSchedule::eval_in(int seg_idx, double t) const {
  if (seg_idx < 0) return {tail_eps1, tail_eps2};
  const ControlSegment& s = segments[static_cast<std::size_t>(seg_idx)];
  if (t <= s.times.front()) return {s.eps1.front(), s.eps2.front()};
  if (t >= s.times.back()) return {s.eps1.back(), s.eps2.back()};
  const auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - s.times.begin());
  const std::size_t lo = hi - 1;
  const double f = (t - s.times[lo]) / (s.times[hi] - s.times[lo]);
  return {s.eps1[lo] + f * (s.eps1[hi] - s.eps1[lo]), s.eps2[lo] + f * (s.eps2[hi] - s.eps2[lo])};
}

std::pair<double, double> ControlSchedule::eval(double t) const {
  return eval_in(segment_index(t), t);
}

std::vector<double> ControlSchedule::breakpoints() const {
  std::vector<double> b;
  for (const auto& seg : segments) b.push_back(seg.times.front());
  b.push_back(tau);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

Matrix dissipator(const Matrix& op, const Matrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols())
    throw ConfigError("dissipator: dimension mismatch");
  const Matrix od = op.adjoint();
  const Matrix odo = od * op;
  return 2.0 * op * rho * od - odo * rho - rho * odo;
}

LindbladEngine::LindbladEngine(const QuantumParams& p) : params_(p) { p.validate(); }

Matrix LindbladEngine::rhs(const Matrix& rho, double eps1, double eps2) const {
  const int n = params_.dim;
  Matrix out(n, n);
  const double delta = params_.delta;
  const double k1 = params_.kappa1;
  const double k2 = params_.kappa2;
  const double he1 = 0.5 * eps1;
  const double he2 = 0.5 * eps2;

  // fused stencil of the superoperator; ladder weights and truncated-product
  // diagonals: d1 = diag(a a^dag) vanishes in the corner, d2 = diag(a^dag2 a^2)
  auto sq = [](int k) { return std::sqrt(static_cast<double>(k)); };
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      const Complex rc = rho(r, c);
      // -i*delta*[N, rho]
      Complex v = Complex(0.0, -delta * (r - c)) * rc;
      // -i*(he1*(a + ad) + i*he2*(a - ad)) rho  + i*rho*(...)
      const Complex up_r = (r + 1 < n) ? rho(r + 1, c) : Complex(0.0);
      const Complex dn_r = (r > 0) ? rho(r - 1, c) : Complex(0.0);
      const Complex up_c = (c + 1 < n) ? rho(r, c + 1) : Complex(0.0);
      const Complex dn_c = (c > 0) ? rho(r, c - 1) : Complex(0.0);
      const double wr_up = (r + 1 < n) ? sq(r + 1) : 0.0;
      const double wr_dn = (r > 0) ? sq(r) : 0.0;
      const double wc_up = (c + 1 < n) ? sq(c + 1) : 0.0;
      const double wc_dn = (c > 0) ? sq(c) : 0.0;
      // (a rho)[r,c] = wr_up*rho[r+1,c], (ad rho)[r,c] = wr_dn*rho[r-1,c]
      // (rho a)[r,c] = wc_dn*rho[r,c-1], (rho ad)[r,c] = wc_up*rho[r,c+1]
      const Complex h_rho = he1 * (wr_up * up_r + wr_dn * dn_r) +
                            Complex(0.0, he2) * (wr_up * up_r - wr_dn * dn_r);
      const Complex rho_h = he1 * (wc_dn * dn_c + wc_up * up_c) +
                            Complex(0.0, he2) * (wc_dn * dn_c - wc_up * up_c);
      v += Complex(0.0, -1.0) * (h_rho - rho_h);
      // gain: 2 ad rho a - {a ad, rho}
      const double d1r = (r + 1 < n) ? static_cast<double>(r + 1) : 0.0;
      const double d1c = (c + 1 < n) ? static_cast<double>(c + 1) : 0.0;
      Complex gain = -(d1r + d1c) * rc;
      if (r > 0 && c > 0) gain += 2.0 * sq(r) * sq(c) * rho(r - 1, c - 1);
      v += k1 * gain;
      // two-photon loss: 2 a2 rho ad2 - {ad2 a2, rho}
      const double d2r = static_cast<double>(r) * (r - 1);
      const double d2c = static_cast<double>(c) * (c - 1);
      Complex loss = -(d2r + d2c) * rc;
      if (r + 2 < n && c + 2 < n)
        loss += 2.0 * sq((r + 1) * (r + 2)) * sq((c + 1) * (c + 2)) * rho(r + 2, c + 2);
      v += k2 * loss;
      out(r, c) = v;
    }
  }
  return out;
}

Matrix master_rhs(const Matrix& rho, double t, const ControlSchedule& schedule,
                  const QuantumParams& p) {
  const auto [e1, e2] = schedule.eval(t);
  return LindbladEngine(p).rhs(rho, e1, e2);
}

namespace {

// Fast observables off the banded structure.
MomentSet quick_moments(const Matrix& rho, const Matrix& s3) {
  const int n = static_cast<int>(rho.rows());
  MomentSet m;
  Complex mean = 0.0, third = 0.0;
  double phonon = 0.0;
  for (int r = 1; r < n; ++r) {
    mean += std::sqrt(static_cast<double>(r)) * rho(r, r - 1);
    third += s3(r - 1, r) * rho(r, r - 1);
  }
  for (int r = 0; r < n; ++r) phonon += static_cast<double>(r) * rho(r, r).real();
  m.mean = mean;
  m.third = third;
  m.phonon = phonon;
  return m;
}

struct StepperGuards {
  const PropagateOptions* opts;
  PropagationStats* stats;

  void enforce(const Matrix& rho, double t, long step) const {
    if (!rho.allFinite() || rho.cwiseAbs().maxCoeff() > opts->blowup_guard) {
      throw DivergenceError(t, "quantum propagation diverged at t = " + std::to_string(t));
    }
    if (opts->guard_stride > 0 && step % opts->guard_stride == 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
      const double mineig = es.eigenvalues().minCoeff();
      stats->min_eigenvalue_seen = std::min(stats->min_eigenvalue_seen, mineig);
      if (mineig < opts->positivity_floor) {
        std::ostringstream os;
        os << "positivity lost at t = " << t << " (min eigenvalue " << mineig
           << "); reduce dt or enlarge the truncation";
        throw PositivityLossError(t, os.str());
      }
      const int n = static_cast<int>(rho.rows());
      const int band = std::max(1, static_cast<int>(std::ceil(0.1 * n)));
      double pop = 0.0;
      for (int k = n - band; k < n; ++k) pop += rho(k, k).real();
      if (pop > opts->truncation_guard) {
        std::ostringstream os;
        os << "population " << pop << " reached the top Fock levels at t = " << t;
        throw TruncationOverflowError(t, os.str());
      }
    }
  }
};

// RK4 over [t0, t1] with steps aligned to control breakpoints; invokes
// on_step(t_new, rho, global_step) after every step.
template <typename StepFn>
void propagate_spans(const LindbladEngine& engine, Matrix& rho, const ControlSchedule& schedule,
                     double t0, double t1, const PropagateOptions& opts, PropagationStats& stats,
                     long& global_step, StepFn&& on_step) {
  std::vector<double> edges;
  edges.push_back(t0);
  for (double b : schedule.breakpoints())
    if (b > t0 + 1e-15 && b < t1 - 1e-15) edges.push_back(b);
  edges.push_back(t1);
  std::sort(edges.begin(), edges.end());

  StepperGuards guards{&opts, &stats};
  Matrix k1m, k2m, k3m, k4m, tmp;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s], b = edges[s + 1];
    const double span = b - a;
    if (span <= 0.0) continue;
    const long nsteps = std::max<long>(1, std::lround(span / opts.dt));
    const double h = span / static_cast<double>(nsteps);
    const int seg = schedule.segment_index(0.5 * (a + b));
    for (long i = 0; i < nsteps; ++i) {
      const double t = a + static_cast<double>(i) * h;
      const auto [e1a, e2a] = schedule.eval_in(seg, t);
      const auto [e1b, e2b] = schedule.eval_in(seg, t + 0.5 * h);
      const auto [e1c, e2c] = schedule.eval_in(seg, t + h);
      k1m = engine.rhs(rho, e1a, e2a);
      tmp = rho + (0.5 * h) * k1m;
      k2m = engine.rhs(tmp, e1b, e2b);
      tmp = rho + (0.5 * h) * k2m;
      k3m = engine.rhs(tmp, e1b, e2b);
      tmp = rho + h * k3m;
      k4m = engine.rhs(tmp, e1c, e2c);
      rho += (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
      // re-hermitize and renormalize, tracking the applied corrections
      const double herm = 0.5 * (rho - rho.adjoint()).cwiseAbs().maxCoeff();
      rho = 0.5 * (rho + rho.adjoint()).eval();
      const double tr = rho.trace().real();
      stats.cumulative_trace_correction += std::abs(tr - 1.0);
      stats.cumulative_hermiticity_correction += herm;
      rho /= tr;
      ++global_step;
      const double t_new = (i + 1 == nsteps) ? b : a + static_cast<double>(i + 1) * h;
      guards.enforce(rho, t_new, global_step);
      on_step(t_new, rho);
    }
  }
}

}  // namespace

QuantumTrajectory propagate(const DensityMatrix& rho0, const ControlSchedule& schedule,
                            double t_end, const QuantumParams& p, const PropagateOptions& opts,
                            std::span<const double> snapshot_times,
                            const DensityMatrix* distance_ref) {
  if (!(opts.dt > 0.0)) throw ConfigError("propagate: dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("propagate: horizon must be positive");
  schedule.validate();
  LindbladEngine engine(p);
  const Matrix s3 = fock::weyl_third_moment_operator(p.dim);

  QuantumTrajectory traj;
  Matrix rho = rho0.m;
  traj.times.push_back(0.0);
  traj.observables.push_back(quick_moments(rho, s3));
  if (distance_ref != nullptr)
    traj.trace_dist.push_back(trace_distance(rho0, *distance_ref));

  std::vector<double> snaps(snapshot_times.begin(), snapshot_times.end());
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
    traj.snapshots.emplace_back(0.0, DensityMatrix{rho});
    ++next_snap;
  }

  long step = 0;
  const int stride = std::max(1, opts.observable_stride);
  propagate_spans(engine, rho, schedule, 0.0, t_end, opts, traj.stats, step,
                  [&](double t, const Matrix& r) {
                    if (step % stride == 0 || t == t_end) {
                      traj.times.push_back(t);
                      traj.observables.push_back(quick_moments(r, s3));
                      if (distance_ref != nullptr)
                        traj.trace_dist.push_back(trace_distance(DensityMatrix{r}, *distance_ref));
                    }
                    while (next_snap < snaps.size() && t >= snaps[next_snap] - 1e-12) {
                      traj.snapshots.emplace_back(t, DensityMatrix{r});
                      ++next_snap;
                    }
                  });
  return traj;
}

DensityMatrix propagate_between(const DensityMatrix& rho0, const ControlSchedule& schedule,
                                double t0, double t1, const QuantumParams& p,
                                const PropagateOptions& opts, PropagationStats* stats) {
  if (!(t1 > t0)) throw ConfigError("propagate_between: need t1 > t0");
  LindbladEngine engine(p);
  Matrix rho = rho0.m;
  PropagationStats local;
  PropagationStats& st = stats != nullptr ? *stats : local;
  long step = 0;
  propagate_spans(engine, rho, schedule, t0, t1, opts, st, step, [](double, const Matrix&) {});
  return DensityMatrix{std::move(rho)};
}

DensityMatrix steady_state(double eps1, double eps2, const QuantumParams& p,
                           const SteadyStateOptions& opts, const DensityMatrix* seed) {
  p.validate();
  LindbladEngine engine(p);
  Matrix rho;
  if (seed != nullptr) {
    rho = seed->m;
  } else {
    rho = Matrix::Zero(p.dim, p.dim);
    rho(0, 0) = 1.0;
  }
  const ControlSchedule schedule = ControlSchedule::constant(eps1, eps2);
  PropagateOptions popts;
  popts.dt = opts.dt;
  PropagationStats stats;
  long step = 0;

  double t = 0.0;
  while (t < opts.t_max) {
    const double t1 = std::min(opts.t_max, t + opts.check_interval);
    propagate_spans(engine, rho, schedule, t, t1, popts, stats, step, [](double, const Matrix&) {});
    t = t1;
    const double resid = engine.rhs(rho, eps1, eps2).norm();
    if (resid < opts.tol) return DensityMatrix{rho};
  }
  std::ostringstream os;
  os << "steady state not reached by t = " << opts.t_max << " (residual "
     << engine.rhs(rho, eps1, eps2).norm() << ", tol " << opts.tol << ")";
  throw NotConvergedError(os.str());
}

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) throw ConfigError("trace_distance: dimension mismatch");
  const Matrix d = 0.5 * ((rho1.m - rho2.m) + (rho1.m - rho2.m).adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

DistanceCurve trace_distance_curve(const ControlSchedule& schedule, const QuantumParams& p,
                                   const DensityMatrix& rho0, const DensityMatrix& rho_ref,
                                   double horizon, double sample_dt,
                                   const PropagateOptions& opts) {
  if (!(sample_dt > 0.0)) throw ConfigError("trace_distance_curve: sample_dt must be positive");
  schedule.validate();
  LindbladEngine engine(p);
  Matrix rho = rho0.m;
  DistanceCurve curve;
  curve.times.push_back(0.0);
  curve.values.push_back(trace_distance(rho0, rho_ref));

  PropagationStats stats;
  long step = 0;
  const long nsamples = std::lround(horizon / sample_dt);
  for (long k = 0; k < nsamples; ++k) {
    const double t0 = static_cast<double>(k) * sample_dt;
    const double t1 = std::min(horizon, static_cast<double>(k + 1) * sample_dt);
    propagate_spans(engine, rho, schedule, t0, t1, opts, stats, step, [](double, const Matrix&) {});
    curve.times.push_back(t1);
    curve.values.push_back(trace_distance(DensityMatrix{rho}, rho_ref));
  }
  return curve;
}

double crossing_time(const DistanceCurve& curve, double threshold) {
  if (curve.values.empty()) throw ConfigError("crossing_time: empty curve");
  std::ptrdiff_t last_above = -1;
  for (std::size_t i = 0; i < curve.values.size(); ++i)
    if (curve.values[i] >= threshold) last_above = static_cast<std::ptrdiff_t>(i);
  if (last_above < 0) return curve.times.front();  // below threshold from the start
  const std::size_t k = static_cast<std::size_t>(last_above);
  if (k + 1 >= curve.values.size()) {
    std::ostringstream os;
    os << "trace distance still " << curve.values.back() << " >= " << threshold
       << " at the horizon end";
    throw NeverCrossesError(os.str());
  }
  const double v0 = curve.values[k], v1 = curve.values[k + 1];
  const double f = (v0 - threshold) / (v0 - v1);
  return curve.times[k] + f * (curve.times[k + 1] - curve.times[k]);
}

}  // namespace vdpsync::lindblad
