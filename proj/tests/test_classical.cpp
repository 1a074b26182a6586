#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vdpsync/classical.hpp"

using namespace vdpsync;
using namespace vdpsync::classical;

namespace {

constexpr double kPi = std::numbers::pi;

ClassicalParams paper_params() {
  return ClassicalParams::from_dimensionless(1.0, 0.5, 1.5, 1.05);
}

}  // namespace

TEST_SUITE("classical params") {
  TEST_CASE("dimensionless round trip") {
    const auto p = ClassicalParams::from_dimensionless(1.0, 0.5, 1.5, 1.05);
    CHECK(p.kappa1_scaled() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.kappa2_scaled() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.eps0_scaled() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(p.omega / p.omega0 == doctest::Approx(1.05).epsilon(1e-15));
    CHECK(p.period() == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("invalid parameters rejected") {
    ClassicalParams p = paper_params();
    p.kappa2 = -0.1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = paper_params();
    p.eps0 = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
}

TEST_SUITE("flow derivative") {
  TEST_CASE("origin is a fixed point of the undriven flow") {
    const auto d = vdp_derivative({0.0, 0.0}, 0.0, 0.0, paper_params());
    CHECK(std::abs(d) == 0.0);
  }

  TEST_CASE("gain and loss cancel on the unit circle") {
    const auto p = paper_params();
    const auto d = vdp_derivative({1.0, 0.0}, 0.0, 0.0, p);
    // pure rotation at omega0
    CHECK(d.real() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d.imag() == doctest::Approx(p.omega0).epsilon(1e-14));
  }

  TEST_CASE("direct substitution") {
    const auto p = paper_params();
    const auto d = vdp_derivative({0.5, 0.0}, 0.0, 1.0, p);
    // x*(k1 - 2*k2*|a|^2) = 0.5*(1 - 0.25) and omega0*x - 1/2
    CHECK(d.real() == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(d.imag() == doctest::Approx(kPi - 0.5).epsilon(1e-14));
  }
}

TEST_SUITE("integrate") {
  TEST_CASE("free linear rotation") {
    ClassicalParams p = paper_params();
    p.kappa1 = 1e-300;  // gain must stay positive; make it negligible instead of zero
    p.kappa2 = 1e-300;
    const auto drive = DrivingSignal::sinusoid(0.0, p.omega);
    const double dt = 1e-4;
    const auto traj = integrate({1.0, 0.0}, drive, 1.0, dt, p);
    for (std::size_t i = 0; i < traj.times.size(); i += 100) {
      const double t = traj.times[i];
      CHECK(traj.points[i].x == doctest::Approx(std::cos(p.omega0 * t)).epsilon(1e-8));
      CHECK(traj.points[i].y == doctest::Approx(std::sin(p.omega0 * t)).epsilon(1e-8));
    }
  }

  TEST_CASE("amplitude relaxes to the cycle radius") {
    const auto p = paper_params();
    const auto traj =
        integrate({0.1, 0.0}, DrivingSignal::sinusoid(0.0, p.omega), 20.0, 1e-4, p);
    CHECK(traj.points.back().norm() == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("sudden sinusoid reaches the reference branch position") {
    const auto p = paper_params();
    const auto drive = DrivingSignal::sinusoid(p.eps0, p.omega);
    const auto traj = integrate({0.0, 0.0}, drive, 50.125, 1e-4, p,
                                IntegrateOptions{1e3, 100000});
    CHECK(traj.points.back().x == doctest::Approx(0.29).epsilon(0.04));
    CHECK(std::abs(traj.points.back().x - 0.29) < 0.01);
    CHECK(std::abs(traj.points.back().y - 1.05) < 0.01);
  }

  TEST_CASE("divergence is reported with its time") {
    ClassicalParams p = paper_params();
    p.kappa1 = 80.0;  // strong gain, no loss saturation to speak of
    p.kappa2 = 1e-12;
    try {
      integrate({1.0, 0.0}, DrivingSignal::sinusoid(0.0, p.omega), 10.0, 1e-4, p);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.time > 0.0);
      CHECK(e.time < 10.0);
    }
  }

  TEST_CASE("trajectory time grid is uniform") {
    const auto p = paper_params();
    const auto traj =
        integrate({0.1, 0.0}, DrivingSignal::sinusoid(0.0, p.omega), 0.5, 1e-4, p);
    for (std::size_t i = 1; i < traj.times.size(); ++i)
      CHECK(traj.times[i] - traj.times[i - 1] ==
            doctest::Approx(traj.dt).epsilon(1e-9));
  }
}

TEST_SUITE("branch point") {
  TEST_CASE("reference value") {
    const auto b = find_branch_point(paper_params(), 50.125, 1e-4);
    CHECK(std::abs(b.point.x - 0.29) < 0.01);
    CHECK(std::abs(b.point.y - 1.05) < 0.01);
    CHECK(!b.short_horizon);
  }

  TEST_CASE("undriven orbit lands on the unit cycle") {
    ClassicalParams p = paper_params();
    p.eps0 = 0.0;
    const auto b = find_branch_point(p, 50.125, 1e-4, {0.1, 0.0});
    CHECK(b.point.norm() == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("asymptotic periodicity") {
    const auto p = paper_params();
    const auto b1 = find_branch_point(p, 50.125, 1e-4);
    const auto b2 = find_branch_point(p, 50.125 + 2.0 * kPi / p.omega, 1e-4);
    const double dist = std::hypot(b1.point.x - b2.point.x, b1.point.y - b2.point.y);
    CHECK(dist < 1e-3);
  }

  TEST_CASE("short horizon raises the warning flag") {
    const auto b = find_branch_point(paper_params(), 3.0, 1e-4);
    CHECK(b.short_horizon);
  }
}

TEST_SUITE("polynomial path") {
  TEST_CASE("boundary conditions hold for any gamma") {
    const PathBoundary boundary{0.3, 1.05, 2.14};
    for (double gamma : {-9.35, -1.0, 0.0, 2.5, 100.0}) {
      const auto path = boundary.with_gamma(gamma, 0.25);
      CHECK(path.value(0.0) == doctest::Approx(0.3).epsilon(1e-13));
      CHECK(path.value(0.25) == doctest::Approx(1.05).epsilon(1e-13));
      CHECK(path.derivative(0.25) == doctest::Approx(2.14).epsilon(1e-12));
    }
  }

  TEST_CASE("midpoint value at gamma = 0") {
    const PolynomialPath path{0.0, 1.0, 0.0, 1.0, 0.0};
    CHECK(path.value(0.5) == doctest::Approx(0.75).epsilon(1e-15));
  }
}

TEST_SUITE("slave equation") {
  TEST_CASE("origin stays invariant") {
    const auto xs = solve_slave([](double) { return 0.0; }, 0.0, 1.0, 1e-4, paper_params());
    for (double x : xs) CHECK(x == 0.0);
  }

  TEST_CASE("one-dimensional growth to the fixed amplitude") {
    // with y = 0 the slave equation reduces to xdot = k1 x - 2 k2 x^3
    const auto xs = solve_slave([](double) { return 0.0; }, 0.1, 20.0, 1e-4, paper_params());
    CHECK(xs.back() == doctest::Approx(1.0).epsilon(1e-4));
  }

  TEST_CASE("reference gamma0 lands on the branch x") {
    const auto p = paper_params();
    const auto b = find_branch_point(p, 50.125, 1e-4);
    const PathBoundary boundary{0.0, b.point.y, b.y_slope};
    const auto path = boundary.with_gamma(-9.3532, 0.25);
    const auto xs =
        solve_slave([&](double t) { return path.value(t); }, 0.0, 0.25, 1e-4, p);
    CHECK(std::abs(xs.back() - 0.29) < 0.01);
  }
}

TEST_SUITE("shooting") {
  TEST_CASE("reference gamma0") {
    const auto p = paper_params();
    const auto b = find_branch_point(p, 50.125, 1e-4);
    const PathBoundary boundary{0.0, b.point.y, b.y_slope};
    const double gamma0 = shoot_gamma(0.0, b.point.x, boundary, 0.25, 1e-4, p);
    CHECK(gamma0 == doctest::Approx(-9.3532).epsilon(1e-3));
  }

  TEST_CASE("root at the evaluation point") {
    const auto p = paper_params();
    const PathBoundary boundary{0.0, 1.05, 2.14};
    const auto path = boundary.with_gamma(0.0, 0.25);
    const auto xs =
        solve_slave([&](double t) { return path.value(t); }, 0.0, 0.25, 1e-4, p);
    const double gamma0 = shoot_gamma(0.0, xs.back(), boundary, 0.25, 1e-4, p);
    CHECK(std::abs(gamma0) < 1e-6);
  }

  TEST_CASE("gamma0 is stable under step halving") {
    const auto p = paper_params();
    const auto b = find_branch_point(p, 50.125, 1e-4);
    const PathBoundary boundary{0.0, b.point.y, b.y_slope};
    const double g1 = shoot_gamma(0.0, b.point.x, boundary, 0.25, 2e-4, p);
    const double g2 = shoot_gamma(0.0, b.point.x, boundary, 0.25, 1e-4, p);
    CHECK(std::abs(g1 - g2) < 1e-5);
  }

  TEST_CASE("unreachable target raises NoBracket") {
    const auto p = paper_params();
    const PathBoundary boundary{0.0, 1.05, 2.14};
    ShootOptions opts;
    opts.gamma_max = 1e3;
    CHECK_THROWS_AS(shoot_gamma(0.0, 500.0, boundary, 0.25, 1e-3, p, opts), NoBracketError);
  }
}

TEST_SUITE("driving inversion") {
  TEST_CASE("sinusoidally driven trajectory round-trips") {
    const auto p = paper_params();
    const auto drive = DrivingSignal::sinusoid(p.eps0, p.omega);
    const double dt = 1e-4;
    const auto traj = integrate({0.0, 0.0}, drive, 2.0, dt, p);
    std::vector<double> xs(traj.points.size()), ys(traj.points.size());
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
      xs[i] = traj.points[i].x;
      ys[i] = traj.points[i].y;
    }
    const auto eps = invert_driving(xs, ys, dt, p);
    for (std::size_t i = 0; i < eps.size(); i += 50) {
      const double expected = p.eps0 * std::cos(p.omega * traj.times[i]);
      CHECK(std::abs(eps[i] - expected) < 1e-4 * p.eps0);
    }
  }

  TEST_CASE("resting origin needs no drive") {
    const std::vector<double> zeros(64, 0.0);
    const auto eps = invert_driving(zeros, zeros, 1e-3, paper_params());
    for (double e : eps) CHECK(e == 0.0);
  }

  TEST_CASE("re-integrating the designed transient reaches the branch point") {
    const auto p = paper_params();
    const auto design = design_shortcut(p, {0.0, 0.0}, 0.25, 50.125, 1e-4);
    const auto traj = integrate({0.0, 0.0}, design.driving, 0.25, 1e-4, p);
    const double dist = std::hypot(traj.points.back().x - design.branch.point.x,
                                   traj.points.back().y - design.branch.point.y);
    CHECK(dist < 1e-3);
  }

  TEST_CASE("printed-form extra term shifts the inversion") {
    const auto p = paper_params();
    const PolynomialPath path{0.0, 1.0, 0.5, 0.25, -2.0};
    std::vector<double> xs(101, 0.1);
    const auto plain = invert_driving(xs, path, 2.5e-3, p, false);
    const auto extra = invert_driving(xs, path, 2.5e-3, p, true);
    for (std::size_t i = 0; i < plain.size(); ++i) {
      const double y = path.value(2.5e-3 * static_cast<double>(i));
      CHECK(extra[i] - plain[i] == doctest::Approx(-2.0 * y).epsilon(1e-12));
    }
  }
}

TEST_SUITE("full driving assembly") {
  TEST_CASE("junction equals the reference drive value by construction") {
    const auto p = paper_params();
    const auto design = design_shortcut(p, {0.0, 0.0}, 0.25, 50.125, 1e-4);
    const double expected = p.eps0 * std::cos(p.omega * 50.125);
    CHECK(design.driving.values.back() == doctest::Approx(expected).epsilon(1e-5));
    CHECK(design.driving.junction_mismatch() < 1e-5);
  }

  TEST_CASE("tau equal to t_inf gives zero phase") {
    const auto p = paper_params();
    std::vector<double> ts{0.0, 0.5, 1.0};
    std::vector<double> es{0.0, 0.0, p.eps0 * std::cos(p.omega * 1.0)};
    const auto d = assemble_full_driving(ts, es, p, 1.0, 1.0, 1e-9);
    CHECK(d.phi == 0.0);
  }

  TEST_CASE("continuity violation is rejected") {
    const auto p = paper_params();
    std::vector<double> ts{0.0, 0.5, 1.0};
    std::vector<double> es{0.0, 0.0, 10.0};
    CHECK_THROWS_AS(assemble_full_driving(ts, es, p, 50.0, 1.0, 1e-6),
                    ContinuityViolationError);
  }

  TEST_CASE("post-transient orbit follows the time-shifted reference") {
    const auto p = paper_params();
    const double tau = 0.25, t_inf = 50.125, dt = 1e-4;
    const auto design = design_shortcut(p, {0.0, 0.0}, tau, t_inf, dt);
    const auto driven = integrate({0.0, 0.0}, design.driving, tau + 10.0, dt, p,
                                  IntegrateOptions{1e3, 10});
    const auto reference = integrate(
        {0.0, 0.0}, DrivingSignal::sinusoid(p.eps0, p.omega), t_inf + 10.0, dt, p,
        IntegrateOptions{1e3, 10});
    double worst = 0.0;
    for (std::size_t i = 0; i < driven.times.size(); ++i) {
      const double t = driven.times[i];
      if (t < tau) continue;
      const auto ref = reference.at_time(t + (t_inf - tau));
      worst = std::max(worst, std::hypot(driven.points[i].x - ref.x,
                                         driven.points[i].y - ref.y));
    }
    CHECK(worst < 1e-2);
  }
}

TEST_SUITE("phase difference") {
  TEST_CASE("locked rotation gives zero") {
    const double omega = 2.0 * kPi * 1.05, phi = 0.7;
    ClassicalTrajectory traj;
    traj.dt = 1e-3;
    for (int i = 0; i <= 3000; ++i) {
      const double t = 1e-3 * i;
      traj.times.push_back(t);
      traj.points.push_back({std::cos(omega * t + phi), std::sin(omega * t + phi)});
    }
    const auto s = phase_difference(traj, omega, phi);
    for (double v : s.raw) CHECK(std::abs(v) < 1e-9);
    CHECK(!s.origin_crossing);
  }

  TEST_CASE("static point drifts linearly") {
    const double omega = 2.0;
    ClassicalTrajectory traj;
    traj.dt = 1e-2;
    for (int i = 0; i <= 100; ++i) {
      traj.times.push_back(1e-2 * i);
      traj.points.push_back({1.0, 0.0});
    }
    const auto s = phase_difference(traj, omega, 0.3);
    for (std::size_t i = 0; i < s.times.size(); ++i)
      CHECK(s.raw[i] == doctest::Approx(-omega * s.times[i] - 0.3).epsilon(1e-12));
  }

  TEST_CASE("origin crossing sets the flag") {
    ClassicalTrajectory traj;
    traj.dt = 1.0;
    traj.times = {0.0, 1.0};
    traj.points = {{1.0, 0.0}, {1e-9, 0.0}};
    CHECK(phase_difference(traj, 1.0, 0.0).origin_crossing);
  }

  TEST_CASE("fold maps into a half-open pi interval") {
    ClassicalTrajectory traj;
    traj.dt = 1.0;
    traj.times = {0.0};
    traj.points = {{0.0, 1.0}};
    const auto s = phase_difference(traj, 0.0, 0.0);
    CHECK(s.folded[0] >= -kPi / 2.0);
    CHECK(s.folded[0] < kPi / 2.0);
  }
}

TEST_SUITE("flow invariants") {
  TEST_CASE("point reflection symmetry of the flow") {
    const auto p = paper_params();
    // alpha -> -alpha with eps -> -eps maps the derivative to its negative
    for (double x : {0.3, -0.7, 1.2}) {
      for (double y : {-0.4, 0.0, 0.9}) {
        for (double e : {0.0, 1.5, -2.0}) {
          const auto d1 = vdp_derivative({x, y}, 0.0, e, p);
          const auto d2 = vdp_derivative({-x, -y}, 0.0, -e, p);
          CHECK(std::abs(d1 + d2) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("reflected trajectories coincide step by step") {
    const auto p = paper_params();
    const auto plus = integrate({0.3, -0.2}, DrivingSignal::sinusoid(1.5, p.omega), 1.0,
                                1e-4, p);
    const auto minus = integrate({-0.3, 0.2}, DrivingSignal::sinusoid(-1.5, p.omega), 1.0,
                                 1e-4, p);
    for (std::size_t i = 0; i < plus.points.size(); i += 200) {
      CHECK(std::abs(plus.points[i].x + minus.points[i].x) < 1e-10);
      CHECK(std::abs(plus.points[i].y + minus.points[i].y) < 1e-10);
    }
  }

  TEST_CASE("undriven amplitude law") {
    const auto p = paper_params();
    const double dt = 1e-4;
    const auto traj =
        integrate({0.4, 0.3}, DrivingSignal::sinusoid(0.0, p.omega), 1.0, dt, p);
    for (std::size_t i = 1; i + 1 < traj.points.size(); i += 97) {
      const double r2m = std::pow(traj.points[i - 1].norm(), 2);
      const double r2p = std::pow(traj.points[i + 1].norm(), 2);
      const double r2 = std::pow(traj.points[i].norm(), 2);
      const double fd = (r2p - r2m) / (2.0 * dt);
      const double law = 2.0 * r2 * (p.kappa1 - 2.0 * p.kappa2 * r2);
      CHECK(std::abs(fd - law) < 1e-6);
    }
  }

  TEST_CASE("rk4 is fourth order on a smooth driving") {
    const auto p = paper_params();
    const auto drive = DrivingSignal::sinusoid(p.eps0, p.omega);
    auto endpoint = [&](double dt) {
      const auto t = integrate({0.2, 0.1}, drive, 1.0, dt, p,
                               IntegrateOptions{1e3, 1 << 20});
      return t.points.back();
    };
    const auto a = endpoint(2e-3);
    const auto b = endpoint(1e-3);
    const auto c = endpoint(5e-4);
    const double e1 = std::hypot(a.x - c.x, a.y - c.y);
    const double e2 = std::hypot(b.x - c.x, b.y - c.y);
    // Richardson ratio for order 4 with reference at dt/4: (16 - 1) / ... ~ 16
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 22.0);
  }
}
