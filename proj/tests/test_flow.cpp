#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "twistorlab/flow.hpp"

using namespace twistorlab;

TEST_CASE("constant thermostat orbits on the flat disk are exact circles") {
  // lambda = 2.5 gives a circle of radius 0.4 that stays well inside the
  // disk from this start; smaller lambda would sweep the orbit out of it.
  const auto field = parse_field("zero", "const:2.5");
  const PhasePoint p({0.1, -0.2}, 0.9);
  for (double t : {0.3, 0.7, 1.9, -1.1}) {
    const PhasePoint got = flow_for_time(field, p, t);
    const PhasePoint want = oracles::const_lambda_orbit(p.x, p.theta, 2.5, t);
    CHECK(got.x.x == doctest::Approx(want.x.x).epsilon(1e-10).scale(1.0));
    CHECK(got.x.y == doctest::Approx(want.x.y).epsilon(1e-10).scale(1.0));
    CHECK(wrap_angle(got.theta - want.theta) ==
          doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("flow is reversible") {
  const auto field = parse_field("bump:0.5:0.6", "const:0.3");
  const PhasePoint p({-0.3, 0.25}, 2.1);
  const PhasePoint q = flow_for_time(field, p, 0.6);
  const PhasePoint back = flow_for_time(field, q, -0.6);
  CHECK((back.x - p.x).norm() < 1e-9);
  CHECK(std::abs(wrap_angle(back.theta - p.theta)) < 1e-9);
}

TEST_CASE("flat disk scattering follows the chord") {
  const auto field = parse_field("zero", "zero");
  for (double beta : {0.0, 0.8, 3.9}) {
    for (double gamma : {0.3, 1.1, kPi / 2.0, 2.7}) {
      CAPTURE(beta);
      CAPTURE(gamma);
      const auto s = scattering(field, {beta, gamma});
      REQUIRE(s.status == RayStatus::Ok);
      const auto want = oracles::chord_exit(beta, gamma);
      CHECK(ray_distance(s.ray_out, {want.beta_out, want.gamma_out}) < 1e-9);
      CHECK(s.tau_tilde == doctest::Approx(want.tau).epsilon(1e-9));
    }
  }
}

TEST_CASE("outward rays scatter backward with negative travel time") {
  const auto field = parse_field("bump:0.4:0.7", "const:0.2");
  const BoundaryRay in(1.3, 0.9);
  const auto fwd = scattering(field, in);
  REQUIRE(fwd.status == RayStatus::Ok);
  REQUIRE(fwd.ray_out.outward());
  const auto bwd = scattering(field, fwd.ray_out);
  REQUIRE(bwd.status == RayStatus::Ok);
  CHECK(ray_distance(bwd.ray_out, in) < 1e-7);
  CHECK(bwd.tau_tilde == doctest::Approx(-fwd.tau_tilde).epsilon(1e-7));
}

TEST_CASE("glancing rays are fixed points with zero travel time") {
  const auto field = parse_field("zero", "zero");
  for (double gamma : {0.0, 1e-9, kPi - 1e-9, kPi}) {
    const auto s = scattering(field, {0.7, gamma});
    CHECK(s.status == RayStatus::Glancing);
    CHECK(s.tau_tilde == 0.0);
    CHECK(ray_distance(s.ray_out, {0.7, gamma}) == 0.0);
  }
  // Just outside the protective band the orbit integrates as usual.
  CHECK(scattering(field, {0.7, 1e-4}).status == RayStatus::Ok);
}

TEST_CASE("starting tangent to the boundary is rejected") {
  const auto field = parse_field("zero", "zero");
  const PhasePoint tangent = BoundaryRay(0.4, 0.0).to_phase();
  CHECK_THROWS_AS(integrate_orbit(field, tangent, 1.0), NonTransversalExit);
}

TEST_CASE("orbits circling inside the disk never exit") {
  // lambda = 5 from the center: a circle of radius 0.2 well inside.
  const auto field = parse_field("zero", "const:5");
  const auto traj = integrate_orbit(field, PhasePoint({0.0, 0.0}, 0.0), 10.0);
  CHECK_FALSE(traj.exit.has_value());
  CHECK(traj.end_time == doctest::Approx(10.0));
  // The scattering map reports a ray as trapped once tmax is exhausted.
  const auto s = scattering(parse_field("zero", "zero"), {0.0, kPi / 2.0}, 0.5);
  CHECK(s.status == RayStatus::Trapped);
}

TEST_CASE("recorded trajectories are monotone and exit on the circle") {
  const auto field = parse_field("bump:0.3:0.8", "zero");
  IntegrateOptions opt;
  opt.record = true;
  const auto traj =
      integrate_orbit(field, BoundaryRay(0.3, 1.2).to_phase(), 1e3, +1, opt);
  REQUIRE(traj.exit.has_value());
  CHECK(traj.exit->phase.x.norm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(traj.exit->ray.outward());
  REQUIRE(traj.times.size() == traj.states.size());
  REQUIRE(traj.times.size() > 2);
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    CHECK(traj.times[i] > traj.times[i - 1]);
  }
  IntegrateOptions quiet;
  quiet.record = false;
  const auto bare =
      integrate_orbit(field, BoundaryRay(0.3, 1.2).to_phase(), 1e3, +1, quiet);
  CHECK(bare.times.empty());
  REQUIRE(bare.exit.has_value());
  CHECK(bare.exit->time == doctest::Approx(traj.exit->time).epsilon(1e-12));
}

TEST_CASE("scattering tables sample strictly inward rays row major") {
  const auto field = parse_field("zero", "zero");
  const auto table = scattering_table(field, 4, 3);
  REQUIRE(table.n_beta == 4);
  REQUIRE(table.n_gamma == 3);
  REQUIRE(table.entries.size() == 12);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto& e = table.entries[static_cast<std::size_t>(i * 3 + j)];
      CHECK(e.ray_in.beta == doctest::Approx(kTwoPi * i / 4.0));
      CHECK(e.ray_in.gamma == doctest::Approx(kPi * (j + 1) / 4.0));
      CHECK(e.ray_in.inward());
      CHECK(e.status == RayStatus::Ok);
    }
  }
}

TEST_CASE("scattering tables round trip through CSV") {
  const auto field = parse_field("linreal:0.2", "const:0.3");
  const auto table = scattering_table(field, 3, 2);
  std::stringstream ss;
  table.write_csv(ss);
  const auto back = ScatteringTable::read_csv(ss);
  REQUIRE(back.n_beta == table.n_beta);
  REQUIRE(back.n_gamma == table.n_gamma);
  REQUIRE(back.entries.size() == table.entries.size());
  for (std::size_t k = 0; k < table.entries.size(); ++k) {
    CHECK(back.entries[k].ray_in.beta ==
          doctest::Approx(table.entries[k].ray_in.beta).epsilon(1e-15));
    CHECK(back.entries[k].ray_out.gamma ==
          doctest::Approx(table.entries[k].ray_out.gamma).epsilon(1e-15));
    CHECK(back.entries[k].tau_tilde ==
          doctest::Approx(table.entries[k].tau_tilde).epsilon(1e-15));
    CHECK(back.entries[k].status == table.entries[k].status);
  }
}

TEST_CASE("ray status strings round trip") {
  for (auto s : {RayStatus::Ok, RayStatus::Glancing, RayStatus::Trapped,
                 RayStatus::NonTransversal, RayStatus::Failed}) {
    CHECK(ray_status_from_string(to_string(s)) == s);
  }
  CHECK_THROWS_AS(ray_status_from_string("bogus"), Error);
}

TEST_CASE("lambda presets parse, print and evaluate") {
  CHECK(LambdaPreset::parse("zero").is_zero());
  const auto cspec = LambdaPreset::parse("const:0.3").spec();
  const auto m0 = ConformalMetric::parse("zero");
  CHECK(LambdaPreset::parse(cspec).value(m0, {0.0, 0.0}, 0.0) ==
        doctest::Approx(0.3).epsilon(1e-16));
  CHECK_THROWS_AS(LambdaPreset::parse("wiggle:1"), SpecParseError);
  CHECK_THROWS_AS(LambdaPreset::parse("conf:wiggle"), SpecParseError);
  CHECK_THROWS_AS(LambdaPreset::zero().conformal_factor(), Error);

  // conf preset: lambda = d sigma'(v_perp) with v the g-unit vector.
  const auto base = ConformalMetric::parse("bump:0.4:0.7");
  const auto fac = ConformalFactor::parse("linreal:0.3");
  const auto lam = LambdaPreset::from_conformal_factor(fac);
  const auto round = LambdaPreset::parse(lam.spec());
  for (const Vec2 x : {Vec2{0.2, -0.3}, Vec2{-0.5, 0.1}}) {
    for (double th : {0.0, 1.2, 4.0}) {
      const Vec2 vperp = base.unit_vector(x, th).perp();
      const double want = dot(fac.gradient(x), vperp);
      CHECK(lam.value(base, x, th) ==
            doctest::Approx(want).epsilon(1e-13).scale(1.0));
      CHECK(round.value(base, x, th) ==
            doctest::Approx(want).epsilon(1e-13).scale(1.0));
      // First derivatives against finite differences of value().
      const double dth = oracles::deriv(
          [&](double h) { return lam.value(base, x, th + h); });
      CHECK(lam.dtheta(base, x, th) ==
            doctest::Approx(dth).epsilon(1e-8).scale(1.0));
      const Vec2 gx = lam.grad_x(base, x, th);
      CHECK(gx.x == doctest::Approx(oracles::deriv([&](double h) {
                      return lam.value(base, {x.x + h, x.y}, th);
                    })).epsilon(1e-8).scale(1.0));
      CHECK(gx.y == doctest::Approx(oracles::deriv([&](double h) {
                      return lam.value(base, {x.x, x.y + h}, th);
                    })).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("thermostat curvature datum reduces to lambda^2 on the flat disk") {
  const auto field = parse_field("zero", "const:0.7");
  const PhasePoint p({0.2, 0.4}, 1.0);
  CHECK(field.lambda_V(p) == doctest::Approx(0.0).scale(1.0));
  CHECK(field.lambda_H(p) == doctest::Approx(0.0).scale(1.0));
  CHECK(field.kappa(p) == doctest::Approx(0.49));
}

TEST_CASE("thermostat frame derivatives match finite differences") {
  const auto field =
      parse_field("bump:0.4:0.7", "conf:poly:0:0.2:-0.1:0.05:0:0.03");
  const auto& m = field.metric;
  const PhasePoint p({0.25, -0.35}, 0.7);
  const auto fr = frame_vectors(m, p);
  auto lam_at = [&](const Vec3& dir, double h) {
    return field.lambda.value(m, {p.x.x + h * dir[0], p.x.y + h * dir[1]},
                              p.theta + h * dir[2]);
  };
  const double fdV =
      oracles::deriv([&](double h) { return lam_at(fr.V, h); });
  const double fdH =
      oracles::deriv([&](double h) { return lam_at(fr.H, h); });
  CHECK(field.lambda_V(p) == doctest::Approx(fdV).epsilon(1e-8).scale(1.0));
  CHECK(field.lambda_H(p) == doctest::Approx(fdH).epsilon(1e-8).scale(1.0));
  const double want_kappa =
      m.curvature(p.x) - fdH + sqr(field.lambda_value(p));
  CHECK(field.kappa(p) == doctest::Approx(want_kappa).epsilon(1e-8));
}

TEST_CASE("tau presets and the time change residuals") {
  CHECK(TauPreset::parse("zero").is_zero());
  const auto tau = TauPreset::parse("radquad:0.08");
  CHECK_FALSE(tau.is_zero());
  CHECK(TauPreset::parse(tau.spec()).value(PhasePoint({0.3, 0.4}, 0.0)) ==
        doctest::Approx(0.08 * (1.0 - 0.25)));
  CHECK_THROWS_AS(TauPreset::parse("cubic:1"), SpecParseError);

  const auto m = ConformalMetric::parse("bump:0.3:0.8");
  const PhasePoint p({0.3, -0.2}, 0.9);
  // X(tau) only sees the base motion xdot = e^{-sigma} e^{i theta}.
  const Vec2 xdot = m.unit_vector(p.x, p.theta);
  const double fd = oracles::deriv([&](double h) {
    return tau.value(PhasePoint(p.x + h * xdot, p.theta));
  });
  CHECK(tau.along_X(m, p) == doctest::Approx(fd).epsilon(1e-9).scale(1.0));

  const auto trivial = time_change_check(m, TauPreset::zero(), p);
  CHECK(std::abs(trivial.x_residual) < 1e-8);
  CHECK(std::abs(trivial.extension_defect) < 1e-8);

  const auto moved = time_change_check(m, tau, p);
  CHECK(std::abs(moved.x_residual) < 1e-5);
  CHECK(std::abs(moved.extension_defect) > 1e-3);
}
