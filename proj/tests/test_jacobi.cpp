#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "twistorlab/jacobi.hpp"

using namespace twistorlab;

TEST_CASE("flat geodesic variational solution is (0, t, 1)") {
  const auto field = parse_field("zero", "zero");
  const PhasePoint p({-0.1, 0.2}, 0.4);
  const auto path =
      variational_flow(field, p, vertical_initial_state(), 0.7);
  CHECK(path.end_state.a == doctest::Approx(0.0).scale(1.0));
  CHECK(path.end_state.b == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(path.end_state.c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constant thermostat variational solution matches the closed form") {
  // Strong curvature keeps the orbit circle inside the disk for all T.
  const double lam = 2.5;
  const auto field = parse_field("zero", "const:2.5");
  const PhasePoint p({0.1, -0.1}, 1.0);
  for (double T : {0.4, 0.8, 1.7}) {
    const auto path =
        variational_flow(field, p, vertical_initial_state(), T);
    const auto want = oracles::const_lambda_variational(lam, T);
    CHECK(path.end_state.a == doctest::Approx(want.a).epsilon(1e-10));
    CHECK(path.end_state.b == doctest::Approx(want.b).epsilon(1e-10));
    CHECK(path.end_state.c == doctest::Approx(want.c).epsilon(1e-10));
  }
}

TEST_CASE("variational solution equals finite differences of the flow map") {
  const auto field =
      parse_field("bump:0.4:0.7", "conf:poly:0:0.2:-0.1:0.05:0:0.03");
  const auto& m = field.metric;
  const PhasePoint p({0.15, -0.3}, 1.1);
  const double T = 0.9;
  const auto path = variational_flow(field, p, vertical_initial_state(), T);

  // d/dh of phi_T(x, theta + h) in the chart, then expressed in the frame
  // {F, H, V} at the image: a = <., X>, b = <., H>, c = <., V> - lambda a.
  const double h = 1e-6;
  const PhasePoint up = flow_for_time(field, PhasePoint(p.x, p.theta + h), T);
  const PhasePoint dn = flow_for_time(field, PhasePoint(p.x, p.theta - h), T);
  const Vec3 dphi{(up.x.x - dn.x.x) / (2.0 * h), (up.x.y - dn.x.y) / (2.0 * h),
                  wrap_angle(up.theta - dn.theta) / (2.0 * h)};
  const Vec3 comps = frame_components(m, path.end_phase, dphi);
  const double lam = field.lambda_value(path.end_phase);
  CHECK(path.end_state.a == doctest::Approx(comps[0]).epsilon(2e-4).scale(1.0));
  CHECK(path.end_state.b == doctest::Approx(comps[1]).epsilon(2e-4).scale(1.0));
  CHECK(path.end_state.c ==
        doctest::Approx(comps[2] - lam * comps[0]).epsilon(2e-4).scale(1.0));
}

TEST_CASE("variational flow refuses to cross the boundary") {
  const auto field = parse_field("zero", "zero");
  const PhasePoint p = BoundaryRay(0.3, 1.2).to_phase();
  CHECK_THROWS_AS(
      variational_flow(field, p, vertical_initial_state(), 5.0), Error);
}

TEST_CASE("variational exit agrees with the scattering map") {
  const auto field = parse_field("bump:0.3:0.8", "const:0.2");
  const BoundaryRay ray(0.9, 1.1);
  const auto ve = variational_to_exit(field, ray);
  const auto s = scattering(field, ray);
  REQUIRE(s.status == RayStatus::Ok);
  CHECK(ray_distance(ve.ray_out, s.ray_out) < 1e-9);
  CHECK(ve.tau_tilde == doctest::Approx(s.tau_tilde).epsilon(1e-10));
  // On the flat disk b integrates the chord length.
  const auto flat = variational_to_exit(parse_field("zero", "zero"), ray);
  CHECK(flat.exit_state.b == doctest::Approx(2.0 * std::sin(1.1)).epsilon(1e-10));
  CHECK(flat.exit_state.c == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("flat disk scattering differential has the closed form") {
  // For the chord map beta' = beta + 2 gamma, gamma' = -gamma,
  // tau = 2 sin gamma, the vertical field maps to components
  // f = 2 cos gamma, g = 2 sin gamma, c = 1 at the exit ray.
  const auto field = parse_field("zero", "zero");
  for (double gamma : {0.4, 0.9, kPi / 2.0, 1.3}) {
    CAPTURE(gamma);
    const auto d = d_alpha_of_V(field, {1.7, gamma});
    CHECK(d.tau_tilde == doctest::Approx(2.0 * std::sin(gamma)).epsilon(1e-9));
    CHECK(d.v_tau == doctest::Approx(2.0 * std::cos(gamma)).epsilon(1e-6).scale(1.0));
    CHECK(d.f_variational ==
          doctest::Approx(2.0 * std::cos(gamma)).epsilon(1e-6).scale(1.0));
    CHECK(d.g_variational ==
          doctest::Approx(2.0 * std::sin(gamma)).epsilon(1e-6));
    CHECK(d.c_variational == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.discrepancy < 1e-5);
    // tau has a critical point at normal incidence, where the relative
    // cancellation estimate of the stencil rightly blows up.
    if (gamma != kPi / 2.0) CHECK_FALSE(d.degraded);
  }
}

TEST_CASE("scattering differential routes agree off the flat case") {
  for (const char* lambda : {"zero", "const:0.3"}) {
    CAPTURE(lambda);
    const auto field = parse_field("bump:0.4:0.7", lambda);
    for (double gamma : {0.7, 1.9}) {
      const auto d = d_alpha_of_V(field, {0.5, gamma});
      CHECK(d.discrepancy < 1e-4);
      CHECK_FALSE(d.degraded);
    }
  }
}

TEST_CASE("glancing identity on the flat disk") {
  const auto field = parse_field("zero", "zero");
  const auto g = glancing_identity(field, 0.8);
  CHECK(g.at_zero.pi_lambda == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.at_pi.pi_lambda == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.at_zero.sign == +1);
  CHECK(g.at_pi.sign == -1);
  CHECK(g.at_zero.v_tau == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(g.at_pi.v_tau == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(g.max_residual < 1e-6);
}

TEST_CASE("glancing identity scales with the boundary curvature") {
  // Constant factor: Pi = e^{-c}, so the fiber derivative of tau is
  // +-2 e^{c}.
  const auto field = parse_field("const:0.3", "zero");
  const auto g = glancing_identity(field, 2.1);
  CHECK(g.at_zero.pi_lambda == doctest::Approx(std::exp(-0.3)).epsilon(1e-9));
  CHECK(g.at_zero.v_tau == doctest::Approx(2.0 * std::exp(0.3)).epsilon(1e-5));
  CHECK(g.max_residual < 1e-4);
}

TEST_CASE("glancing identity holds for thermostats") {
  const auto field = parse_field("zero", "const:0.5");
  const auto g = glancing_identity(field, 1.3);
  CHECK(g.max_residual < 1e-2);
  // lambda enters the two branches with opposite orientation.
  CHECK(g.at_zero.pi_lambda != doctest::Approx(g.at_pi.pi_lambda));
}

TEST_CASE("glancing identity rejects non convex boundaries") {
  // sigma = 2x: the curvature e^{-2 cos beta} (1 + 2 cos beta) turns
  // negative where cos beta < -1/2, so the boundary is concave at beta = pi.
  const auto field = parse_field("linreal:2", "zero");
  CHECK_THROWS_AS(glancing_identity(field, kPi), ConvexityViolated);
}

TEST_CASE("conjugate point scan declares the flat disk simple") {
  const auto scan = conjugate_point_scan(ConformalMetric::parse("zero"), 32);
  CHECK(scan.simple);
  CHECK(scan.n_rays == 32);
  CHECK(scan.conjugate_count == 0);
  CHECK(scan.trapped_count == 0);
  CHECK(scan.min_exit_b > 0.0);
  CHECK(scan.min_interior_b > 0.0);
}

TEST_CASE("conjugate point scan detects focusing curvature") {
  // sigma = -2 r^2: K = 8 e^{4 r^2} >= 8 while a diameter has length
  // int_{-1}^{1} e^{-2 t^2} dt = 1.1963... > pi / sqrt(8), so a conjugate
  // point is guaranteed on some scanned orbit.
  const auto m = ConformalMetric::parse("poly:0:0:0:-2:0:-2");
  const auto scan = conjugate_point_scan(m, 24, 50.0);
  CHECK_FALSE(scan.simple);
  CHECK(scan.conjugate_count + scan.trapped_count > 0);
}
