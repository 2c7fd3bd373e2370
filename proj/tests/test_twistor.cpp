#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "twistorlab/twistor.hpp"

using namespace twistorlab;

namespace {

// Central difference Jacobian of a map in the four real chart coordinates.
Mat4 fd_jacobian(const TwistorMap& map, const TwistorPoint& p,
                 double h = 1e-6) {
  auto coords = [](const TwistorPoint& q) {
    return std::array<double, 4>{q.z.real(), q.z.imag(), q.mu.real(),
                                 q.mu.imag()};
  };
  auto from = [](const std::array<double, 4>& c) {
    return TwistorPoint({c[0], c[1]}, {c[2], c[3]});
  };
  Mat4 jac{};
  const auto base = coords(p);
  for (std::size_t j = 0; j < 4; ++j) {
    auto up = base;
    auto dn = base;
    up[j] += h;
    dn[j] -= h;
    const auto fu = coords(map.apply(from(up)));
    const auto fd = coords(map.apply(from(dn)));
    for (std::size_t i = 0; i < 4; ++i) {
      jac[i][j] = (fu[i] - fd[i]) / (2.0 * h);
    }
  }
  return jac;
}

const std::vector<TwistorPoint> kPoints = {
    TwistorPoint({0.3, -0.2}, {0.1, 0.25}),
    TwistorPoint({-1.1, 0.7}, {0.0, 0.0}),
    TwistorPoint({0.5, 0.5}, {-0.4, 0.3}),
};

}  // namespace

TEST_CASE("twistor points live over the closed fiber disk") {
  CHECK_THROWS_AS(TwistorPoint({0.0, 0.0}, {1.2, 0.0}), Error);
  CHECK(TwistorPoint({0.0, 0.0}, {1.0, 0.0}).on_sm());
  CHECK_FALSE(TwistorPoint({0.0, 0.0}, {0.5, 0.0}).on_sm());
  const PhasePoint p({0.3, -0.1}, 0.9);
  const TwistorPoint t = twistor_of_phase(p);
  CHECK(t.on_sm());
  CHECK(t.z.real() == doctest::Approx(0.3));
  CHECK(std::arg(t.mu) == doctest::Approx(0.9));
}

TEST_CASE("antiholomorphic frame components") {
  const Complex mu{0.3, 0.1};
  const auto f = dbar_frame(TwistorPoint({0.2, 0.4}, mu));
  const Complex mu2 = mu * mu;
  CHECK(std::abs(f.w1[0] - 0.5 * (1.0 + mu2)) < 1e-15);
  CHECK(std::abs(f.w1[1] - Complex{0.0, 0.5} * (1.0 - mu2)) < 1e-15);
  CHECK(std::abs(f.w1[2]) == 0.0);
  CHECK(std::abs(f.w1[3]) == 0.0);
  CHECK(std::abs(f.w2[2] - Complex{0.5, 0.0}) < 1e-15);
  CHECK(std::abs(f.w2[3] - Complex{0.0, 0.5}) < 1e-15);
}

TEST_CASE("the frame degenerates exactly on the circle bundle") {
  CHECK(dbar_intersection_rank(TwistorPoint({0.4, 0.1}, {0.0, 0.0})) == 0);
  CHECK(dbar_intersection_rank(TwistorPoint({0.4, 0.1}, {0.5, -0.3})) == 0);
  CHECK(dbar_intersection_rank(
            TwistorPoint({0.4, 0.1}, std::polar(1.0, 0.7))) == 1);
  CHECK(dbar_intersection_rank(
            TwistorPoint({-0.2, 0.9}, std::polar(0.999, 2.1))) == 0);
}

TEST_CASE("atom values follow their defining formulas") {
  const TwistorPoint p({0.3, -0.2}, {0.1, 0.25});
  const Complex z = p.z;
  const Complex mu = p.mu;

  const auto rot = TwistorMap::rotation(0.9).apply(p);
  CHECK(std::abs(rot.z - std::polar(1.0, 0.9) * z) < 1e-15);
  CHECK(std::abs(rot.mu - std::polar(1.0, 0.9) * mu) < 1e-15);

  const auto tr = TwistorMap::translation({0.5, -0.1}).apply(p);
  CHECK(std::abs(tr.z - (z + Complex{0.5, -0.1})) < 1e-15);
  CHECK(std::abs(tr.mu - mu) == 0.0);

  const auto anti = TwistorMap::antipodal().apply(p);
  CHECK(std::abs(anti.z - z) == 0.0);
  CHECK(std::abs(anti.mu + mu) == 0.0);

  const auto sc = TwistorMap::scaling(2.5).apply(p);
  CHECK(std::abs(sc.z - std::sqrt(2.5) * z) < 1e-15);
  CHECK(std::abs(sc.mu - mu) == 0.0);

  const auto sh = TwistorMap::shear(0.7).apply(p);
  const Complex want_sh =
      z + Complex{0.0, 0.7} * mu / (1.0 + std::norm(mu));
  CHECK(std::abs(sh.z - want_sh) < 1e-15);
  CHECK(std::abs(sh.mu - mu) == 0.0);

  const auto bad = TwistorMap::conjugate_shear(0.4).apply(p);
  CHECK(std::abs(bad.z - (z + 0.4 * std::conj(mu))) < 1e-15);
  CHECK(std::abs(bad.mu - mu) == 0.0);
}

TEST_CASE("jacobians match finite differences of the action") {
  const std::vector<TwistorMap> maps = {
      TwistorMap::rotation(0.9),
      TwistorMap::translation({0.5, -0.1}),
      TwistorMap::antipodal(),
      TwistorMap::scaling(2.5),
      TwistorMap::shear(0.7),
      TwistorMap::conjugate_shear(0.4),
      TwistorMap::parse("rot:1.1|shear:0.5|trans:0.2:0.3|scale:0.8"),
  };
  for (std::size_t mi = 0; mi < maps.size(); ++mi) {
    CAPTURE(mi);
    for (const auto& p : kPoints) {
      const Mat4 exact = maps[mi].jacobian(p);
      const Mat4 fd = fd_jacobian(maps[mi], p);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          CHECK(exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                    j)] ==
                doctest::Approx(
                    fd[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                        j)])
                    .epsilon(1e-6)
                    .scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("composites invert atom by atom") {
  const auto map = TwistorMap::parse("rot:1.1|shear:0.5|trans:0.2:0.3|scale:0.8");
  const auto inv = map.inverse();
  for (const auto& p : kPoints) {
    const auto q = inv.apply(map.apply(p));
    CHECK(std::abs(q.z - p.z) < 1e-12);
    CHECK(std::abs(q.mu - p.mu) < 1e-12);
  }
  const auto bad = TwistorMap::conjugate_shear(0.4);
  const auto p0 = kPoints[0];
  const auto r = bad.inverse().apply(bad.apply(p0));
  CHECK(std::abs(r.z - p0.z) < 1e-14);
}

TEST_CASE("map specs parse and print") {
  const auto map =
      TwistorMap::parse("rot:0.9|shear:0.5|trans:0.1:-0.2|scale:2|antipodal");
  const auto again = TwistorMap::parse(map.spec());
  for (const auto& p : kPoints) {
    const auto a = map.apply(p);
    const auto b = again.apply(p);
    CHECK(std::abs(a.z - b.z) == 0.0);
    CHECK(std::abs(a.mu - b.mu) == 0.0);
  }
  CHECK(TwistorMap().spec() == "trans:0:0");
  CHECK_THROWS_AS(TwistorMap::parse("rot"), SpecParseError);
  CHECK_THROWS_AS(TwistorMap::parse("scale:-1"), SpecParseError);
  CHECK_THROWS_AS(TwistorMap::parse("foo:1"), SpecParseError);
  CHECK_THROWS_AS(TwistorMap::parse("shear:abc"), SpecParseError);
  CHECK_THROWS_AS(TwistorMap::parse(""), SpecParseError);
}

TEST_CASE("holomorphy residual separates the catalog from the non example") {
  const std::vector<std::string> good = {
      "rot:0.9", "trans:0.5:-0.1", "antipodal", "scale:2.5", "shear:0.7",
      "rot:1.1|shear:0.5|trans:0.2:0.3",
  };
  const std::vector<TwistorPoint> probes = {
      kPoints[0], kPoints[1], kPoints[2],
      TwistorPoint({0.3, -0.2}, std::polar(1.0, 1.3)),  // on the circle bundle
  };
  for (const auto& spec : good) {
    CAPTURE(spec);
    const auto map = TwistorMap::parse(spec);
    for (const auto& p : probes) {
      CHECK(holomorphy_residual(map, p) < 1e-12);
    }
  }
  // The conjugate-linear shear at mu = 0 has the closed-form residual
  // |s| / sqrt(1 + s^2).
  const auto bad = TwistorMap::conjugate_shear(0.5);
  const TwistorPoint origin({0.0, 0.0}, {0.0, 0.0});
  CHECK(holomorphy_residual(bad, origin) ==
        doctest::Approx(0.4472135954999579).epsilon(1e-12));
  for (const auto& p : probes) {
    CHECK(holomorphy_residual(bad, p) > 1e-2);
  }
}

TEST_CASE("invariant polynomials are annihilated by the frame") {
  const auto f =
      pestov_uhlmann_euclid({Complex{0.3, 0.0}, Complex{0.0, 1.0}, {0.5, 0.0}});
  const auto g = pestov_uhlmann_oneform_euclid({{1.0, 0.0}, {0.0, -0.5}});
  const auto h = HolomorphicFunctionEuclid::mu() * f + g;
  for (const auto& p : kPoints) {
    CHECK(f.dbar_residual(p) < 1e-12);
    CHECK(g.dbar_residual(p) < 1e-12);
    CHECK(h.dbar_residual(p) < 1e-12);
  }
  // On-circle points too.
  const TwistorPoint sm({0.4, 0.2}, std::polar(1.0, 0.8));
  CHECK(f.dbar_residual(sm) < 1e-12);
  CHECK(g.dbar_residual(sm) < 1e-12);

  // Zero-section data restricts to the generating polynomial.
  const Complex z{0.25, -0.4};
  CHECK(std::abs(f.zero_section_value(z) -
                 (Complex{0.3, 0.0} + Complex{0.0, 1.0} * z +
                  Complex{0.5, 0.0} * z * z)) < 1e-14);
  // Fiber-linear data restricts to the coefficient polynomial.
  CHECK(std::abs(g.fiber_linear_coefficient(z) -
                 (Complex{1.0, 0.0} + Complex{0.0, -0.5} * z)) < 1e-14);
  CHECK(std::abs(g.zero_section_value(z)) == 0.0);

  // Parity in the fiber variable.
  CHECK(HolomorphicFunctionEuclid::mu().odd_in_mu());
  CHECK(g.odd_in_mu());
  CHECK_FALSE(HolomorphicFunctionEuclid::chord().odd_in_mu());
  CHECK_FALSE((f + g).odd_in_mu());

  // The chord invariant is z - mu^2 conj(z).
  const TwistorPoint q({0.3, -0.2}, {0.1, 0.25});
  CHECK(std::abs(HolomorphicFunctionEuclid::chord().value(q) -
                 (q.z - q.mu * q.mu * std::conj(q.z))) < 1e-15);
}

TEST_CASE("scattering data of invariants extends without negative modes") {
  const auto field = parse_field("zero", "zero");
  const auto f = HolomorphicFunctionEuclid::chord();
  auto datum = [&](const BoundaryRay& r) { return f.value(r.to_phase()); };
  const std::vector<Vec2> probes = {{0.1, 0.2}, {-0.3, 0.1}};
  const auto rep = invariant_extension_check(field, datum, probes, 8);
  CHECK(rep.fibrewise_holomorphic);
  CHECK(rep.max_negative_relative < 1e-9);
  CHECK(rep.max_constancy_defect < 1e-6);
  REQUIRE(rep.probes.size() == 2);
  CHECK(rep.probes[0].verdict.holomorphic);

  // Conjugated data transports equally well but is not fibrewise Hardy.
  auto control = [&](const BoundaryRay& r) {
    return std::conj(f.value(r.to_phase()));
  };
  const auto bad = invariant_extension_check(field, control, probes, 8);
  CHECK_FALSE(bad.fibrewise_holomorphic);
  CHECK(bad.max_negative_relative > 1e-2);

  CHECK_THROWS_AS(
      invariant_extension_check(field, datum, {{1.0, 0.0}}, 8), Error);
  CHECK_THROWS_AS(invariant_extension_check(field, datum, probes, 2), Error);
}

TEST_CASE("bundle maps transform frames as orbit equivalences") {
  const auto flat = ConformalMetric::parse("zero");
  const auto radial = ConformalMetric::parse("bump:0.4:0.7");
  const std::vector<PhasePoint> probes = {
      PhasePoint({0.2, 0.1}, 0.4), PhasePoint({-0.3, 0.4}, 1.9),
      PhasePoint({0.0, -0.5}, 3.3)};

  const auto id = orbit_equivalence_conditions(flat, flat, SmMap::identity(),
                                               probes);
  CHECK(id.max_x_defect < 1e-8);
  CHECK(id.max_v_defect < 1e-8);

  // Rotations preserve any radial metric.
  const auto rot = orbit_equivalence_conditions(radial, radial,
                                                SmMap::rotation(0.7), probes);
  CHECK(rot.max_x_defect < 1e-6);
  CHECK(rot.max_v_defect < 1e-6);

  // The antipodal map reverses geodesics: d phi(X) = -X', still no leak
  // into H' or V'.
  const auto anti = orbit_equivalence_conditions(flat, flat,
                                                 SmMap::antipodal(), probes);
  CHECK(anti.max_x_defect < 1e-8);
  CHECK(anti.max_v_defect < 1e-8);
  CHECK(anti.probes[0].dphi_x[0] == doctest::Approx(-1.0).epsilon(1e-8));

  // A fiber warp is no orbit equivalence; the X' direction drifts.
  const auto warp = SmMap::custom(
      [](const PhasePoint& p) {
        return PhasePoint(p.x, p.theta + 0.3 * std::sin(p.theta));
      },
      "fiberwarp");
  const auto bad = orbit_equivalence_conditions(flat, flat, warp, probes);
  CHECK(bad.max_x_defect > 1e-3);
  CHECK(warp.name() == "fiberwarp");
}
