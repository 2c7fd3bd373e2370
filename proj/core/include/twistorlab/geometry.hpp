#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "twistorlab/util.hpp"

namespace twistorlab {

// Conformal factor sigma of a metric e^{2 sigma} (dx^2 + dy^2) on the closed
// unit disk. Every preset is real-analytic on the whole plane, with value,
// gradient and Hessian in closed form.
class ConformalFactor {
 public:
  ConformalFactor();  // zero

  static ConformalFactor zero();
  static ConformalFactor constant(double c);
  // sigma(x, y) = a * x
  static ConformalFactor linear_real(double a);
  // sigma(r) = amplitude * exp(-r^2 / width^2)
  static ConformalFactor radial_bump(double amplitude, double width);
  // Polynomial in (x, y) up to total degree 4; coefficient order
  // 1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3, x^4, x^3 y, x^2 y^2,
  // x y^3, y^4. Shorter vectors are zero-padded.
  static ConformalFactor polynomial(std::vector<double> coeffs);
  // Pointwise sum; used to scale an existing metric by a further factor.
  static ConformalFactor sum(std::vector<ConformalFactor> terms);
  // Pointwise multiple of this factor, e.g. sigma/2 for exponent experiments.
  ConformalFactor scaled(double factor) const;

  // Accepted forms: "zero", "const:C", "linreal:A", "bump:AMP:WIDTH",
  // "poly:c0:c1:...". Throws SpecParseError otherwise.
  static ConformalFactor parse(const std::string& spec);
  std::string spec() const;

  double value(Vec2 p) const;
  Vec2 gradient(Vec2 p) const;
  // (d11, d12, d22)
  std::array<double, 3> hessian(Vec2 p) const;
  double laplacian(Vec2 p) const;

  bool is_identically_zero() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  explicit ConformalFactor(std::shared_ptr<const Impl> impl);
};

// Christoffel symbols Gamma[k][i][j] in the Euclidean chart.
using Christoffel = std::array<std::array<std::array<double, 2>, 2>, 2>;

struct ConformalMetric {
  ConformalFactor sigma;

  ConformalMetric() = default;
  explicit ConformalMetric(ConformalFactor s) : sigma(std::move(s)) {}
  static ConformalMetric parse(const std::string& spec) {
    return ConformalMetric(ConformalFactor::parse(spec));
  }
  std::string spec() const { return sigma.spec(); }

  // e^{2 sigma}
  double weight(Vec2 p) const { return std::exp(2.0 * sigma.value(p)); }
  double inner(Vec2 p, Vec2 u, Vec2 v) const { return weight(p) * dot(u, v); }
  double norm(Vec2 p, Vec2 u) const { return std::sqrt(inner(p, u, u)); }

  // Gauss curvature K = -e^{-2 sigma} Laplacian(sigma).
  double curvature(Vec2 p) const;

  Christoffel christoffel(Vec2 p) const;

  // Unit tangent vector of fiber angle theta: e^{-sigma} (cos, sin) theta.
  Vec2 unit_vector(Vec2 p, double theta) const;

  // Length of the boundary circle, by composite Simpson quadrature.
  double boundary_length(int n_nodes = 512) const;
};

// Point of the unit sphere bundle in the (x, theta) chart; theta is the
// Euclidean direction angle of the g-unit tangent vector.
struct PhasePoint {
  Vec2 x;
  double theta = 0.0;

  PhasePoint() = default;
  PhasePoint(Vec2 x_, double theta_);

  bool on_boundary(double eps = kBoundaryEps) const {
    return std::abs(x.norm() - 1.0) <= eps;
  }
};

// Boundary ray: base point e^{i beta} on the unit circle, fiber coordinate
// mu = e^{i gamma} against the frame (nu_perp, nu). Inward for sin(gamma) > 0,
// glancing at gamma in {0, pi}.
struct BoundaryRay {
  double beta = 0.0;
  double gamma = 0.0;

  BoundaryRay() = default;
  BoundaryRay(double beta_, double gamma_)
      : beta(wrap_angle_positive(beta_)), gamma(wrap_angle(gamma_)) {}

  bool inward() const { return std::sin(gamma) > 0.0; }
  bool outward() const { return std::sin(gamma) < 0.0; }
  double glancing_distance() const {
    return std::min(std::abs(gamma), std::abs(wrap_angle(gamma - kPi)));
  }
  bool glancing(double eps = 1e-12) const { return glancing_distance() <= eps; }

  // Same base point, opposite direction.
  BoundaryRay reversed() const { return {beta, gamma + kPi}; }

  Complex mu() const { return {std::cos(gamma), std::sin(gamma)}; }

  // The chart conversion is metric independent: the direction angle of
  // cos(gamma) nu_perp + sin(gamma) nu is beta + gamma + pi/2 for every
  // conformal factor.
  PhasePoint to_phase() const;
  static BoundaryRay from_phase(const PhasePoint& p, double eps = 1e-9);
};

// Angular distance between rays: max of the wrapped differences in beta and
// gamma. Used for involution and conjugation defects.
double ray_distance(const BoundaryRay& a, const BoundaryRay& b);

// Coefficients of the frame X (generator of the geodesic flow), H = [V, X]
// and V = d/dtheta at p, in the (x1, x2, theta) chart.
struct FrameTriple {
  Vec3 X;
  Vec3 H;
  Vec3 V;
};

FrameTriple frame_vectors(const ConformalMetric& m, const PhasePoint& p);

// Frame plus the Jacobians of the coefficient maps, for exact Lie brackets.
struct FrameDerivatives {
  FrameTriple frame;
  // d[k][i] = d(coefficient i)/d(coordinate k), coordinates (x1, x2, theta).
  std::array<Vec3, 3> dX;
  std::array<Vec3, 3> dH;
};

FrameDerivatives frame_derivatives(const ConformalMetric& m,
                                   const PhasePoint& p);

// [A, B] for coefficient fields with known Jacobians.
Vec3 lie_bracket(const Vec3& a, const std::array<Vec3, 3>& da, const Vec3& b,
                 const std::array<Vec3, 3>& db);

// Sasaki inner product of chart vectors at p: g on the horizontal part plus
// g on the vertical part (computed through the Levi-Civita connection). The
// frame {X, H, V} is orthonormal for it.
double sasaki_inner(const ConformalMetric& m, const PhasePoint& p,
                    const Vec3& xi, const Vec3& eta);

// (<xi,X>, <xi,H>, <xi,V>) with respect to the Sasaki product.
Vec3 frame_components(const ConformalMetric& m, const PhasePoint& p,
                      const Vec3& xi);

struct BoundaryGeometry {
  Vec2 point;       // e^{i beta}
  Vec2 nu;          // inward g-unit normal
  Vec2 nu_perp;     // -(nu rotated by +pi/2); g-unit boundary tangent
  double second_fundamental_form;  // Pi(nu_perp, nu_perp), inward convention
};

BoundaryGeometry boundary_geometry(const ConformalMetric& m, double beta);

// d/dtheta of mu(x, v_theta) = g(nu(x), v_theta) at the phase angle theta;
// equals g(nu, v_theta^perp). Enters the flow-adapted fundamental form.
double boundary_mu_dtheta(const ConformalMetric& m, double beta, double theta);

struct ConnectionDifference {
  Vec2 via_christoffel;  // (Gamma_2 - Gamma_1)(xi, xi)
  Vec2 closed_form;      // -g1(xi,xi) grad_{g1} s + 2 ds(xi) xi, s = s2 - s1
  double discrepancy;    // Euclidean norm of the difference
};

// Difference of the Levi-Civita connections of two conformal metrics applied
// to (xi, xi), evaluated both through Christoffel symbols and through the
// conformal closed form.
ConnectionDifference connection_difference(const ConformalMetric& m1,
                                           const ConformalMetric& m2, Vec2 x,
                                           Vec2 xi);

}  // namespace twistorlab
