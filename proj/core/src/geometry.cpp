#include "twistorlab/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace twistorlab {

namespace {

// Monomial exponents (x, y) for the polynomial preset, total degree <= 4.
constexpr int kMonomials[15][2] = {
    {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1},
    {1, 2}, {0, 3}, {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4},
};

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

std::vector<double> split_numbers(const std::string& s, std::size_t from,
                                  const std::string& what) {
  std::vector<double> out;
  std::size_t pos = from;
  while (pos <= s.size()) {
    const std::size_t next = s.find(':', pos);
    const std::string tok =
        s.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw SpecParseError("bad numeric field '" + tok + "' in " + what);
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

struct ConformalFactor::Impl {
  enum class Kind { Zero, Constant, LinearReal, RadialBump, Polynomial, Sum };
  Kind kind = Kind::Zero;
  double p0 = 0.0;  // constant value / linear slope / bump amplitude
  double p1 = 0.0;  // bump width
  std::vector<double> coeffs;
  std::vector<ConformalFactor> terms;
};

ConformalFactor::ConformalFactor() : impl_(std::make_shared<Impl>()) {}
ConformalFactor::ConformalFactor(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

ConformalFactor ConformalFactor::zero() { return ConformalFactor(); }

ConformalFactor ConformalFactor::constant(double c) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Constant;
  impl->p0 = c;
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::linear_real(double a) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::LinearReal;
  impl->p0 = a;
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::radial_bump(double amplitude, double width) {
  if (width <= 0.0) throw SpecParseError("radial bump width must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::RadialBump;
  impl->p0 = amplitude;
  impl->p1 = width;
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::polynomial(std::vector<double> coeffs) {
  if (coeffs.size() > 15) {
    throw SpecParseError("polynomial preset supports total degree <= 4");
  }
  coeffs.resize(15, 0.0);
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Polynomial;
  impl->coeffs = std::move(coeffs);
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::sum(std::vector<ConformalFactor> terms) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Impl::Kind::Sum;
  impl->terms = std::move(terms);
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::scaled(double factor) const {
  auto impl = std::make_shared<Impl>(*impl_);
  switch (impl->kind) {
    case Impl::Kind::Zero:
      break;
    case Impl::Kind::Constant:
    case Impl::Kind::LinearReal:
    case Impl::Kind::RadialBump:
      impl->p0 *= factor;
      break;
    case Impl::Kind::Polynomial:
      for (double& c : impl->coeffs) c *= factor;
      break;
    case Impl::Kind::Sum:
      for (ConformalFactor& t : impl->terms) t = t.scaled(factor);
      break;
  }
  return ConformalFactor(std::move(impl));
}

ConformalFactor ConformalFactor::parse(const std::string& spec) {
  if (spec == "zero") return zero();
  if (spec.rfind("const:", 0) == 0) {
    const auto v = split_numbers(spec, 6, spec);
    if (v.size() != 1) throw SpecParseError("expected const:C in " + spec);
    return constant(v[0]);
  }
  if (spec.rfind("linreal:", 0) == 0) {
    const auto v = split_numbers(spec, 8, spec);
    if (v.size() != 1) throw SpecParseError("expected linreal:A in " + spec);
    return linear_real(v[0]);
  }
  if (spec.rfind("bump:", 0) == 0) {
    const auto v = split_numbers(spec, 5, spec);
    if (v.size() != 2) throw SpecParseError("expected bump:AMP:WIDTH in " + spec);
    return radial_bump(v[0], v[1]);
  }
  if (spec.rfind("poly:", 0) == 0) {
    return polynomial(split_numbers(spec, 5, spec));
  }
  throw SpecParseError("unknown conformal factor spec '" + spec + "'");
}

std::string ConformalFactor::spec() const {
  switch (impl_->kind) {
    case Impl::Kind::Zero:
      return "zero";
    case Impl::Kind::Constant:
      return "const:" + format_number(impl_->p0);
    case Impl::Kind::LinearReal:
      return "linreal:" + format_number(impl_->p0);
    case Impl::Kind::RadialBump:
      return "bump:" + format_number(impl_->p0) + ":" + format_number(impl_->p1);
    case Impl::Kind::Polynomial: {
      std::string s = "poly";
      for (double c : impl_->coeffs) s += ":" + format_number(c);
      return s;
    }
    case Impl::Kind::Sum: {
      std::string s = "sum(";
      for (std::size_t i = 0; i < impl_->terms.size(); ++i) {
        if (i) s += ",";
        s += impl_->terms[i].spec();
      }
      return s + ")";
    }
  }
  return "zero";
}

double ConformalFactor::value(Vec2 p) const {
  switch (impl_->kind) {
    case Impl::Kind::Zero:
      return 0.0;
    case Impl::Kind::Constant:
      return impl_->p0;
    case Impl::Kind::LinearReal:
      return impl_->p0 * p.x;
    case Impl::Kind::RadialBump:
      return impl_->p0 * std::exp(-p.norm2() / sqr(impl_->p1));
    case Impl::Kind::Polynomial: {
      double acc = 0.0;
      for (int m = 0; m < 15; ++m) {
        if (impl_->coeffs[m] == 0.0) continue;
        acc += impl_->coeffs[m] * ipow(p.x, kMonomials[m][0]) *
               ipow(p.y, kMonomials[m][1]);
      }
      return acc;
    }
    case Impl::Kind::Sum: {
      double acc = 0.0;
      for (const auto& t : impl_->terms) acc += t.value(p);
      return acc;
    }
  }
  return 0.0;
}

Vec2 ConformalFactor::gradient(Vec2 p) const {
  switch (impl_->kind) {
    case Impl::Kind::Zero:
    case Impl::Kind::Constant:
      return {0.0, 0.0};
    case Impl::Kind::LinearReal:
      return {impl_->p0, 0.0};
    case Impl::Kind::RadialBump: {
      const double k = 1.0 / sqr(impl_->p1);
      const double q = impl_->p0 * std::exp(-p.norm2() * k);
      return {-2.0 * k * p.x * q, -2.0 * k * p.y * q};
    }
    case Impl::Kind::Polynomial: {
      Vec2 g{0.0, 0.0};
      for (int m = 0; m < 15; ++m) {
        const double c = impl_->coeffs[m];
        if (c == 0.0) continue;
        const int ex = kMonomials[m][0], ey = kMonomials[m][1];
        if (ex > 0) g.x += c * ex * ipow(p.x, ex - 1) * ipow(p.y, ey);
        if (ey > 0) g.y += c * ey * ipow(p.x, ex) * ipow(p.y, ey - 1);
      }
      return g;
    }
    case Impl::Kind::Sum: {
      Vec2 g{0.0, 0.0};
      for (const auto& t : impl_->terms) g = g + t.gradient(p);
      return g;
    }
  }
  return {0.0, 0.0};
}

std::array<double, 3> ConformalFactor::hessian(Vec2 p) const {
  switch (impl_->kind) {
    case Impl::Kind::Zero:
    case Impl::Kind::Constant:
    case Impl::Kind::LinearReal:
      return {0.0, 0.0, 0.0};
    case Impl::Kind::RadialBump: {
      const double k = 1.0 / sqr(impl_->p1);
      const double q = impl_->p0 * std::exp(-p.norm2() * k);
      return {q * (4.0 * k * k * p.x * p.x - 2.0 * k),
              q * 4.0 * k * k * p.x * p.y,
              q * (4.0 * k * k * p.y * p.y - 2.0 * k)};
    }
    case Impl::Kind::Polynomial: {
      std::array<double, 3> h{0.0, 0.0, 0.0};
      for (int m = 0; m < 15; ++m) {
        const double c = impl_->coeffs[m];
        if (c == 0.0) continue;
        const int ex = kMonomials[m][0], ey = kMonomials[m][1];
        if (ex > 1) h[0] += c * ex * (ex - 1) * ipow(p.x, ex - 2) * ipow(p.y, ey);
        if (ex > 0 && ey > 0)
          h[1] += c * ex * ey * ipow(p.x, ex - 1) * ipow(p.y, ey - 1);
        if (ey > 1) h[2] += c * ey * (ey - 1) * ipow(p.x, ex) * ipow(p.y, ey - 2);
      }
      return h;
    }
    case Impl::Kind::Sum: {
      std::array<double, 3> h{0.0, 0.0, 0.0};
      for (const auto& t : impl_->terms) {
        const auto th = t.hessian(p);
        h[0] += th[0];
        h[1] += th[1];
        h[2] += th[2];
      }
      return h;
    }
  }
  return {0.0, 0.0, 0.0};
}

double ConformalFactor::laplacian(Vec2 p) const {
  const auto h = hessian(p);
  return h[0] + h[2];
}

bool ConformalFactor::is_identically_zero() const {
  switch (impl_->kind) {
    case Impl::Kind::Zero:
      return true;
    case Impl::Kind::Constant:
      return impl_->p0 == 0.0;
    case Impl::Kind::LinearReal:
      return impl_->p0 == 0.0;
    case Impl::Kind::RadialBump:
      return impl_->p0 == 0.0;
    case Impl::Kind::Polynomial: {
      for (double c : impl_->coeffs)
        if (c != 0.0) return false;
      return true;
    }
    case Impl::Kind::Sum: {
      for (const auto& t : impl_->terms)
        if (!t.is_identically_zero()) return false;
      return true;
    }
  }
  return false;
}

double ConformalMetric::curvature(Vec2 p) const {
  return -std::exp(-2.0 * sigma.value(p)) * sigma.laplacian(p);
}

Christoffel ConformalMetric::christoffel(Vec2 p) const {
  // Gamma^k_ij = d^k_i s_j + d^k_j s_i - d_ij s^k for g = e^{2s} delta.
  const Vec2 g = sigma.gradient(p);
  const double s[2] = {g.x, g.y};
  Christoffel out{};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double v = 0.0;
        if (k == i) v += s[j];
        if (k == j) v += s[i];
        if (i == j) v -= s[k];
        out[k][i][j] = v;
      }
    }
  }
  return out;
}

Vec2 ConformalMetric::unit_vector(Vec2 p, double theta) const {
  const double e = std::exp(-sigma.value(p));
  return {e * std::cos(theta), e * std::sin(theta)};
}

double ConformalMetric::boundary_length(int n_nodes) const {
  // Simpson rule over beta in [0, 2pi]; integrand e^{sigma} is periodic.
  if (n_nodes % 2 != 0) ++n_nodes;
  const double h = kTwoPi / n_nodes;
  double acc = 0.0;
  for (int i = 0; i <= n_nodes; ++i) {
    const double beta = i * h;
    const double f = std::exp(sigma.value({std::cos(beta), std::sin(beta)}));
    const double w = (i == 0 || i == n_nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f;
  }
  return acc * h / 3.0;
}

PhasePoint::PhasePoint(Vec2 x_, double theta_) : x(x_), theta(wrap_angle(theta_)) {
  if (x.norm() > 1.0 + 1e-9) {
    throw Error("phase point outside the closed unit disk");
  }
}

PhasePoint BoundaryRay::to_phase() const {
  return PhasePoint({std::cos(beta), std::sin(beta)},
                    wrap_angle(beta + gamma + kPi / 2.0));
}

BoundaryRay BoundaryRay::from_phase(const PhasePoint& p, double eps) {
  if (std::abs(p.x.norm() - 1.0) > eps) {
    throw Error("phase point is not on the boundary circle");
  }
  const double beta = wrap_angle_positive(std::atan2(p.x.y, p.x.x));
  return {beta, wrap_angle(p.theta - beta - kPi / 2.0)};
}

double ray_distance(const BoundaryRay& a, const BoundaryRay& b) {
  return std::max(std::abs(wrap_angle(a.beta - b.beta)),
                  std::abs(wrap_angle(a.gamma - b.gamma)));
}

FrameTriple frame_vectors(const ConformalMetric& m, const PhasePoint& p) {
  const double e = std::exp(-m.sigma.value(p.x));
  const Vec2 g = m.sigma.gradient(p.x);
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  FrameTriple f;
  f.X = {e * c, e * s, e * (-s * g.x + c * g.y)};
  f.H = {-e * s, e * c, -e * (c * g.x + s * g.y)};
  f.V = {0.0, 0.0, 1.0};
  return f;
}

FrameDerivatives frame_derivatives(const ConformalMetric& m,
                                   const PhasePoint& p) {
  const double e = std::exp(-m.sigma.value(p.x));
  const Vec2 g = m.sigma.gradient(p.x);
  const auto h = m.sigma.hessian(p.x);
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const double s1 = g.x, s2 = g.y;
  const double xt = -s * s1 + c * s2;  // theta part of X before the e factor
  const double ht = -(c * s1 + s * s2);

  FrameDerivatives d;
  d.frame.X = {e * c, e * s, e * xt};
  d.frame.H = {-e * s, e * c, e * ht};
  d.frame.V = {0.0, 0.0, 1.0};

  // d[k][i] = d(component i)/d(coordinate k); coordinates (x1, x2, theta).
  d.dX[0] = {-s1 * e * c, -s1 * e * s, e * (-s1 * xt - s * h[0] + c * h[1])};
  d.dX[1] = {-s2 * e * c, -s2 * e * s, e * (-s2 * xt - s * h[1] + c * h[2])};
  d.dX[2] = {-e * s, e * c, e * ht};

  d.dH[0] = {s1 * e * s, -s1 * e * c, e * (-s1 * ht - c * h[0] - s * h[1])};
  d.dH[1] = {s2 * e * s, -s2 * e * c, e * (-s2 * ht - c * h[1] - s * h[2])};
  d.dH[2] = {-e * c, -e * s, -e * xt};
  return d;
}

Vec3 lie_bracket(const Vec3& a, const std::array<Vec3, 3>& da, const Vec3& b,
                 const std::array<Vec3, 3>& db) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    double v = 0.0;
    for (int j = 0; j < 3; ++j) {
      v += a[j] * db[j][i] - b[j] * da[j][i];
    }
    out[i] = v;
  }
  return out;
}

namespace {

// Vertical part of a chart vector xi at p: the covariant derivative of the
// unit-vector section along xi, expressed as a multiple of the g-unit
// rotation v^perp of v.
double vertical_component(const ConformalMetric& m, const PhasePoint& p,
                          const Vec3& xi) {
  const double sig = m.sigma.value(p.x);
  const double e = std::exp(-sig);
  const Vec2 g = m.sigma.gradient(p.x);
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const Vec2 xdot{xi[0], xi[1]};
  const Vec2 v{e * c, e * s};
  const Vec2 vperp{-e * s, e * c};

  // d/dt of v(x(t), theta(t)) along xi.
  const double sdot = dot(g, xdot);
  Vec2 dv = -sdot * v + xi[2] * vperp;

  const auto gam = m.christoffel(p.x);
  const double xv[2] = {xdot.x, xdot.y};
  const double vv[2] = {v.x, v.y};
  double corr[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        corr[k] += gam[k][i][j] * xv[i] * vv[j];
      }
    }
  }
  const Vec2 kxi = dv + Vec2{corr[0], corr[1]};
  return m.inner(p.x, kxi, vperp);  // vperp has g-norm 1
}

}  // namespace

double sasaki_inner(const ConformalMetric& m, const PhasePoint& p,
                    const Vec3& xi, const Vec3& eta) {
  const Vec2 dx_xi{xi[0], xi[1]};
  const Vec2 dx_eta{eta[0], eta[1]};
  const double kx = vertical_component(m, p, xi);
  const double ke = vertical_component(m, p, eta);
  return m.inner(p.x, dx_xi, dx_eta) + kx * ke;
}

Vec3 frame_components(const ConformalMetric& m, const PhasePoint& p,
                      const Vec3& xi) {
  const double e = std::exp(-m.sigma.value(p.x));
  const double c = std::cos(p.theta), s = std::sin(p.theta);
  const Vec2 v{e * c, e * s};
  const Vec2 vperp{-e * s, e * c};
  const Vec2 dx{xi[0], xi[1]};
  return {m.inner(p.x, dx, v), m.inner(p.x, dx, vperp),
          vertical_component(m, p, xi)};
}

BoundaryGeometry boundary_geometry(const ConformalMetric& m, double beta) {
  const double c = std::cos(beta), s = std::sin(beta);
  const Vec2 x{c, s};
  const double e = std::exp(-m.sigma.value(x));
  BoundaryGeometry out;
  out.point = x;
  out.nu = {-e * c, -e * s};
  out.nu_perp = {-e * s, e * c};  // -(nu rotated counterclockwise)

  // Pi(nu_perp, nu_perp) = g(D_t W / |c'|_g, nu) for W(t) = nu_perp(c(t)),
  // c(t) the unit circle. Reduces to -< W' + Gamma(c', W), e_r >_euclid.
  const Vec2 g = m.sigma.gradient(x);
  const Vec2 cdot{-s, c};
  const double sdot = dot(g, cdot);
  const Vec2 wdot =
      Vec2{-sdot * (-s) - c, -sdot * c - s} * e;  // d/dt [e^{-sigma}(-sin,cos)]
  const auto gam = m.christoffel(x);
  const double u[2] = {cdot.x, cdot.y};
  const double w[2] = {out.nu_perp.x, out.nu_perp.y};
  double corr[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) corr[k] += gam[k][i][j] * u[i] * w[j];
  out.second_fundamental_form = -dot(wdot + Vec2{corr[0], corr[1]}, x);
  return out;
}

double boundary_mu_dtheta(const ConformalMetric& m, double beta, double theta) {
  const auto bg = boundary_geometry(m, beta);
  const double e = std::exp(-m.sigma.value(bg.point));
  const Vec2 vperp{-e * std::sin(theta), e * std::cos(theta)};
  return m.inner(bg.point, bg.nu, vperp);
}

ConnectionDifference connection_difference(const ConformalMetric& m1,
                                           const ConformalMetric& m2, Vec2 x,
                                           Vec2 xi) {
  const auto g1 = m1.christoffel(x);
  const auto g2 = m2.christoffel(x);
  const double u[2] = {xi.x, xi.y};
  double diff[2] = {0.0, 0.0};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        diff[k] += (g2[k][i][j] - g1[k][i][j]) * u[i] * u[j];

  // -g1(xi,xi) grad_{g1} s + 2 ds(xi) xi with s = sigma2 - sigma1; the
  // conformal weights cancel, leaving the Euclidean expression below.
  const Vec2 ds = m2.sigma.gradient(x) - m1.sigma.gradient(x);
  const Vec2 closed = -xi.norm2() * ds + 2.0 * dot(ds, xi) * xi;

  ConnectionDifference out;
  out.via_christoffel = {diff[0], diff[1]};
  out.closed_form = closed;
  out.discrepancy = (out.via_christoffel - closed).norm();
  return out;
}

}  // namespace twistorlab
