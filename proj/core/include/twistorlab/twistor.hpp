#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "twistorlab/circle.hpp"
#include "twistorlab/flow.hpp"
#include "twistorlab/geometry.hpp"
#include "twistorlab/util.hpp"

namespace twistorlab {

// Point of the Euclidean model C x D-bar; z is unrestricted (plane model),
// mu lives in the closed unit disk. |mu| = 1 is the unit circle bundle.
struct TwistorPoint {
  Complex z{0.0, 0.0};
  Complex mu{0.0, 0.0};

  TwistorPoint() = default;
  TwistorPoint(Complex z_, Complex mu_);

  bool on_sm(double eps = 1e-10) const {
    return std::abs(std::abs(mu) - 1.0) <= eps;
  }
};

// Fiber chart of the circle bundle: mu = e^{i theta}.
TwistorPoint twistor_of_phase(const PhasePoint& p);

// Complexified tangent vector over the real chart (Re z, Im z, Re mu, Im mu).
using CVec4 = std::array<Complex, 4>;

// The antiholomorphic frame W1 = d/d(z-bar) + mu^2 d/dz, W2 = d/d(mu-bar).
struct DbarFrame {
  CVec4 w1;
  CVec4 w2;
};

DbarFrame dbar_frame(const TwistorPoint& p);

// Dimension of span{W1, W2} intersected with its conjugate, by singular
// value thresholding at 1e-7: one complex line exactly on |mu| = 1, zero
// inside.
int dbar_intersection_rank(const TwistorPoint& p, double threshold = 1e-7);

using Mat4 = std::array<std::array<double, 4>, 4>;

// Catalog of explicit self-maps of the Euclidean model, each with value and
// closed-form real 4x4 Jacobian. All are biholomorphic except the
// conjugate-linear shear, which is the designated non-example.
class TwistorMap {
 public:
  TwistorMap();  // identity (empty composite)
  TwistorMap(const TwistorMap&);
  TwistorMap(TwistorMap&&) noexcept;
  TwistorMap& operator=(const TwistorMap&);
  TwistorMap& operator=(TwistorMap&&) noexcept;
  ~TwistorMap();

  static TwistorMap rotation(double omega);     // (e^{iw} z, e^{iw} mu)
  static TwistorMap translation(Complex c);     // (z + c, mu)
  static TwistorMap antipodal();                // (z, -mu)
  static TwistorMap scaling(double c);          // (sqrt(c) z, mu), c > 0
  static TwistorMap shear(double s);            // (z + i s mu/(1+|mu|^2), mu)
  static TwistorMap conjugate_shear(double s);  // (z + s conj(mu), mu)
  static TwistorMap compose(std::vector<TwistorMap> maps);  // left to right

  // "rot:W", "trans:X:Y", "antipodal", "scale:C", "shear:S", "badshear:S",
  // and compositions joined with '|' applied left to right.
  static TwistorMap parse(const std::string& spec);
  std::string spec() const;

  TwistorPoint apply(const TwistorPoint& p) const;
  Mat4 jacobian(const TwistorPoint& p) const;
  TwistorMap inverse() const;

 private:
  struct Atom;
  std::vector<Atom> atoms_;  // applied left to right
};

// Push of a complexified vector through a real Jacobian.
CVec4 push_forward(const Mat4& jac, const CVec4& v);

// Largest relative least-squares distance of the pushed frame vectors
// d Phi(W1), d Phi(W2) from the antiholomorphic plane at Phi(p). Zero (to
// rounding) exactly for holomorphic maps.
double holomorphy_residual(const TwistorMap& map, const TwistorPoint& p);

// Polynomial in the two basic invariants u1 = mu, u2 = z - mu^2 conj(z).
// Every such expression is annihilated by W1 and W2; the constructor
// verifies the cancellation numerically on a fixed probe set.
class HolomorphicFunctionEuclid {
 public:
  HolomorphicFunctionEuclid();  // zero

  static HolomorphicFunctionEuclid constant(Complex c);
  static HolomorphicFunctionEuclid mu();     // u1
  static HolomorphicFunctionEuclid chord();  // u2

  // h(u2) for a polynomial h given by coefficients (ascending powers);
  // restricts to h(z) on the zero section.
  static HolomorphicFunctionEuclid from_zero_section(
      const std::vector<Complex>& h);

  // mu * a(u2); odd in mu, with fiber-linear coefficient a(z) at mu = 0.
  static HolomorphicFunctionEuclid fiber_linear(const std::vector<Complex>& a);

  HolomorphicFunctionEuclid operator+(const HolomorphicFunctionEuclid&) const;
  HolomorphicFunctionEuclid operator*(const HolomorphicFunctionEuclid&) const;

  Complex value(const TwistorPoint& p) const;
  Complex value(const PhasePoint& p) const {
    return value(twistor_of_phase(p));
  }

  // |W1 f| + |W2 f| with the Wirtinger pieces evaluated separately, so the
  // analytic cancellation is exercised in floating point.
  double dbar_residual(const TwistorPoint& p) const;

  Complex zero_section_value(Complex z) const;      // f(z, 0)
  Complex fiber_linear_coefficient(Complex z) const;  // d/dmu f at mu = 0

  // True when only odd powers of mu appear, i.e. f(z, -mu) = -f(z, mu).
  bool odd_in_mu() const;

 private:
  struct Term {
    Complex coef;
    int i = 0;  // power of u1
    int j = 0;  // power of u2
  };
  std::vector<Term> terms_;
  explicit HolomorphicFunctionEuclid(std::vector<Term> terms);
  void verify_annihilation() const;
};

HolomorphicFunctionEuclid pestov_uhlmann_euclid(const std::vector<Complex>& h);
HolomorphicFunctionEuclid pestov_uhlmann_oneform_euclid(
    const std::vector<Complex>& a);

// First-integral extension pipeline: u(x, theta) is the boundary datum at
// the exit ray of the orbit through (x, theta). Fiber restrictions are
// Fourier-analyzed at probe base points; for scattering-invariant data from
// a holomorphic function the negative modes vanish.
struct InvariantExtensionReport {
  struct Probe {
    Vec2 x;
    FourierSeries fiber = FourierSeries(1);
    HolomorphyVerdict verdict;
    double orbit_constancy_defect = 0.0;  // |u(phi_h p) - u(p)| / h
  };
  std::vector<Probe> probes;
  double max_negative_relative = 0.0;
  double max_constancy_defect = 0.0;
  bool fibrewise_holomorphic = false;
};

InvariantExtensionReport invariant_extension_check(
    const ThermostatField& field,
    const std::function<Complex(const BoundaryRay&)>& datum,
    const std::vector<Vec2>& probe_points, int n_modes = 64,
    double tmax = 1e3, const IntegrateOptions& options = {});

// Maps of the circle bundle used for the necessary-condition checks.
class SmMap {
 public:
  SmMap();  // identity; also the conformal conjugation in this chart

  static SmMap identity();
  static SmMap rotation(double omega);  // (e^{iw} x, theta + w)
  static SmMap antipodal();             // (x, theta + pi)
  static SmMap custom(std::function<PhasePoint(const PhasePoint&)> fn,
                      std::string name = "custom");

  PhasePoint apply(const PhasePoint& p) const;
  const std::string& name() const { return name_; }

 private:
  std::function<PhasePoint(const PhasePoint&)> fn_;
  std::string name_;
};

// Frame components of the pushforwards d phi(X) and d phi(V) in the target
// frame, at interior probe points, by central chart differences. For a map
// extending to a fiber-preserving biholomorphism, d phi(X) has no H' or V'
// component and d phi(V) has no H' component.
struct OrbitEquivalenceReport {
  struct Probe {
    PhasePoint p;
    Vec3 dphi_x;  // components of d phi(X) in {X', H', V'}
    Vec3 dphi_v;  // components of d phi(V)
    double x_defect = 0.0;  // |(H', V') part of d phi(X)| / |d phi(X)|
    double v_defect = 0.0;  // |H' part of d phi(V)| / |d phi(V)|
  };
  std::vector<Probe> probes;
  double max_x_defect = 0.0;
  double max_v_defect = 0.0;
};

OrbitEquivalenceReport orbit_equivalence_conditions(
    const ConformalMetric& m1, const ConformalMetric& m2, const SmMap& phi,
    const std::vector<PhasePoint>& probes, double fd_step = 1e-6);

}  // namespace twistorlab
