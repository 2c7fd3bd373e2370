#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twistorlab/geometry.hpp"

namespace twistorlab {

// Generator coefficient lambda(x, theta) of the thermostat perturbation
// X + lambda V. Presets:
//   zero            geodesic flow
//   const:C         constant lambda (|C| < 1 keeps orbits non-trapped)
//   conf:<factor>   lambda = d(sigma')(v_perp), the coefficient that makes
//                   X + lambda V a rescaled geodesic generator of the
//                   metric conformally rescaled by e^{2 sigma'}
class LambdaPreset {
 public:
  LambdaPreset();  // zero

  static LambdaPreset zero();
  static LambdaPreset constant(double c);
  static LambdaPreset from_conformal_factor(const ConformalFactor& fac);
  static LambdaPreset parse(const std::string& spec);
  std::string spec() const;

  bool is_zero() const;
  // The underlying factor sigma' for the conf preset; throws otherwise.
  const ConformalFactor& conformal_factor() const;

  // Values and first derivatives. The metric argument supplies the base
  // conformal weight appearing in v_perp. The chart form does not require
  // |x| <= 1; integrator stages may overshoot the disk.
  double value(const ConformalMetric& m, Vec2 x, double theta) const;
  double dtheta(const ConformalMetric& m, Vec2 x, double theta) const;
  Vec2 grad_x(const ConformalMetric& m, Vec2 x, double theta) const;
  double value(const ConformalMetric& m, const PhasePoint& p) const {
    return value(m, p.x, p.theta);
  }
  double dtheta(const ConformalMetric& m, const PhasePoint& p) const {
    return dtheta(m, p.x, p.theta);
  }
  Vec2 grad_x(const ConformalMetric& m, const PhasePoint& p) const {
    return grad_x(m, p.x, p.theta);
  }

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// The flow generator F = X + lambda V on the unit circle bundle, together
// with the derived quantities entering the variational equations.
struct ThermostatField {
  ConformalMetric metric;
  LambdaPreset lambda;

  bool is_geodesic() const { return lambda.is_zero(); }

  double lambda_value(const PhasePoint& p) const {
    return lambda.value(metric, p);
  }
  // V(lambda) and H(lambda) as derivatives along the frame fields.
  double lambda_V(const PhasePoint& p) const;
  double lambda_H(const PhasePoint& p) const;

  // kappa = K - H(lambda) + lambda^2, the curvature datum of the
  // variational system along F.
  double kappa(const PhasePoint& p) const;

  // Coordinates of F at p in the chart (x1, x2, theta).
  Vec3 rhs(const PhasePoint& p) const;
};

ThermostatField parse_field(const std::string& metric_spec,
                            const std::string& lambda_spec);

struct IntegrateOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  double initial_step = 0.0;  // 0 = automatic
  long max_steps = 200000;
  bool record = true;  // keep per-step samples in the trajectory
};

struct ExitData {
  double time = 0.0;       // orbit parameter at the boundary hit
  PhasePoint phase;        // exit point on the circle bundle
  BoundaryRay ray;         // exit point in fan coordinates
};

struct Trajectory {
  std::vector<double> times;       // empty unless options.record
  std::vector<PhasePoint> states;  // matches times
  std::optional<ExitData> exit;    // empty when tmax was reached first
  double end_time = 0.0;
  PhasePoint end_state;
  long n_steps = 0;
};

// Integrates the orbit of t -> phi_t(p) forward (direction +1) or backward
// (direction -1) until the boundary |x| = 1 is hit or |t| reaches tmax.
// Throws NonTransversalExit when the orbit meets the boundary tangentially
// and StepLimitExceeded when the step budget runs out.
Trajectory integrate_orbit(const ThermostatField& field, const PhasePoint& p,
                           double tmax, int direction = +1,
                           const IntegrateOptions& options = {});

// phi_t(p) for a fixed signed time; the orbit must stay in the closed disk.
PhasePoint flow_for_time(const ThermostatField& field, const PhasePoint& p,
                         double t, const IntegrateOptions& options = {});

// Rays closer to glancing than this are not integrated; the scattering map
// fixes them and the travel time vanishes.
inline constexpr double kGlancingBand = 1e-6;

enum class RayStatus { Ok, Glancing, Trapped, NonTransversal, Failed };

std::string to_string(RayStatus s);
RayStatus ray_status_from_string(const std::string& s);

struct ScatterResult {
  BoundaryRay ray_out;
  double tau_tilde = 0.0;  // signed travel time between boundary hits
  RayStatus status = RayStatus::Ok;
};

// Scattering relation: an inward ray maps to the exit ray of its forward
// orbit with tau_tilde > 0, an outward ray to the entry ray of its backward
// orbit with tau_tilde < 0, and glancing rays are fixed with tau_tilde = 0.
ScatterResult scattering(const ThermostatField& field, const BoundaryRay& ray,
                         double tmax = 1e3,
                         const IntegrateOptions& options = {});

struct ScatteringTable {
  struct Entry {
    BoundaryRay ray_in;
    BoundaryRay ray_out;
    double tau_tilde = 0.0;
    RayStatus status = RayStatus::Ok;
  };
  int n_beta = 0;
  int n_gamma = 0;
  std::vector<Entry> entries;  // row-major over (beta_i, gamma_j)

  void write_csv(std::ostream& os) const;
  static ScatteringTable read_csv(std::istream& is);
};

// Samples beta on n_beta equispaced boundary points and gamma on n_gamma
// interior values of (0, pi), so every sampled ray is strictly inward.
ScatteringTable scattering_table(const ThermostatField& field, int n_beta,
                                 int n_gamma, double tmax = 1e3,
                                 const IntegrateOptions& options = {});

// Boundary-fixing time rescale u used by the orbit-equivalence checks.
// Presets: zero, radquad:S with u = S (1 - |x|^2).
class TauPreset {
 public:
  TauPreset();  // zero

  static TauPreset zero();
  static TauPreset radial_quadratic(double s);
  static TauPreset parse(const std::string& spec);
  std::string spec() const;

  bool is_zero() const;
  double value(const PhasePoint& p) const;
  // Derivative along the generator X of the metric's geodesic flow.
  double along_X(const ConformalMetric& m, const PhasePoint& p) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct TimeChangeCheck {
  double x_component = 0.0;   // <d phi(X), X> at the image point
  double h_component = 0.0;   // <d phi(X), H>
  double v_component = 0.0;   // vertical part beyond lambda adjustments
  double x_residual = 0.0;    // x_component - (1 + X(tau) at p)
  // H-component of d phi(V); the obstruction to extending phi to the
  // twistor space, nonzero as soon as tau is nonconstant along orbits.
  double extension_defect = 0.0;
};

// phi(p) = phi_{tau(p)}(p) along the geodesic flow of the metric. Measures
// by finite differences how phi distorts the frame: d phi(X) picks up the
// factor 1 + X(tau) in the X direction, and d phi(V) leaks into H unless
// tau is invariant, which is what blocks a twistor-space extension.
TimeChangeCheck time_change_check(const ConformalMetric& metric,
                                  const TauPreset& tau, const PhasePoint& p,
                                  double fd_step = 1e-5);

}  // namespace twistorlab
