#pragma once

#include <vector>

#include "twistorlab/flow.hpp"
#include "twistorlab/geometry.hpp"

namespace twistorlab {

// Components of a variational field d phi_t(xi) along a thermostat orbit in
// the moving frame {F, H, V}. They satisfy
//   a' = lambda b,  b' = c,  c' = V(lambda) c - kappa b,
// with kappa = K - H(lambda) + lambda^2; for the vertical initial vector
// xi = V this is (0, 0, 1), and in the flat geodesic case (a, b, c) =
// (0, t, 1).
struct VariationalState {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

inline VariationalState vertical_initial_state() { return {0.0, 0.0, 1.0}; }

struct VariationalPath {
  std::vector<double> times;
  std::vector<PhasePoint> phases;
  std::vector<VariationalState> states;
  PhasePoint end_phase;
  VariationalState end_state;
  long n_steps = 0;
};

// Integrates the variational system jointly with the base orbit for a fixed
// signed duration; throws when the orbit reaches the boundary first.
VariationalPath variational_flow(const ThermostatField& field,
                                 const PhasePoint& p0,
                                 const VariationalState& xi0, double T,
                                 const IntegrateOptions& options = {});

struct VariationalExit {
  BoundaryRay ray_out;
  double tau_tilde = 0.0;
  PhasePoint exit_phase;
  VariationalState exit_state;
};

// Joint integration of an inward ray to its boundary exit.
VariationalExit variational_to_exit(const ThermostatField& field,
                                    const BoundaryRay& ray, double tmax = 1e3,
                                    const IntegrateOptions& options = {});

// The differential of the scattering relation applied to the vertical field
// V = d/dgamma, computed two ways: via the variational solution with the
// travel-time correction f = V(tau) + a(tau), g = b(tau), and via direct
// finite differences of the scattering map in gamma. Components are taken in
// {F, H, V} at the exit ray, reported through the Sasaki pairings with X, H.
struct DAlphaResult {
  double tau_tilde = 0.0;
  double v_tau = 0.0;  // finite-difference derivative of tau in gamma

  double f_variational = 0.0;
  double g_variational = 0.0;
  double c_variational = 0.0;

  double f_fd = 0.0;
  double g_fd = 0.0;
  double c_fd = 0.0;

  double discrepancy = 0.0;    // max abs difference over (f, g, c)
  double fd_condition = 0.0;   // cancellation estimate of the FD stencils
  bool degraded = false;       // fd_condition above 1e6
};

DAlphaResult d_alpha_of_V(const ThermostatField& field, const BoundaryRay& ray,
                          double fd_step = 1e-5, double tmax = 1e3,
                          const IntegrateOptions& options = {});

// One glancing orientation at a boundary point: the fiber derivative of the
// travel time, extrapolated to the glancing ray, against the flow-adapted
// fundamental form. The product is 2 up to sign.
struct GlancingBranch {
  double gamma_anchor = 0.0;  // 0 or pi
  double pi_lambda = 0.0;     // Pi - lambda * V(mu) at the glancing ray
  double v_tau = 0.0;         // extrapolated d(tau)/d(gamma)
  int sign = +1;              // branch sign, resolved from the data
  double residual = 0.0;      // |pi_lambda * v_tau - 2 sign|
};

struct GlancingIdentity {
  GlancingBranch at_zero;
  GlancingBranch at_pi;
  double max_residual = 0.0;
  double gamma0 = 0.0;  // largest offset of the extrapolation ladder
  int levels = 0;
};

// Richardson-extrapolates one-sided quotients tau(gamma_k)/gamma_k over
// gamma_k = gamma0 2^{-k}, staying outside the glancing band. Throws
// ConvexityViolated when Pi^lambda <= 0 at either glancing ray.
GlancingIdentity glancing_identity(const ThermostatField& field, double beta,
                                   double gamma0 = 1e-2, int levels = 6,
                                   const IntegrateOptions& options = {});

// Sweep of vertical variational solutions along boundary-to-boundary
// geodesics of the metric: simple when every scanned orbit exits with b > 0
// on (0, T]. A vanishing b inside flags a conjugate point; a trapped orbit
// also refutes simplicity.
struct ConjugatePointScan {
  bool simple = true;
  int n_rays = 0;
  int conjugate_count = 0;  // rays with b <= 0 somewhere in (0, T]
  int trapped_count = 0;
  double min_exit_b = 0.0;      // min over clean rays of b at exit
  double min_interior_b = 0.0;  // min over samples with t > 0
  BoundaryRay worst_ray;        // attains min_interior_b or first failure
};

ConjugatePointScan conjugate_point_scan(const ConformalMetric& m, int n_rays,
                                        double tmax = 1e3,
                                        const IntegrateOptions& options = {});

}  // namespace twistorlab
