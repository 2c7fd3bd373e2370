#include "twistorlab/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twistorlab/detail/dopri5.hpp"

namespace twistorlab {

namespace {

using detail::OdeState;

// Joint chart system: base orbit of X + lambda V plus the variational
// components (a, b, c) in the moving frame. All coefficient data is
// evaluated in closed form so the right-hand side stays smooth when
// integrator stages overshoot the disk.
struct JointRhs {
  const ThermostatField& field;

  void operator()(const OdeState<6>& y, OdeState<6>& dy) const {
    const Vec2 x{y[0], y[1]};
    const double theta = y[2];
    const double c = std::cos(theta), s = std::sin(theta);
    const Vec2 gs = field.metric.sigma.gradient(x);
    const double e = std::exp(-field.metric.sigma.value(x));
    const double lam = field.lambda.value(field.metric, x, theta);
    dy[0] = e * c;
    dy[1] = e * s;
    dy[2] = e * (-s * gs.x + c * gs.y) + lam;

    const double vlam = field.lambda.dtheta(field.metric, x, theta);
    const Vec2 glam = field.lambda.grad_x(field.metric, x, theta);
    const double hlam =
        e * (-s * glam.x + c * glam.y - (c * gs.x + s * gs.y) * vlam);
    const double kappa =
        field.metric.curvature(x) - hlam + lam * lam;
    dy[3] = lam * y[4];
    dy[4] = y[5];
    dy[5] = vlam * y[5] - kappa * y[4];
  }
};

double joint_g(const OdeState<6>& y) {
  return y[0] * y[0] + y[1] * y[1] - 1.0;
}

double joint_gdot(const JointRhs& rhs, const OdeState<6>& y) {
  OdeState<6> dy;
  rhs(y, dy);
  return 2.0 * (y[0] * dy[0] + y[1] * dy[1]);
}

detail::RkOptions rk_from(const IntegrateOptions& options) {
  detail::RkOptions rk;
  rk.rel_tol = options.rel_tol;
  rk.abs_tol = options.abs_tol;
  rk.max_step = options.max_step;
  rk.initial_step = options.initial_step;
  rk.max_steps = options.max_steps;
  return rk;
}

// A boundary start must resolve the initial dip across |x| = 1, otherwise a
// nearly glancing excursion is stepped over entirely.
void boundary_start_guard(const JointRhs& rhs, const OdeState<6>& y0,
                          detail::RkOptions& rk) {
  if (joint_g(y0) < -kBoundaryEps) return;
  const double gd = joint_gdot(rhs, y0);
  if (std::abs(gd) < 1e-8) {
    throw NonTransversalExit("variational orbit starts tangent to the boundary");
  }
  if (gd > 0.0) {
    throw Error("variational integration started on an outward ray");
  }
  if (rk.initial_step <= 0.0) {
    rk.initial_step = std::clamp(0.2 * std::abs(gd), 1e-7, rk.max_step);
  }
}

PhasePoint phase_of(const OdeState<6>& y) {
  return PhasePoint({y[0], y[1]}, y[2]);
}

VariationalState var_of(const OdeState<6>& y) { return {y[3], y[4], y[5]}; }

}  // namespace

VariationalPath variational_flow(const ThermostatField& field,
                                 const PhasePoint& p0,
                                 const VariationalState& xi0, double T,
                                 const IntegrateOptions& options) {
  if (T <= 0.0) throw Error("variational_flow: duration must be positive");
  JointRhs rhs{field};
  OdeState<6> y0{p0.x.x, p0.x.y, p0.theta, xi0.a, xi0.b, xi0.c};
  detail::RkOptions rk = rk_from(options);
  if (joint_g(y0) >= -kBoundaryEps) boundary_start_guard(rhs, y0, rk);

  VariationalPath path;
  auto observe = [&](double t, const OdeState<6>& y) {
    if (options.record) {
      path.times.push_back(t);
      path.phases.push_back(phase_of(y));
      path.states.push_back(var_of(y));
    }
  };
  const auto res =
      detail::integrate_adaptive<6>(rhs, y0, T, rk, true, joint_g, observe);
  path.n_steps = res.n_steps;
  switch (res.stop) {
    case detail::RkStop::ReachedTmax:
      path.end_phase = phase_of(res.y);
      path.end_state = var_of(res.y);
      return path;
    case detail::RkStop::Event:
      throw Error("variational_flow: orbit reached the boundary at t = " +
                  std::to_string(res.t) + " before the requested duration");
    case detail::RkStop::StepLimit:
      throw StepLimitExceeded("variational_flow: step budget exhausted");
    case detail::RkStop::StepUnderflow:
      throw Error("variational_flow: step size underflow");
  }
  throw Error("variational_flow: unreachable");
}

VariationalExit variational_to_exit(const ThermostatField& field,
                                    const BoundaryRay& ray, double tmax,
                                    const IntegrateOptions& options) {
  if (!ray.inward()) {
    throw Error("variational_to_exit: ray must point inward");
  }
  const PhasePoint p0 = ray.to_phase();
  const VariationalState xi0 = vertical_initial_state();
  JointRhs rhs{field};
  OdeState<6> y0{p0.x.x, p0.x.y, p0.theta, xi0.a, xi0.b, xi0.c};
  detail::RkOptions rk = rk_from(options);
  boundary_start_guard(rhs, y0, rk);

  const auto res = detail::integrate_adaptive<6>(
      rhs, y0, tmax, rk, true, joint_g, [](double, const OdeState<6>&) {});
  switch (res.stop) {
    case detail::RkStop::Event: {
      if (std::abs(joint_gdot(rhs, res.y)) < 1e-8) {
        throw NonTransversalExit(
            "variational orbit reaches the boundary tangentially");
      }
      VariationalExit out;
      out.exit_phase = phase_of(res.y);
      out.ray_out = BoundaryRay::from_phase(out.exit_phase);
      out.tau_tilde = res.t;
      out.exit_state = var_of(res.y);
      return out;
    }
    case detail::RkStop::ReachedTmax:
      throw TrappedOrbit("variational_to_exit: no boundary hit before tmax");
    case detail::RkStop::StepLimit:
      throw StepLimitExceeded("variational_to_exit: step budget exhausted");
    case detail::RkStop::StepUnderflow:
      throw Error("variational_to_exit: step size underflow");
  }
  throw Error("variational_to_exit: unreachable");
}

DAlphaResult d_alpha_of_V(const ThermostatField& field, const BoundaryRay& ray,
                          double fd_step, double tmax,
                          const IntegrateOptions& options) {
  if (!ray.inward()) throw Error("d_alpha_of_V: ray must point inward");
  const double h = std::min(fd_step, 0.1 * ray.glancing_distance());
  if (h <= 0.0) throw Error("d_alpha_of_V: ray too close to glancing");

  const VariationalExit ve = variational_to_exit(field, ray, tmax, options);

  const ScatterResult sp =
      scattering(field, BoundaryRay(ray.beta, ray.gamma + h), tmax, options);
  const ScatterResult sm =
      scattering(field, BoundaryRay(ray.beta, ray.gamma - h), tmax, options);
  if (sp.status != RayStatus::Ok || sm.status != RayStatus::Ok) {
    throw Error("d_alpha_of_V: finite-difference stencil left the clean set");
  }

  DAlphaResult out;
  out.tau_tilde = ve.tau_tilde;
  out.v_tau = (sp.tau_tilde - sm.tau_tilde) / (2.0 * h);

  out.f_variational = out.v_tau + ve.exit_state.a;
  out.g_variational = ve.exit_state.b;
  out.c_variational = ve.exit_state.c;

  const double dbeta =
      wrap_angle(sp.ray_out.beta - sm.ray_out.beta) / (2.0 * h);
  const double dgamma =
      wrap_angle(sp.ray_out.gamma - sm.ray_out.gamma) / (2.0 * h);
  const double bo = ve.ray_out.beta;
  // d/dbeta of (cos beta, sin beta, beta + gamma + pi/2) plus the fiber
  // direction, as a chart tangent vector at the exit phase point.
  const Vec3 zeta{dbeta * -std::sin(bo), dbeta * std::cos(bo),
                  dbeta + dgamma};
  const Vec3 comp = frame_components(field.metric, ve.exit_phase, zeta);
  const double lam_exit = field.lambda_value(ve.exit_phase);
  out.f_fd = comp[0];
  out.g_fd = comp[1];
  out.c_fd = comp[2] - lam_exit * comp[0];

  out.discrepancy = std::max({std::abs(out.f_fd - out.f_variational),
                              std::abs(out.g_fd - out.g_variational),
                              std::abs(out.c_fd - out.c_variational)});

  auto cancellation = [](double qp, double qm) {
    return (std::abs(qp) + std::abs(qm)) /
           (std::abs(qp - qm) + std::numeric_limits<double>::min());
  };
  out.fd_condition = std::max(
      {cancellation(sp.tau_tilde, sm.tau_tilde),
       cancellation(wrap_angle(sp.ray_out.beta - bo),
                    wrap_angle(sm.ray_out.beta - bo)),
       cancellation(sp.ray_out.gamma, sm.ray_out.gamma)});
  out.degraded = out.fd_condition > 1e6;
  return out;
}

namespace {

GlancingBranch glancing_branch(const ThermostatField& field, double beta,
                               double anchor, double gamma0, int levels,
                               double tmax, const IntegrateOptions& options) {
  GlancingBranch branch;
  branch.gamma_anchor = anchor;

  const BoundaryGeometry bg = boundary_geometry(field.metric, beta);
  const PhasePoint glance = BoundaryRay(beta, anchor).to_phase();
  const double vmu = (anchor == 0.0) ? 1.0 : -1.0;
  branch.pi_lambda =
      bg.second_fundamental_form - field.lambda_value(glance) * vmu;
  if (branch.pi_lambda <= 0.0) {
    throw ConvexityViolated("flow-adapted fundamental form <= 0 at beta = " +
                            std::to_string(beta));
  }

  std::vector<double> r(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    const double gk = gamma0 * std::ldexp(1.0, -k);
    if (gk <= kGlancingBand * 2.0) {
      throw Error("glancing_identity: extrapolation ladder enters the band");
    }
    const double gamma = (anchor == 0.0) ? gk : kPi - gk;
    const ScatterResult sc =
        scattering(field, BoundaryRay(beta, gamma), tmax, options);
    if (sc.status != RayStatus::Ok) {
      throw Error("glancing_identity: scattering failed at gamma = " +
                  std::to_string(gamma));
    }
    r[static_cast<std::size_t>(k)] =
        (anchor == 0.0) ? sc.tau_tilde / gk : sc.tau_tilde / (-gk);
  }
  // Richardson over the halving ladder; one column per power of gamma.
  for (int j = 1; j < levels; ++j) {
    const double w = std::ldexp(1.0, j);
    for (int k = levels - 1; k >= j; --k) {
      r[static_cast<std::size_t>(k)] =
          (w * r[static_cast<std::size_t>(k)] -
           r[static_cast<std::size_t>(k - 1)]) /
          (w - 1.0);
    }
  }
  branch.v_tau = r[static_cast<std::size_t>(levels - 1)];

  const double value = branch.pi_lambda * branch.v_tau;
  branch.sign = value >= 0.0 ? +1 : -1;
  branch.residual = std::abs(value - 2.0 * branch.sign);
  return branch;
}

}  // namespace

GlancingIdentity glancing_identity(const ThermostatField& field, double beta,
                                   double gamma0, int levels,
                                   const IntegrateOptions& options) {
  if (levels < 2 || levels > 12) {
    throw Error("glancing_identity: levels out of range");
  }
  GlancingIdentity out;
  out.gamma0 = gamma0;
  out.levels = levels;
  out.at_zero =
      glancing_branch(field, beta, 0.0, gamma0, levels, 1e3, options);
  out.at_pi = glancing_branch(field, beta, kPi, gamma0, levels, 1e3, options);
  out.max_residual = std::max(out.at_zero.residual, out.at_pi.residual);
  return out;
}

ConjugatePointScan conjugate_point_scan(const ConformalMetric& m, int n_rays,
                                        double tmax,
                                        const IntegrateOptions& options) {
  if (n_rays < 1) throw Error("conjugate_point_scan: need at least one ray");
  const ThermostatField field{m, LambdaPreset::zero()};

  struct RayRecord {
    BoundaryRay ray;
    bool trapped = false;
    bool conjugate = false;
    double exit_b = std::numeric_limits<double>::infinity();
    double interior_b = std::numeric_limits<double>::infinity();
  };
  std::vector<RayRecord> records(static_cast<std::size_t>(n_rays));

  // Eight fixed inclinations staggered around the boundary circle.
  parallel_for(records.size(), [&](std::size_t i) {
    RayRecord& rec = records[i];
    const double beta = kTwoPi * static_cast<double>(i) / n_rays;
    const double gamma = kPi * static_cast<double>(i % 8 + 1) / 9.0;
    rec.ray = BoundaryRay(beta, gamma);

    JointRhs rhs{field};
    const PhasePoint p0 = rec.ray.to_phase();
    OdeState<6> y0{p0.x.x, p0.x.y, p0.theta, 0.0, 0.0, 1.0};
    detail::RkOptions rk = rk_from(options);
    boundary_start_guard(rhs, y0, rk);

    auto observe = [&](double t, const OdeState<6>& y) {
      if (t > 1e-9) rec.interior_b = std::min(rec.interior_b, y[4]);
    };
    const auto res = detail::integrate_adaptive<6>(rhs, y0, tmax, rk, true,
                                                   joint_g, observe);
    if (res.stop == detail::RkStop::Event) {
      rec.exit_b = res.y[4];
      rec.conjugate = rec.interior_b <= 0.0 || rec.exit_b <= 0.0;
    } else {
      rec.trapped = true;
    }
  });

  ConjugatePointScan scan;
  scan.n_rays = n_rays;
  scan.min_exit_b = std::numeric_limits<double>::infinity();
  scan.min_interior_b = std::numeric_limits<double>::infinity();
  for (const RayRecord& rec : records) {
    if (rec.trapped) {
      ++scan.trapped_count;
      scan.worst_ray = rec.ray;
      continue;
    }
    if (rec.conjugate) ++scan.conjugate_count;
    scan.min_exit_b = std::min(scan.min_exit_b, rec.exit_b);
    if (rec.interior_b < scan.min_interior_b) {
      scan.min_interior_b = rec.interior_b;
      scan.worst_ray = rec.ray;
    }
  }
  scan.simple = scan.trapped_count == 0 && scan.conjugate_count == 0;
  return scan;
}

}  // namespace twistorlab
