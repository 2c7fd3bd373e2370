#include "twistorlab/flow.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "twistorlab/detail/dopri5.hpp"

namespace twistorlab {

namespace {

enum class LambdaKind { Zero, Constant, FromConformalFactor };

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

struct LambdaPreset::Impl {
  LambdaKind kind = LambdaKind::Zero;
  double c = 0.0;
  ConformalFactor factor;
};

LambdaPreset::LambdaPreset() : impl_(std::make_shared<Impl>()) {}

LambdaPreset LambdaPreset::zero() { return LambdaPreset(); }

LambdaPreset LambdaPreset::constant(double c) {
  LambdaPreset out;
  auto impl = std::make_shared<Impl>();
  impl->kind = LambdaKind::Constant;
  impl->c = c;
  out.impl_ = std::move(impl);
  return out;
}

LambdaPreset LambdaPreset::from_conformal_factor(const ConformalFactor& fac) {
  LambdaPreset out;
  auto impl = std::make_shared<Impl>();
  impl->kind = LambdaKind::FromConformalFactor;
  impl->factor = fac;
  out.impl_ = std::move(impl);
  return out;
}

LambdaPreset LambdaPreset::parse(const std::string& spec) {
  if (spec.empty() || spec == "zero") return zero();
  if (spec.rfind("const:", 0) == 0) {
    try {
      return constant(std::stod(spec.substr(6)));
    } catch (const std::exception&) {
      throw SpecParseError("bad lambda spec: " + spec);
    }
  }
  if (spec.rfind("conf:", 0) == 0) {
    return from_conformal_factor(ConformalFactor::parse(spec.substr(5)));
  }
  throw SpecParseError("unknown lambda spec: " + spec);
}

std::string LambdaPreset::spec() const {
  switch (impl_->kind) {
    case LambdaKind::Zero:
      return "zero";
    case LambdaKind::Constant:
      return "const:" + format_number(impl_->c);
    case LambdaKind::FromConformalFactor:
      return "conf:" + impl_->factor.spec();
  }
  return "zero";
}

bool LambdaPreset::is_zero() const {
  switch (impl_->kind) {
    case LambdaKind::Zero:
      return true;
    case LambdaKind::Constant:
      return impl_->c == 0.0;
    case LambdaKind::FromConformalFactor:
      return impl_->factor.is_identically_zero();
  }
  return true;
}

const ConformalFactor& LambdaPreset::conformal_factor() const {
  if (impl_->kind != LambdaKind::FromConformalFactor) {
    throw Error("lambda preset does not wrap a conformal factor");
  }
  return impl_->factor;
}

double LambdaPreset::value(const ConformalMetric& m, Vec2 x,
                           double theta) const {
  switch (impl_->kind) {
    case LambdaKind::Zero:
      return 0.0;
    case LambdaKind::Constant:
      return impl_->c;
    case LambdaKind::FromConformalFactor: {
      // lambda = d(sigma')(v_perp) with v_perp = e^{-sigma}(-sin, cos).
      const Vec2 g = impl_->factor.gradient(x);
      const double e = std::exp(-m.sigma.value(x));
      return e * (-g.x * std::sin(theta) + g.y * std::cos(theta));
    }
  }
  return 0.0;
}

double LambdaPreset::dtheta(const ConformalMetric& m, Vec2 x,
                            double theta) const {
  switch (impl_->kind) {
    case LambdaKind::Zero:
    case LambdaKind::Constant:
      return 0.0;
    case LambdaKind::FromConformalFactor: {
      const Vec2 g = impl_->factor.gradient(x);
      const double e = std::exp(-m.sigma.value(x));
      return e * (-g.x * std::cos(theta) - g.y * std::sin(theta));
    }
  }
  return 0.0;
}

Vec2 LambdaPreset::grad_x(const ConformalMetric& m, Vec2 x,
                          double theta) const {
  switch (impl_->kind) {
    case LambdaKind::Zero:
    case LambdaKind::Constant:
      return {0.0, 0.0};
    case LambdaKind::FromConformalFactor: {
      const Vec2 g = impl_->factor.gradient(x);
      const auto h = impl_->factor.hessian(x);
      const Vec2 gs = m.sigma.gradient(x);
      const double e = std::exp(-m.sigma.value(x));
      const double s = std::sin(theta), c = std::cos(theta);
      const double core = -g.x * s + g.y * c;
      return {e * (-gs.x * core + (-h[0] * s + h[1] * c)),
              e * (-gs.y * core + (-h[1] * s + h[2] * c))};
    }
  }
  return {0.0, 0.0};
}

double ThermostatField::lambda_V(const PhasePoint& p) const {
  return lambda.dtheta(metric, p);
}

double ThermostatField::lambda_H(const PhasePoint& p) const {
  const Vec2 gx = lambda.grad_x(metric, p);
  const double dth = lambda.dtheta(metric, p);
  const Vec3 h = frame_vectors(metric, p).H;
  return h[0] * gx.x + h[1] * gx.y + h[2] * dth;
}

double ThermostatField::kappa(const PhasePoint& p) const {
  const double lam = lambda_value(p);
  return metric.curvature(p.x) - lambda_H(p) + lam * lam;
}

Vec3 ThermostatField::rhs(const PhasePoint& p) const {
  const Vec3 x = frame_vectors(metric, p).X;
  return {x[0], x[1], x[2] + lambda_value(p)};
}

ThermostatField parse_field(const std::string& metric_spec,
                            const std::string& lambda_spec) {
  return {ConformalMetric::parse(metric_spec),
          LambdaPreset::parse(lambda_spec)};
}

namespace {

using detail::OdeState;

// Chart right-hand side of dir * (X + lambda V), valid slightly outside the
// disk because every conformal factor extends to the plane.
struct RawRhs {
  const ThermostatField& field;
  double dir;

  void operator()(const OdeState<3>& y, OdeState<3>& dy) const {
    const Vec2 x{y[0], y[1]};
    const double theta = y[2];
    const double c = std::cos(theta), s = std::sin(theta);
    const Vec2 gs = field.metric.sigma.gradient(x);
    const double e = std::exp(-field.metric.sigma.value(x));
    const double lam = field.lambda.value(field.metric, x, theta);
    dy[0] = dir * e * c;
    dy[1] = dir * e * s;
    dy[2] = dir * (e * (-s * gs.x + c * gs.y) + lam);
  }
};

double event_g(const OdeState<3>& y) { return y[0] * y[0] + y[1] * y[1] - 1.0; }

double event_gdot(const RawRhs& rhs, const OdeState<3>& y) {
  OdeState<3> dy;
  rhs(y, dy);
  return 2.0 * (y[0] * dy[0] + y[1] * dy[1]);
}

}  // namespace

Trajectory integrate_orbit(const ThermostatField& field, const PhasePoint& p,
                           double tmax, int direction,
                           const IntegrateOptions& options) {
  if (direction != 1 && direction != -1) {
    throw Error("integrate_orbit: direction must be +1 or -1");
  }
  if (tmax <= 0.0) throw Error("integrate_orbit: tmax must be positive");

  RawRhs rhs{field, static_cast<double>(direction)};
  OdeState<3> y0{p.x.x, p.x.y, p.theta};

  detail::RkOptions rk;
  rk.rel_tol = options.rel_tol;
  rk.abs_tol = options.abs_tol;
  rk.max_step = options.max_step;
  rk.initial_step = options.initial_step;
  rk.max_steps = options.max_steps;

  Trajectory traj;
  traj.end_state = p;

  const double g0 = event_g(y0);
  if (g0 >= -kBoundaryEps) {
    const double gd = event_gdot(rhs, y0);
    if (std::abs(gd) < 1e-8) {
      throw NonTransversalExit("orbit starts tangent to the boundary");
    }
    if (gd > 0.0) {
      // Already on the boundary and moving out: the exit is immediate.
      traj.exit = ExitData{0.0, p, BoundaryRay::from_phase(p)};
      if (options.record) {
        traj.times.push_back(0.0);
        traj.states.push_back(p);
      }
      return traj;
    }
    if (rk.initial_step <= 0.0) {
      // A nearly glancing entry dips across the boundary region for a time
      // of order |g'(0)|; resolve it so the exit is not stepped over.
      rk.initial_step =
          std::clamp(0.2 * std::abs(gd), 1e-7, options.max_step);
    }
  }

  auto observe = [&](double t, const OdeState<3>& y) {
    if (options.record) {
      traj.times.push_back(t);
      traj.states.push_back(PhasePoint({y[0], y[1]}, y[2]));
    }
  };

  const auto res = detail::integrate_adaptive<3>(rhs, y0, tmax, rk, true,
                                                 event_g, observe);
  traj.n_steps = res.n_steps;
  traj.end_time = res.t;

  switch (res.stop) {
    case detail::RkStop::Event: {
      const double gd = event_gdot(rhs, res.y);
      if (std::abs(gd) < 1e-8) {
        throw NonTransversalExit("orbit reaches the boundary tangentially");
      }
      PhasePoint q({res.y[0], res.y[1]}, res.y[2]);
      traj.end_state = q;
      traj.exit = ExitData{res.t, q, BoundaryRay::from_phase(q)};
      return traj;
    }
    case detail::RkStop::ReachedTmax:
      traj.end_state = PhasePoint({res.y[0], res.y[1]}, res.y[2]);
      return traj;
    case detail::RkStop::StepLimit:
      throw StepLimitExceeded("integrate_orbit: step budget exhausted at t = " +
                              std::to_string(res.t));
    case detail::RkStop::StepUnderflow:
      throw Error("integrate_orbit: step size underflow at t = " +
                  std::to_string(res.t));
  }
  throw Error("integrate_orbit: unreachable");
}

PhasePoint flow_for_time(const ThermostatField& field, const PhasePoint& p,
                         double t, const IntegrateOptions& options) {
  if (t == 0.0) return p;
  const int dir = t > 0.0 ? +1 : -1;
  RawRhs rhs{field, static_cast<double>(dir)};
  OdeState<3> y0{p.x.x, p.x.y, p.theta};

  detail::RkOptions rk;
  rk.rel_tol = options.rel_tol;
  rk.abs_tol = options.abs_tol;
  rk.max_step = options.max_step;
  rk.initial_step = options.initial_step;
  rk.max_steps = options.max_steps;

  const auto res = detail::integrate_adaptive<3>(
      rhs, y0, std::abs(t), rk, true, event_g,
      [](double, const OdeState<3>&) {});
  switch (res.stop) {
    case detail::RkStop::ReachedTmax:
      return PhasePoint({res.y[0], res.y[1]}, res.y[2]);
    case detail::RkStop::Event:
      throw Error("flow_for_time: orbit reached the boundary at t = " +
                  std::to_string(dir * res.t) + " before the requested time");
    case detail::RkStop::StepLimit:
      throw StepLimitExceeded("flow_for_time: step budget exhausted");
    case detail::RkStop::StepUnderflow:
      throw Error("flow_for_time: step size underflow");
  }
  throw Error("flow_for_time: unreachable");
}

std::string to_string(RayStatus s) {
  switch (s) {
    case RayStatus::Ok:
      return "ok";
    case RayStatus::Glancing:
      return "glancing";
    case RayStatus::Trapped:
      return "trapped";
    case RayStatus::NonTransversal:
      return "non_transversal";
    case RayStatus::Failed:
      return "failed";
  }
  return "failed";
}

RayStatus ray_status_from_string(const std::string& s) {
  if (s == "ok") return RayStatus::Ok;
  if (s == "glancing") return RayStatus::Glancing;
  if (s == "trapped") return RayStatus::Trapped;
  if (s == "non_transversal") return RayStatus::NonTransversal;
  if (s == "failed") return RayStatus::Failed;
  throw SpecParseError("unknown ray status: " + s);
}

ScatterResult scattering(const ThermostatField& field, const BoundaryRay& ray,
                         double tmax, const IntegrateOptions& options) {
  if (ray.glancing_distance() < kGlancingBand) {
    return {ray, 0.0, RayStatus::Glancing};
  }
  const int dir = ray.inward() ? +1 : -1;
  IntegrateOptions opts = options;
  opts.record = false;
  try {
    const Trajectory traj =
        integrate_orbit(field, ray.to_phase(), tmax, dir, opts);
    if (!traj.exit) {
      return {ray, 0.0, RayStatus::Trapped};
    }
    return {traj.exit->ray, dir * traj.exit->time, RayStatus::Ok};
  } catch (const NonTransversalExit&) {
    return {ray, 0.0, RayStatus::NonTransversal};
  } catch (const StepLimitExceeded&) {
    return {ray, 0.0, RayStatus::Failed};
  } catch (const Error&) {
    return {ray, 0.0, RayStatus::Failed};
  }
}

ScatteringTable scattering_table(const ThermostatField& field, int n_beta,
                                 int n_gamma, double tmax,
                                 const IntegrateOptions& options) {
  if (n_beta < 1 || n_gamma < 1) {
    throw Error("scattering_table: grid must be at least 1x1");
  }
  ScatteringTable table;
  table.n_beta = n_beta;
  table.n_gamma = n_gamma;
  table.entries.resize(static_cast<std::size_t>(n_beta) * n_gamma);
  parallel_for(table.entries.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / n_gamma;
    const int j = static_cast<int>(idx) % n_gamma;
    const double beta = kTwoPi * i / n_beta;
    const double gamma = kPi * (j + 1) / (n_gamma + 1);
    const BoundaryRay ray(beta, gamma);
    const ScatterResult r = scattering(field, ray, tmax, options);
    table.entries[idx] = {ray, r.ray_out, r.tau_tilde, r.status};
  });
  return table;
}

void ScatteringTable::write_csv(std::ostream& os) const {
  os << "beta,gamma,beta_out,gamma_out,tau_tilde,status\n";
  for (const Entry& e : entries) {
    os << format_number(e.ray_in.beta) << ',' << format_number(e.ray_in.gamma)
       << ',' << format_number(e.ray_out.beta) << ','
       << format_number(e.ray_out.gamma) << ',' << format_number(e.tau_tilde)
       << ',' << to_string(e.status) << '\n';
  }
}

ScatteringTable ScatteringTable::read_csv(std::istream& is) {
  ScatteringTable table;
  std::string line;
  if (!std::getline(is, line)) throw SpecParseError("empty scattering csv");
  // Rows are written beta-major, so the leading run of equal beta cells
  // recovers the gamma count and with it the grid shape.
  std::string first_beta;
  int leading_run = 0;
  bool run_open = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::array<std::string, 6> cells;
    int k = 0;
    while (k < 6 && std::getline(row, cell, ',')) cells[k++] = cell;
    if (k != 6) throw SpecParseError("bad scattering csv row: " + line);
    try {
      Entry e;
      e.ray_in = BoundaryRay(std::stod(cells[0]), std::stod(cells[1]));
      e.ray_out = BoundaryRay(std::stod(cells[2]), std::stod(cells[3]));
      e.tau_tilde = std::stod(cells[4]);
      e.status = ray_status_from_string(cells[5]);
      table.entries.push_back(e);
    } catch (const SpecParseError&) {
      throw;
    } catch (const std::exception&) {
      throw SpecParseError("bad scattering csv row: " + line);
    }
    if (table.entries.size() == 1) first_beta = cells[0];
    if (run_open && cells[0] == first_beta) {
      ++leading_run;
    } else {
      run_open = false;
    }
  }
  if (leading_run > 0 &&
      table.entries.size() % static_cast<std::size_t>(leading_run) == 0) {
    table.n_gamma = leading_run;
    table.n_beta = static_cast<int>(table.entries.size()) / leading_run;
  }
  return table;
}

namespace {

enum class TauKind { Zero, RadialQuadratic };

}  // namespace

struct TauPreset::Impl {
  TauKind kind = TauKind::Zero;
  double s = 0.0;
};

TauPreset::TauPreset() : impl_(std::make_shared<Impl>()) {}

TauPreset TauPreset::zero() { return TauPreset(); }

TauPreset TauPreset::radial_quadratic(double s) {
  TauPreset out;
  auto impl = std::make_shared<Impl>();
  impl->kind = TauKind::RadialQuadratic;
  impl->s = s;
  out.impl_ = std::move(impl);
  return out;
}

TauPreset TauPreset::parse(const std::string& spec) {
  if (spec.empty() || spec == "zero") return zero();
  if (spec.rfind("radquad:", 0) == 0) {
    try {
      return radial_quadratic(std::stod(spec.substr(8)));
    } catch (const std::exception&) {
      throw SpecParseError("bad tau spec: " + spec);
    }
  }
  throw SpecParseError("unknown tau spec: " + spec);
}

std::string TauPreset::spec() const {
  if (impl_->kind == TauKind::Zero) return "zero";
  return "radquad:" + format_number(impl_->s);
}

bool TauPreset::is_zero() const {
  return impl_->kind == TauKind::Zero || impl_->s == 0.0;
}

double TauPreset::value(const PhasePoint& p) const {
  if (impl_->kind == TauKind::Zero) return 0.0;
  return impl_->s * (1.0 - p.x.norm2());
}

double TauPreset::along_X(const ConformalMetric& m, const PhasePoint& p) const {
  if (impl_->kind == TauKind::Zero) return 0.0;
  // X projects to v = e^{-sigma}(cos, sin) theta; grad tau = -2 s x.
  const double e = std::exp(-m.sigma.value(p.x));
  const Vec2 v{e * std::cos(p.theta), e * std::sin(p.theta)};
  return -2.0 * impl_->s * dot(p.x, v);
}

TimeChangeCheck time_change_check(const ConformalMetric& metric,
                                  const TauPreset& tau, const PhasePoint& p,
                                  double fd_step) {
  const ThermostatField field{metric, LambdaPreset::zero()};
  auto phi = [&](const PhasePoint& q) {
    return flow_for_time(field, q, tau.value(q));
  };

  const PhasePoint image = phi(p);
  const double h = fd_step;

  auto chart_derivative = [&](const PhasePoint& plus, const PhasePoint& minus) {
    return Vec3{(plus.x.x - minus.x.x) / (2.0 * h),
                (plus.x.y - minus.x.y) / (2.0 * h),
                wrap_angle(plus.theta - minus.theta) / (2.0 * h)};
  };

  // d phi (X): displace p along the flow itself.
  const PhasePoint xp = flow_for_time(field, p, h);
  const PhasePoint xm = flow_for_time(field, p, -h);
  const Vec3 dx = chart_derivative(phi(xp), phi(xm));
  const Vec3 comp_x = frame_components(metric, image, dx);

  // d phi (V): displace the fiber angle.
  const PhasePoint vp(p.x, p.theta + h);
  const PhasePoint vm(p.x, p.theta - h);
  const Vec3 dv = chart_derivative(phi(vp), phi(vm));
  const Vec3 comp_v = frame_components(metric, image, dv);

  TimeChangeCheck out;
  out.x_component = comp_x[0];
  out.h_component = comp_x[1];
  out.v_component = comp_x[2];
  out.x_residual = comp_x[0] - (1.0 + tau.along_X(metric, p));
  out.extension_defect = comp_v[1];
  return out;
}

}  // namespace twistorlab
