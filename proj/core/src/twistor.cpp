#include "twistorlab/twistor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include <Eigen/Dense>

namespace twistorlab {

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat4 mat4_identity() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  }
  return out;
}

}  // namespace

TwistorPoint::TwistorPoint(Complex z_, Complex mu_) : z(z_), mu(mu_) {
  if (std::abs(mu) > 1.0 + 1e-12) {
    throw Error("TwistorPoint: |mu| must not exceed 1");
  }
}

TwistorPoint twistor_of_phase(const PhasePoint& p) {
  return {p.x.to_complex(), Complex{std::cos(p.theta), std::sin(p.theta)}};
}

DbarFrame dbar_frame(const TwistorPoint& p) {
  const Complex mu2 = p.mu * p.mu;
  DbarFrame f;
  f.w1 = {Complex{0.5, 0.0} * (Complex{1.0, 0.0} + mu2),
          Complex{0.0, 0.5} * (Complex{1.0, 0.0} - mu2), Complex{0.0, 0.0},
          Complex{0.0, 0.0}};
  f.w2 = {Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{0.5, 0.0},
          Complex{0.0, 0.5}};
  return f;
}

int dbar_intersection_rank(const TwistorPoint& p, double threshold) {
  const DbarFrame f = dbar_frame(p);
  Eigen::Matrix<std::complex<double>, 4, 4> mat;
  for (int i = 0; i < 4; ++i) {
    mat(i, 0) = f.w1[static_cast<std::size_t>(i)];
    mat(i, 1) = f.w2[static_cast<std::size_t>(i)];
    mat(i, 2) = std::conj(f.w1[static_cast<std::size_t>(i)]);
    mat(i, 3) = std::conj(f.w2[static_cast<std::size_t>(i)]);
  }
  Eigen::JacobiSVD<Eigen::Matrix<std::complex<double>, 4, 4>> svd(mat);
  const auto& sv = svd.singularValues();
  const double cut = threshold * std::max(sv(0), 1.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  // dim(A) + dim(B) - dim(A + B) with dim(A) = dim(B) = 2.
  return 4 - rank;
}

struct TwistorMap::Atom {
  enum class Kind {
    Rotation,
    Translation,
    Antipodal,
    Scaling,
    Shear,
    ConjShear
  };
  Kind kind = Kind::Antipodal;
  double s = 0.0;
  Complex c{0.0, 0.0};

  TwistorPoint apply(const TwistorPoint& p) const {
    switch (kind) {
      case Kind::Rotation: {
        const Complex r{std::cos(s), std::sin(s)};
        return {r * p.z, r * p.mu};
      }
      case Kind::Translation:
        return {p.z + c, p.mu};
      case Kind::Antipodal:
        return {p.z, -p.mu};
      case Kind::Scaling:
        return {std::sqrt(s) * p.z, p.mu};
      case Kind::Shear: {
        const double q = 1.0 + std::norm(p.mu);
        return {p.z + Complex{0.0, s} * p.mu / q, p.mu};
      }
      case Kind::ConjShear:
        return {p.z + s * std::conj(p.mu), p.mu};
    }
    return p;
  }

  Mat4 jacobian(const TwistorPoint& p) const {
    Mat4 j = mat4_identity();
    switch (kind) {
      case Kind::Rotation: {
        const double co = std::cos(s), si = std::sin(s);
        j[0][0] = co;
        j[0][1] = -si;
        j[1][0] = si;
        j[1][1] = co;
        j[2][2] = co;
        j[2][3] = -si;
        j[3][2] = si;
        j[3][3] = co;
        break;
      }
      case Kind::Translation:
        break;
      case Kind::Antipodal:
        j[2][2] = -1.0;
        j[3][3] = -1.0;
        break;
      case Kind::Scaling:
        j[0][0] = std::sqrt(s);
        j[1][1] = std::sqrt(s);
        break;
      case Kind::Shear: {
        const double a = p.mu.real(), b = p.mu.imag();
        const double q = 1.0 + a * a + b * b;
        const double q2 = q * q;
        j[0][2] = 2.0 * a * b * s / q2;
        j[0][3] = s * (b * b - a * a - 1.0) / q2;
        j[1][2] = s * (1.0 + b * b - a * a) / q2;
        j[1][3] = -2.0 * a * b * s / q2;
        break;
      }
      case Kind::ConjShear:
        j[0][2] = s;
        j[1][3] = -s;
        break;
    }
    return j;
  }

  Atom inverted() const {
    Atom out = *this;
    switch (kind) {
      case Kind::Rotation:
      case Kind::Shear:
      case Kind::ConjShear:
        out.s = -s;
        break;
      case Kind::Translation:
        out.c = -c;
        break;
      case Kind::Antipodal:
        break;
      case Kind::Scaling:
        out.s = 1.0 / s;
        break;
    }
    return out;
  }

  std::string spec() const {
    switch (kind) {
      case Kind::Rotation:
        return "rot:" + format_number(s);
      case Kind::Translation:
        return "trans:" + format_number(c.real()) + ":" +
               format_number(c.imag());
      case Kind::Antipodal:
        return "antipodal";
      case Kind::Scaling:
        return "scale:" + format_number(s);
      case Kind::Shear:
        return "shear:" + format_number(s);
      case Kind::ConjShear:
        return "badshear:" + format_number(s);
    }
    return "antipodal";
  }
};

TwistorMap::TwistorMap() = default;
TwistorMap::TwistorMap(const TwistorMap&) = default;
TwistorMap::TwistorMap(TwistorMap&&) noexcept = default;
TwistorMap& TwistorMap::operator=(const TwistorMap&) = default;
TwistorMap& TwistorMap::operator=(TwistorMap&&) noexcept = default;
TwistorMap::~TwistorMap() = default;

TwistorMap TwistorMap::rotation(double omega) {
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::Rotation, omega, {}});
  return m;
}

TwistorMap TwistorMap::translation(Complex c) {
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::Translation, 0.0, c});
  return m;
}

TwistorMap TwistorMap::antipodal() {
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::Antipodal, 0.0, {}});
  return m;
}

TwistorMap TwistorMap::scaling(double c) {
  if (c <= 0.0) throw Error("TwistorMap: scaling needs a positive constant");
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::Scaling, c, {}});
  return m;
}

TwistorMap TwistorMap::shear(double s) {
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::Shear, s, {}});
  return m;
}

TwistorMap TwistorMap::conjugate_shear(double s) {
  TwistorMap m;
  m.atoms_.push_back({Atom::Kind::ConjShear, s, {}});
  return m;
}

TwistorMap TwistorMap::compose(std::vector<TwistorMap> maps) {
  TwistorMap out;
  for (TwistorMap& m : maps) {
    out.atoms_.insert(out.atoms_.end(), m.atoms_.begin(), m.atoms_.end());
  }
  return out;
}

TwistorMap TwistorMap::parse(const std::string& spec) {
  TwistorMap out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t bar = spec.find('|', pos);
    const std::string tok = spec.substr(
        pos, bar == std::string::npos ? std::string::npos : bar - pos);
    auto number = [&](const std::string& text) {
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw Error("trailing characters");
        return v;
      } catch (const std::exception&) {
        throw SpecParseError("bad twistor map spec: " + spec);
      }
    };
    if (tok == "antipodal") {
      out.atoms_.push_back({Atom::Kind::Antipodal, 0.0, {}});
    } else if (tok.rfind("rot:", 0) == 0) {
      out.atoms_.push_back({Atom::Kind::Rotation, number(tok.substr(4)), {}});
    } else if (tok.rfind("scale:", 0) == 0) {
      const double c = number(tok.substr(6));
      if (c <= 0.0) throw SpecParseError("bad twistor map spec: " + spec);
      out.atoms_.push_back({Atom::Kind::Scaling, c, {}});
    } else if (tok.rfind("shear:", 0) == 0) {
      out.atoms_.push_back({Atom::Kind::Shear, number(tok.substr(6)), {}});
    } else if (tok.rfind("badshear:", 0) == 0) {
      out.atoms_.push_back({Atom::Kind::ConjShear, number(tok.substr(9)), {}});
    } else if (tok.rfind("trans:", 0) == 0) {
      const std::string rest = tok.substr(6);
      const std::size_t colon = rest.find(':');
      if (colon == std::string::npos) {
        throw SpecParseError("bad twistor map spec: " + spec);
      }
      out.atoms_.push_back(
          {Atom::Kind::Translation, 0.0,
           Complex{number(rest.substr(0, colon)),
                   number(rest.substr(colon + 1))}});
    } else {
      throw SpecParseError("unknown twistor map spec: " + spec);
    }
    if (bar == std::string::npos) break;
    pos = bar + 1;
  }
  return out;
}

std::string TwistorMap::spec() const {
  if (atoms_.empty()) return "trans:0:0";
  std::string out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out += '|';
    out += atoms_[i].spec();
  }
  return out;
}

TwistorPoint TwistorMap::apply(const TwistorPoint& p) const {
  TwistorPoint q = p;
  for (const Atom& a : atoms_) q = a.apply(q);
  return q;
}

Mat4 TwistorMap::jacobian(const TwistorPoint& p) const {
  Mat4 j = mat4_identity();
  TwistorPoint q = p;
  for (const Atom& a : atoms_) {
    j = mat4_mul(a.jacobian(q), j);
    q = a.apply(q);
  }
  return j;
}

TwistorMap TwistorMap::inverse() const {
  TwistorMap out;
  out.atoms_.reserve(atoms_.size());
  for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it) {
    out.atoms_.push_back(it->inverted());
  }
  return out;
}

CVec4 push_forward(const Mat4& jac, const CVec4& v) {
  CVec4 out{};
  for (int i = 0; i < 4; ++i) {
    Complex acc{0.0, 0.0};
    for (int j = 0; j < 4; ++j) {
      acc += jac[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             v[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

double holomorphy_residual(const TwistorMap& map, const TwistorPoint& p) {
  const TwistorPoint q = map.apply(p);
  const Mat4 jac = map.jacobian(p);
  const DbarFrame source = dbar_frame(p);
  const DbarFrame target = dbar_frame(q);

  Eigen::Matrix<std::complex<double>, 4, 2> basis;
  for (int i = 0; i < 4; ++i) {
    basis(i, 0) = target.w1[static_cast<std::size_t>(i)];
    basis(i, 1) = target.w2[static_cast<std::size_t>(i)];
  }
  const auto qr = basis.colPivHouseholderQr();

  auto residual = [&](const CVec4& v) {
    const CVec4 pushed = push_forward(jac, v);
    Eigen::Matrix<std::complex<double>, 4, 1> rhs;
    for (int i = 0; i < 4; ++i) rhs(i) = pushed[static_cast<std::size_t>(i)];
    const auto sol = qr.solve(rhs);
    const double nrm = rhs.norm();
    if (nrm < 1e-300) return 0.0;
    return (basis * sol - rhs).norm() / nrm;
  };
  return std::max(residual(source.w1), residual(source.w2));
}

HolomorphicFunctionEuclid::HolomorphicFunctionEuclid() = default;

HolomorphicFunctionEuclid::HolomorphicFunctionEuclid(std::vector<Term> terms) {
  // Canonicalize: merge duplicate powers, drop zeros.
  std::map<std::pair<int, int>, Complex> merged;
  for (const Term& t : terms) {
    if (t.i < 0 || t.j < 0) throw Error("invariant powers must be >= 0");
    merged[{t.i, t.j}] += t.coef;
  }
  for (const auto& [key, coef] : merged) {
    if (std::abs(coef) > 0.0) {
      terms_.push_back({coef, key.first, key.second});
    }
  }
  verify_annihilation();
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::constant(Complex c) {
  return HolomorphicFunctionEuclid(std::vector<Term>{{c, 0, 0}});
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::mu() {
  return HolomorphicFunctionEuclid(
      std::vector<Term>{{Complex{1.0, 0.0}, 1, 0}});
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::chord() {
  return HolomorphicFunctionEuclid(
      std::vector<Term>{{Complex{1.0, 0.0}, 0, 1}});
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::from_zero_section(
    const std::vector<Complex>& h) {
  std::vector<Term> terms;
  for (std::size_t k = 0; k < h.size(); ++k) {
    terms.push_back({h[k], 0, static_cast<int>(k)});
  }
  return HolomorphicFunctionEuclid(std::move(terms));
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::fiber_linear(
    const std::vector<Complex>& a) {
  std::vector<Term> terms;
  for (std::size_t k = 0; k < a.size(); ++k) {
    terms.push_back({a[k], 1, static_cast<int>(k)});
  }
  return HolomorphicFunctionEuclid(std::move(terms));
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::operator+(
    const HolomorphicFunctionEuclid& other) const {
  std::vector<Term> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return HolomorphicFunctionEuclid(std::move(terms));
}

HolomorphicFunctionEuclid HolomorphicFunctionEuclid::operator*(
    const HolomorphicFunctionEuclid& other) const {
  std::vector<Term> terms;
  for (const Term& s : terms_) {
    for (const Term& t : other.terms_) {
      terms.push_back({s.coef * t.coef, s.i + t.i, s.j + t.j});
    }
  }
  return HolomorphicFunctionEuclid(std::move(terms));
}

namespace {

Complex cpow(Complex base, int n) {
  Complex acc{1.0, 0.0};
  for (int k = 0; k < n; ++k) acc *= base;
  return acc;
}

}  // namespace

Complex HolomorphicFunctionEuclid::value(const TwistorPoint& p) const {
  const Complex u1 = p.mu;
  const Complex u2 = p.z - p.mu * p.mu * std::conj(p.z);
  Complex acc{0.0, 0.0};
  for (const Term& t : terms_) {
    acc += t.coef * cpow(u1, t.i) * cpow(u2, t.j);
  }
  return acc;
}

double HolomorphicFunctionEuclid::dbar_residual(const TwistorPoint& p) const {
  const Complex u1 = p.mu;
  const Complex u2 = p.z - p.mu * p.mu * std::conj(p.z);
  const Complex mu2 = p.mu * p.mu;

  // Wirtinger pieces of W1 f and W2 f accumulated per term, so the analytic
  // cancellation happens in floating point rather than by construction.
  Complex dzbar{0.0, 0.0}, dz{0.0, 0.0}, dmubar{0.0, 0.0};
  double scale = 1.0;
  for (const Term& t : terms_) {
    const Complex pu2 =
        t.j > 0 ? t.coef * cpow(u1, t.i) * static_cast<double>(t.j) *
                      cpow(u2, t.j - 1)
                : Complex{0.0, 0.0};
    dzbar += pu2 * (-mu2);
    dz += pu2;
    scale += std::abs(pu2);
    // u1 and u2 are independent of conj(mu); the derivative vanishes
    // termwise.
    dmubar += Complex{0.0, 0.0};
  }
  const Complex w1f = dzbar + mu2 * dz;
  return (std::abs(w1f) + std::abs(dmubar)) / scale;
}

Complex HolomorphicFunctionEuclid::zero_section_value(Complex z) const {
  Complex acc{0.0, 0.0};
  for (const Term& t : terms_) {
    if (t.i == 0) acc += t.coef * cpow(z, t.j);
  }
  return acc;
}

Complex HolomorphicFunctionEuclid::fiber_linear_coefficient(Complex z) const {
  Complex acc{0.0, 0.0};
  for (const Term& t : terms_) {
    if (t.i == 1) acc += t.coef * cpow(z, t.j);
  }
  return acc;
}

bool HolomorphicFunctionEuclid::odd_in_mu() const {
  for (const Term& t : terms_) {
    if (t.i % 2 == 0) return false;
  }
  return true;
}

void HolomorphicFunctionEuclid::verify_annihilation() const {
  for (int k = 0; k < 12; ++k) {
    const double zr = 0.8 * std::cos(0.7 * k + 0.3);
    const double zi = 0.8 * std::sin(0.7 * k + 0.3);
    const double radius = (k % 4 == 3) ? 1.0 : 0.3 * (k % 4);
    const Complex mu{radius * std::cos(1.1 * k), radius * std::sin(1.1 * k)};
    const TwistorPoint p{Complex{zr, zi}, mu};
    if (dbar_residual(p) > 1e-12) {
      throw Error("holomorphic invariant polynomial fails annihilation");
    }
  }
}

HolomorphicFunctionEuclid pestov_uhlmann_euclid(
    const std::vector<Complex>& h) {
  return HolomorphicFunctionEuclid::from_zero_section(h);
}

HolomorphicFunctionEuclid pestov_uhlmann_oneform_euclid(
    const std::vector<Complex>& a) {
  return HolomorphicFunctionEuclid::fiber_linear(a);
}

InvariantExtensionReport invariant_extension_check(
    const ThermostatField& field,
    const std::function<Complex(const BoundaryRay&)>& datum,
    const std::vector<Vec2>& probe_points, int n_modes, double tmax,
    const IntegrateOptions& options) {
  if (n_modes < 4) throw Error("invariant_extension_check: n_modes too small");
  InvariantExtensionReport report;
  report.probes.resize(probe_points.size());

  IntegrateOptions opts = options;
  opts.record = false;

  auto transported = [&](const PhasePoint& p) {
    const Trajectory traj = integrate_orbit(field, p, tmax, +1, opts);
    if (!traj.exit) {
      throw TrappedOrbit("invariant_extension_check: orbit did not exit");
    }
    return datum(traj.exit->ray);
  };

  parallel_for(probe_points.size(), [&](std::size_t idx) {
    const Vec2 x = probe_points[idx];
    if (x.norm() > 1.0 - 1e-6) {
      throw Error("invariant_extension_check: probe too close to the boundary");
    }
    const int nodes = 2 * n_modes + 1;
    std::vector<Complex> samples(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
      samples[static_cast<std::size_t>(j)] =
          transported(PhasePoint(x, kTwoPi * j / nodes));
    }
    InvariantExtensionReport::Probe probe;
    probe.x = x;
    probe.fiber = FourierSeries::from_samples(samples);
    probe.verdict = is_fibrewise_holomorphic(probe.fiber);

    const PhasePoint p0(x, 0.37);
    const double h = 1e-3;
    const Complex u0 = transported(p0);
    const Complex u1 = transported(flow_for_time(field, p0, h, opts));
    probe.orbit_constancy_defect = std::abs(u1 - u0) / h;
    report.probes[idx] = std::move(probe);
  });

  for (const auto& probe : report.probes) {
    report.max_negative_relative = std::max(
        report.max_negative_relative, probe.verdict.relative_magnitude);
    report.max_constancy_defect =
        std::max(report.max_constancy_defect, probe.orbit_constancy_defect);
  }
  report.fibrewise_holomorphic = report.max_negative_relative <= kHardyTol;
  return report;
}

SmMap::SmMap() : fn_([](const PhasePoint& p) { return p; }), name_("identity") {}

SmMap SmMap::identity() { return SmMap(); }

SmMap SmMap::rotation(double omega) {
  SmMap m;
  const double co = std::cos(omega), si = std::sin(omega);
  m.fn_ = [co, si, omega](const PhasePoint& p) {
    return PhasePoint({co * p.x.x - si * p.x.y, si * p.x.x + co * p.x.y},
                      p.theta + omega);
  };
  m.name_ = "rotation:" + format_number(omega);
  return m;
}

SmMap SmMap::antipodal() {
  SmMap m;
  m.fn_ = [](const PhasePoint& p) {
    return PhasePoint(p.x, p.theta + kPi);
  };
  m.name_ = "antipodal";
  return m;
}

SmMap SmMap::custom(std::function<PhasePoint(const PhasePoint&)> fn,
                    std::string name) {
  SmMap m;
  m.fn_ = std::move(fn);
  m.name_ = std::move(name);
  return m;
}

PhasePoint SmMap::apply(const PhasePoint& p) const { return fn_(p); }

OrbitEquivalenceReport orbit_equivalence_conditions(
    const ConformalMetric& m1, const ConformalMetric& m2, const SmMap& phi,
    const std::vector<PhasePoint>& probes, double fd_step) {
  OrbitEquivalenceReport report;
  report.probes.reserve(probes.size());

  auto push = [&](const PhasePoint& p, const Vec3& xi) {
    const double h = fd_step;
    const PhasePoint plus({p.x.x + h * xi[0], p.x.y + h * xi[1]},
                          p.theta + h * xi[2]);
    const PhasePoint minus({p.x.x - h * xi[0], p.x.y - h * xi[1]},
                           p.theta - h * xi[2]);
    const PhasePoint qp = phi.apply(plus);
    const PhasePoint qm = phi.apply(minus);
    return Vec3{(qp.x.x - qm.x.x) / (2.0 * h), (qp.x.y - qm.x.y) / (2.0 * h),
                wrap_angle(qp.theta - qm.theta) / (2.0 * h)};
  };

  for (const PhasePoint& p : probes) {
    OrbitEquivalenceReport::Probe rec;
    rec.p = p;
    const PhasePoint q = phi.apply(p);

    const Vec3 xi_x = frame_vectors(m1, p).X;
    const Vec3 dx = push(p, xi_x);
    rec.dphi_x = frame_components(m2, q, dx);

    const Vec3 dv = push(p, Vec3{0.0, 0.0, 1.0});
    rec.dphi_v = frame_components(m2, q, dv);

    const double nx = std::sqrt(sqr(rec.dphi_x[0]) + sqr(rec.dphi_x[1]) +
                                sqr(rec.dphi_x[2]));
    const double nv = std::sqrt(sqr(rec.dphi_v[0]) + sqr(rec.dphi_v[1]) +
                                sqr(rec.dphi_v[2]));
    rec.x_defect = nx > 1e-300
                       ? std::hypot(rec.dphi_x[1], rec.dphi_x[2]) / nx
                       : 0.0;
    rec.v_defect = nv > 1e-300 ? std::abs(rec.dphi_v[1]) / nv : 0.0;

    report.max_x_defect = std::max(report.max_x_defect, rec.x_defect);
    report.max_v_defect = std::max(report.max_v_defect, rec.v_defect);
    report.probes.push_back(rec);
  }
  return report;
}

}  // namespace twistorlab
