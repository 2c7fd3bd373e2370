#include "twistorlab/circle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twistorlab {

FourierSeries::FourierSeries(int n) : n_(n) {
  if (n < 1) throw Error("FourierSeries: need at least one mode");
  c_.assign(static_cast<std::size_t>(2 * n + 1), Complex{0.0, 0.0});
}

FourierSeries FourierSeries::from_samples(const std::vector<Complex>& samples) {
  const std::size_t m = samples.size();
  if (m < 3 || m % 2 == 0) {
    throw Error("FourierSeries: sample count must be odd and >= 3");
  }
  const int n = static_cast<int>((m - 1) / 2);
  FourierSeries out(n);
  // Plain O(m^2) transform; m stays in the hundreds here and exactness of
  // the node count matters more than speed.
  const double w = kTwoPi / static_cast<double>(m);
  for (int k = -n; k <= n; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j < m; ++j) {
      const double ang = -w * static_cast<double>(k) * static_cast<double>(j);
      acc += samples[j] * Complex{std::cos(ang), std::sin(ang)};
    }
    out.c_[static_cast<std::size_t>(k + n)] = acc / static_cast<double>(m);
  }
  return out;
}

FourierSeries FourierSeries::sample(int n,
                                    const std::function<Complex(double)>& f) {
  if (n < 1) throw Error("FourierSeries: need at least one mode");
  const int m = 2 * n + 1;
  std::vector<Complex> samples(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    samples[static_cast<std::size_t>(j)] = f(kTwoPi * j / m);
  }
  FourierSeries out = from_samples(samples);
  const double scale = std::max(out.norm(), 1e-30);
  if (out.tail_magnitude() > kHardyTol * scale) {
    throw Error("FourierSeries: spectrum not resolved at N = " +
                std::to_string(n) + "; top mode " +
                std::to_string(out.tail_magnitude() / scale) +
                " of the norm");
  }
  return out;
}

Complex FourierSeries::coeff(int k) const {
  if (k < -n_ || k > n_) return {0.0, 0.0};
  return c_[static_cast<std::size_t>(k + n_)];
}

void FourierSeries::set_coeff(int k, Complex v) {
  if (k < -n_ || k > n_) throw Error("FourierSeries: mode out of range");
  c_[static_cast<std::size_t>(k + n_)] = v;
}

double FourierSeries::norm() const {
  double acc = 0.0;
  for (const Complex& v : c_) acc += std::norm(v);
  return std::sqrt(acc);
}

double FourierSeries::max_negative_magnitude() const {
  double acc = 0.0;
  for (int k = -n_; k < 0; ++k) {
    acc = std::max(acc, std::abs(coeff(k)));
  }
  return acc;
}

double FourierSeries::tail_magnitude() const {
  return std::max(std::abs(coeff(n_)), std::abs(coeff(-n_)));
}

double FourierSeries::reality_defect() const {
  double acc = 0.0;
  for (int k = 0; k <= n_; ++k) {
    acc = std::max(acc, std::abs(coeff(-k) - std::conj(coeff(k))));
  }
  return acc;
}

double FourierSeries::even_mode_magnitude() const {
  double acc = 0.0;
  for (int k = -n_; k <= n_; ++k) {
    if (k % 2 == 0) acc = std::max(acc, std::abs(coeff(k)));
  }
  return acc;
}

Complex FourierSeries::evaluate(double t) const {
  Complex acc{0.0, 0.0};
  for (int k = -n_; k <= n_; ++k) {
    acc += coeff(k) * Complex{std::cos(k * t), std::sin(k * t)};
  }
  return acc;
}

void to_json(nlohmann::json& j, const FourierSeries& f) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = -f.max_mode(); k <= f.max_mode(); ++k) {
    coeffs.push_back({f.coeff(k).real(), f.coeff(k).imag()});
  }
  j = nlohmann::json{{"n", f.max_mode()}, {"coefficients", coeffs}};
}

void from_json(const nlohmann::json& j, FourierSeries& f) {
  const int n = j.at("n").get<int>();
  const auto& coeffs = j.at("coefficients");
  if (static_cast<int>(coeffs.size()) != 2 * n + 1) {
    throw Error("FourierSeries: coefficient count does not match n");
  }
  f = FourierSeries(n);
  for (int k = -n; k <= n; ++k) {
    const auto& pair = coeffs.at(static_cast<std::size_t>(k + n));
    f.set_coeff(k, Complex{pair.at(0).get<double>(), pair.at(1).get<double>()});
  }
}

FourierSeries hardy_projection(const FourierSeries& f) {
  FourierSeries out = f;
  for (int k = -f.max_mode(); k < 0; ++k) {
    out.set_coeff(k, {0.0, 0.0});
  }
  return out;
}

HolomorphyVerdict is_fibrewise_holomorphic(const FourierSeries& f,
                                           double tol) {
  HolomorphyVerdict v;
  v.max_negative_magnitude = f.max_negative_magnitude();
  v.relative_magnitude =
      v.max_negative_magnitude / std::max(f.norm(), 1e-30);
  v.holomorphic = v.relative_magnitude <= tol;
  return v;
}

HolomorphicExtension::HolomorphicExtension(const FourierSeries& f,
                                           double tol) {
  const auto verdict = is_fibrewise_holomorphic(f, tol);
  if (!verdict.holomorphic) {
    throw NotHardy("negative modes of relative size " +
                   std::to_string(verdict.relative_magnitude) +
                   " block the holomorphic extension");
  }
  c_.resize(static_cast<std::size_t>(f.max_mode()) + 1);
  for (int k = 0; k <= f.max_mode(); ++k) {
    c_[static_cast<std::size_t>(k)] = f.coeff(k);
  }
}

Complex HolomorphicExtension::operator()(Complex mu) const {
  Complex acc{0.0, 0.0};
  for (std::size_t k = c_.size(); k-- > 0;) {
    acc = acc * mu + c_[k];
  }
  return acc;
}

Complex HolomorphicExtension::derivative(Complex mu) const {
  Complex acc{0.0, 0.0};
  for (std::size_t k = c_.size(); k-- > 1;) {
    acc = acc * mu + static_cast<double>(k) * c_[k];
  }
  return acc;
}

DiskAutomorphism::DiskAutomorphism(Complex a_, Complex u_) : a(a_), u(u_) {
  if (std::abs(a) >= 1.0) {
    throw Error("DiskAutomorphism: |a| must be < 1");
  }
  if (std::abs(std::abs(u) - 1.0) > 1e-9) {
    throw Error("DiskAutomorphism: |u| must be 1");
  }
}

Complex DiskAutomorphism::apply(Complex mu) const {
  return u * (mu - a) / (Complex{1.0, 0.0} - std::conj(a) * mu);
}

FourierSeries DiskAutomorphism::boundary_series(int n) const {
  return FourierSeries::sample(n, [this](double t) {
    return apply(Complex{std::cos(t), std::sin(t)});
  });
}

DiskAutomorphism fit_disk_automorphism(const HolomorphicExtension& ext) {
  // u (z - a) / (1 - conj(a) z) expands as
  //   -u a + u (1 - |a|^2) sum_{k >= 1} conj(a)^(k-1) z^k,
  // so conj(a) is the ratio of the quadratic and linear modes and the
  // linear mode then fixes u.  No iteration needed.
  const auto& c = ext.coefficients();
  const Complex c1 = c.size() > 1 ? c[1] : Complex{0.0, 0.0};
  const Complex c2 = c.size() > 2 ? c[2] : Complex{0.0, 0.0};
  if (std::abs(c1) < 1e-12) {
    throw Error("fit_disk_automorphism: vanishing linear mode");
  }
  const Complex a = std::conj(c2 / c1);
  if (std::abs(a) >= 1.0) {
    throw Error("fit_disk_automorphism: fitted pole inside the closed disk");
  }
  Complex u = c1 / (1.0 - std::norm(a));
  const double mag = std::abs(u);
  if (mag < 1e-12) {
    throw Error("fit_disk_automorphism: degenerate normalization");
  }
  u /= mag;
  return {a, u};
}

HarmonicExtension::HarmonicExtension(const FourierSeries& f) {
  pos_.resize(static_cast<std::size_t>(f.max_mode()) + 1);
  neg_.resize(static_cast<std::size_t>(f.max_mode()));
  for (int k = 0; k <= f.max_mode(); ++k) {
    pos_[static_cast<std::size_t>(k)] = f.coeff(k);
  }
  for (int k = 1; k <= f.max_mode(); ++k) {
    neg_[static_cast<std::size_t>(k - 1)] = f.coeff(-k);
  }
}

namespace {

Complex horner(const std::vector<Complex>& c, Complex x) {
  Complex acc{0.0, 0.0};
  for (std::size_t k = c.size(); k-- > 0;) {
    acc = acc * x + c[k];
  }
  return acc;
}

Complex horner_derivative(const std::vector<Complex>& c, Complex x) {
  Complex acc{0.0, 0.0};
  for (std::size_t k = c.size(); k-- > 1;) {
    acc = acc * x + static_cast<double>(k) * c[k];
  }
  return acc;
}

}  // namespace

Complex HarmonicExtension::operator()(Complex mu) const {
  const Complex mb = std::conj(mu);
  return horner(pos_, mu) + mb * horner(neg_, mb);
}

Complex HarmonicExtension::d_mu(Complex mu) const {
  return horner_derivative(pos_, mu);
}

Complex HarmonicExtension::d_mubar(Complex mu) const {
  const Complex mb = std::conj(mu);
  // d/d(mu-bar) of sum neg_[k-1] mb^k.
  Complex acc{0.0, 0.0};
  for (std::size_t k = neg_.size(); k-- > 0;) {
    acc = acc * mb + static_cast<double>(k + 1) * neg_[k];
  }
  return acc;
}

double HarmonicExtension::jacobian(Complex mu) const {
  return std::norm(d_mu(mu)) - std::norm(d_mubar(mu));
}

RkcReport rkc_check(const FourierSeries& psi, double tol, int grid) {
  if (grid < 2) throw Error("rkc_check: grid too small");
  RkcReport report;
  report.grid = grid;
  const double circle_tol = std::max(tol, 1e-12);

  // Circle-diffeomorphism test on the nodes: unimodular values and strictly
  // increasing argument with winding number one.
  const int m = psi.node_count();
  double min_speed = std::numeric_limits<double>::infinity();
  double speed_mean = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = kTwoPi * j / m;
    const Complex v = psi.evaluate(t);
    if (std::abs(std::abs(v) - 1.0) > circle_tol) {
      throw NotCircleDiffeo("values leave the unit circle at node " +
                            std::to_string(j));
    }
    Complex dv{0.0, 0.0};
    for (int k = -psi.max_mode(); k <= psi.max_mode(); ++k) {
      dv += psi.coeff(k) * Complex{0.0, static_cast<double>(k)} *
            Complex{std::cos(k * t), std::sin(k * t)};
    }
    // d/dt arg psi = Im(conj(psi) dpsi/dt) / |psi|^2.
    const double speed = (std::conj(v) * dv).imag() / std::norm(v);
    min_speed = std::min(min_speed, speed);
    speed_mean += speed;
  }
  speed_mean /= m;
  report.min_boundary_speed = min_speed;
  report.winding = static_cast<int>(std::lround(speed_mean));
  if (min_speed <= 0.0) {
    throw NotCircleDiffeo("argument speed vanishes on the boundary");
  }
  if (report.winding != 1) {
    throw NotCircleDiffeo("winding number " + std::to_string(report.winding) +
                          " instead of 1");
  }

  const HarmonicExtension ext(psi);
  double min_jac = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double r = static_cast<double>(i) / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double t = kTwoPi * j / grid;
      const Complex mu{r * std::cos(t), r * std::sin(t)};
      min_jac = std::min(min_jac, ext.jacobian(mu));
    }
  }
  report.min_jacobian = min_jac;
  report.is_diffeo_on_disk = min_jac > 0.0;
  return report;
}

RigidityVerdict circlediff_rigidity(const FourierSeries& psi, double tol) {
  RigidityVerdict v;
  const double scale = std::max(psi.norm(), 1e-30);

  v.fix_defect = std::abs(psi.evaluate(0.0) - Complex{1.0, 0.0});
  v.fixes_one = v.fix_defect <= tol;

  v.odd_defect = psi.even_mode_magnitude() / scale;
  v.odd = v.odd_defect <= tol;

  v.hardy_defect = psi.max_negative_magnitude() / scale;
  v.hardy = v.hardy_defect <= kHardyTol;

  v.applicable = v.fixes_one && v.odd && v.hardy;
  if (!v.applicable) return v;

  try {
    const HolomorphicExtension ext(psi, kHardyTol);
    v.fitted = fit_disk_automorphism(ext);
    v.identity_distance =
        std::abs(v.fitted.a) + std::abs(v.fitted.u - Complex{1.0, 0.0});
    v.conclusion_identity = v.identity_distance <= tol;
  } catch (const Error&) {
    v.conclusion_identity = false;
    v.identity_distance = std::numeric_limits<double>::infinity();
  }
  return v;
}

MoebiusRatioReport moebius_ratio_test(Complex a, Complex b, double tol) {
  if (std::abs(std::abs(a) - std::abs(b)) < 1e-9) {
    throw DegenerateRatio("|a| and |b| coincide; the ratio map degenerates");
  }
  auto f = [&](double t) {
    const Complex mu{std::cos(t), std::sin(t)};
    const Complex w = a * mu + b * std::conj(mu);
    return w / std::abs(w);
  };

  MoebiusRatioReport report;
  for (int n = 256; n <= 8192; n *= 2) {
    try {
      const FourierSeries series = FourierSeries::sample(n, f);
      report.n_used = n;
      report.max_negative_magnitude =
          series.max_negative_magnitude() / std::max(series.norm(), 1e-30);
      report.extendable = report.max_negative_magnitude <= tol;
      return report;
    } catch (const Error&) {
      if (n == 8192) throw;
    }
  }
  throw Error("moebius_ratio_test: unreachable");
}

}  // namespace twistorlab
