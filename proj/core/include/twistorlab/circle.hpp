#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twistorlab/util.hpp"

namespace twistorlab {

// Relative size below which a Fourier mode counts as zero; matches the DFT
// accuracy of analytic inputs at the default truncation.
inline constexpr double kHardyTol = 1e-8;

// Truncated Fourier series c_k, -N <= k <= N, sampled on 2N+1 uniform nodes.
class FourierSeries {
 public:
  explicit FourierSeries(int n = 256);

  // Plain DFT of given samples; size must be odd (= 2N+1). No decay check.
  static FourierSeries from_samples(const std::vector<Complex>& samples);

  // Samples f(t_j) on t_j = 2 pi j / (2N+1) and transforms. Refuses (throws
  // Error) when the top modes have not decayed below kHardyTol relative to
  // the norm, so aliased spectra cannot pass silently.
  static FourierSeries sample(int n, const std::function<Complex(double)>& f);

  int max_mode() const { return n_; }
  int node_count() const { return 2 * n_ + 1; }

  Complex coeff(int k) const;
  void set_coeff(int k, Complex v);

  // l2 norm of the coefficient vector; by Parseval the L2 norm on the circle.
  double norm() const;
  double max_negative_magnitude() const;
  // Largest magnitude among the two extreme modes.
  double tail_magnitude() const;
  // max_k |c_{-k} - conj(c_k)|; zero for real-valued functions.
  double reality_defect() const;
  // max over even k of |c_k|; zero for odd symmetry f(-mu) = -f(mu).
  double even_mode_magnitude() const;

  Complex evaluate(double t) const;

  const std::vector<Complex>& coefficients() const { return c_; }

 private:
  int n_ = 0;
  std::vector<Complex> c_;  // index k + n_
};

void to_json(nlohmann::json& j, const FourierSeries& f);
void from_json(const nlohmann::json& j, FourierSeries& f);

// Zeroes all negative modes.
FourierSeries hardy_projection(const FourierSeries& f);

struct HolomorphyVerdict {
  bool holomorphic = false;
  double max_negative_magnitude = 0.0;  // absolute
  double relative_magnitude = 0.0;      // against the series norm
};

HolomorphyVerdict is_fibrewise_holomorphic(const FourierSeries& f,
                                           double tol = kHardyTol);

// Power series evaluator of the unique holomorphic extension of a Hardy
// class boundary function.
class HolomorphicExtension {
 public:
  explicit HolomorphicExtension(const FourierSeries& f,
                                double tol = kHardyTol);

  Complex operator()(Complex mu) const;
  Complex derivative(Complex mu) const;

  const std::vector<Complex>& coefficients() const { return c_; }

 private:
  std::vector<Complex> c_;  // c_[k] multiplies mu^k
};

// mu -> u (mu - a) / (1 - conj(a) mu) with |a| < 1, |u| = 1.
struct DiskAutomorphism {
  Complex a{0.0, 0.0};
  Complex u{1.0, 0.0};

  DiskAutomorphism() = default;
  DiskAutomorphism(Complex a_, Complex u_);

  Complex apply(Complex mu) const;
  FourierSeries boundary_series(int n = 256) const;
};

// Reads the automorphism parameters off a disk self-map: a from the image
// of 0, u from the image of 1, iterated to fixed point. Throws Error when
// the data is not consistent with an automorphism (|a| >= 1 or no
// convergence).
DiskAutomorphism fit_disk_automorphism(const HolomorphicExtension& ext);

// Poisson extension from the Fourier modes: the positive modes ride mu^k,
// the negative ones conj(mu)^{-k}. Coincides with the holomorphic extension
// on Hardy class data and exists for every circle function.
class HarmonicExtension {
 public:
  explicit HarmonicExtension(const FourierSeries& f);

  Complex operator()(Complex mu) const;
  Complex d_mu(Complex mu) const;
  Complex d_mubar(Complex mu) const;
  // Jacobian determinant |d_mu|^2 - |d_mubar|^2 of the planar map.
  double jacobian(Complex mu) const;

 private:
  std::vector<Complex> pos_;  // index k, modes k >= 0
  std::vector<Complex> neg_;  // index k - 1, modes -k
};

struct RkcReport {
  bool is_diffeo_on_disk = false;
  double min_jacobian = 0.0;        // min Jacobian of the harmonic extension
  double min_boundary_speed = 0.0;  // min of d/dt arg psi(e^{it})
  int winding = 0;
  int grid = 0;
};

// Diffeomorphism extension scan: checks that psi is a circle diffeomorphism
// (unimodular values within tol at the nodes, positive argument speed,
// winding one), extends it harmonically, and scans the Jacobian determinant
// on a polar grid, which stays positive for every sense-preserving circle
// diffeomorphism. Throws NotCircleDiffeo.
RkcReport rkc_check(const FourierSeries& psi, double tol = kHardyTol,
                    int grid = 128);

struct RigidityVerdict {
  bool fixes_one = false;
  bool odd = false;
  bool hardy = false;
  bool applicable = false;  // all three hypotheses hold

  double fix_defect = 0.0;
  double odd_defect = 0.0;    // relative even-mode magnitude
  double hardy_defect = 0.0;  // relative negative-mode magnitude

  bool conclusion_identity = false;  // fitted automorphism is the identity
  double identity_distance = 0.0;    // |a| + |u - 1| of the fit
  DiskAutomorphism fitted;
};

// Circle-diffeomorphism rigidity: under the hypotheses psi(1) = 1, psi odd,
// psi in the Hardy class, the extension is a disk automorphism fixing 0 and
// 1, hence the identity. Hypotheses and conclusion are measured; nothing is
// assumed.
RigidityVerdict circlediff_rigidity(const FourierSeries& psi,
                                    double tol = 1e-6);

struct MoebiusRatioReport {
  double max_negative_magnitude = 0.0;  // relative to the norm
  bool extendable = false;
  int n_used = 0;  // truncation that passed the decay check
};

// f(mu) = (a mu + b conj(mu)) / |a mu + b conj(mu)| on the circle extends
// fibrewise holomorphically iff b = 0. Sampled adaptively (doubling N up to
// 8192) because the spectrum widens as |b| -> |a|. Throws DegenerateRatio
// when |a| = |b| within 1e-9.
MoebiusRatioReport moebius_ratio_test(Complex a, Complex b,
                                      double tol = kHardyTol);

}  // namespace twistorlab
