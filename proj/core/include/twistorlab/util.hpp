#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistorlab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Points within this distance of |x| = 1 count as lying on the boundary.
inline constexpr double kBoundaryEps = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Orbit leaves the disk tangentially; the exit time is not well defined.
class NonTransversalExit : public Error {
 public:
  using Error::Error;
};

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

// Orbit still inside the disk after the trapping guard time.
class TrappedOrbit : public Error {
 public:
  using Error::Error;
};

class NotHardy : public Error {
 public:
  using Error::Error;
};

class NotCircleDiffeo : public Error {
 public:
  using Error::Error;
};

class DegenerateRatio : public Error {
 public:
  using Error::Error;
};

class ConvexityViolated : public Error {
 public:
  using Error::Error;
};

class SpecParseError : public Error {
 public:
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  explicit Vec2(Complex z) : x(z.real()), y(z.imag()) {}

  Complex to_complex() const { return {x, y}; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  // Counterclockwise rotation by pi/2.
  Vec2 perp() const { return {-y, x}; }

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Coefficients of a tangent vector in the (x1, x2, theta) chart.
using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  if (a > kPi) a -= kTwoPi;
  return a;
}

// Wraps to [0, 2*pi).
inline double wrap_angle_positive(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

inline double sqr(double x) { return x * x; }

// Deterministic xorshift-free PRNG wrapper. Distributions are mapped from
// raw 64-bit draws by hand so that streams are identical across standard
// library implementations (std::uniform_real_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64; passes through every 64-bit value, period 2^64.
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform over the disk of given radius.
  Vec2 disk_point(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double t = uniform(0.0, kTwoPi);
    return {r * std::cos(t), r * std::sin(t)};
  }

  Complex unit_complex() {
    const double t = uniform(0.0, kTwoPi);
    return {std::cos(t), std::sin(t)};
  }

 private:
  std::uint64_t state_;
};

// Number of workers used by parallel_for: TWISTORLAB_THREADS if set and
// positive, hardware concurrency otherwise.
int worker_count();

// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so
// results are identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace twistorlab
