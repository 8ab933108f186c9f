#ifndef QFLOCK_RNG_HPP
#define QFLOCK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "qflock/quat.hpp"

namespace qflock {

inline constexpr double kSphereS3Area = 2.0 * M_PI * M_PI;  // |H_1|

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Small counter-seeded generator (splitmix64 stream). Streams derived from
/// (seed, particle, step) are statistically independent, which is what the
/// simulators rely on for thread-count-independent reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(detail::splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t particle, std::uint64_t step) {
    std::uint64_t s = detail::splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    s = detail::splitmix64(s ^ (particle * 0x9e3779b97f4a7c15ULL + 0x452821e638d01377ULL));
    s = detail::splitmix64(s ^ (step * 0xc2b2ae3d27d4eb4fULL + 0x082efa98ec4e6c89ULL));
    Rng r(0);
    r.state_ = s;
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Uniform in (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (deterministic draw count of 2 uniforms
  /// per pair; the spare is cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 normal3() {
    const double a = normal(), b = normal(), c = normal();
    return {a, b, c};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Uniform sample on the 3-sphere of unit quaternions (normalized
/// 4-dimensional Gaussian).
inline UnitQuat sample_uniform(Rng& rng) {
  for (;;) {
    const Quat g{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const double n2 = norm2(g);
    if (n2 > 1e-12) return UnitQuat(g);
  }
}

/// Uniform direction on S^2.
inline Vec3 sample_uniform_axis(Rng& rng) {
  for (;;) {
    const Vec3 g = rng.normal3();
    const double n = norm(g);
    if (n > 1e-6) return g * (1.0 / n);
  }
}

struct McEstimate {
  double value = 0.0;      // estimate of the integral over H_1
  double std_error = 0.0;  // Monte-Carlo standard error of value
};

/// Monte-Carlo integral over the unit quaternions: (2 pi^2 / n) sum f(q_i)
/// with q_i uniform, plus the estimator standard error.
template <class F>
McEstimate mc_integral(F&& f, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("mc_integral: n must be >= 1");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(sample_uniform(rng));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  if (n > 1) {
    var = (sum2 - sum * mean) / static_cast<double>(n - 1);
    var = std::max(var, 0.0);
  }
  McEstimate e;
  e.value = kSphereS3Area * mean;
  e.std_error = kSphereS3Area * std::sqrt(var / static_cast<double>(n));
  return e;
}

}  // namespace qflock

#endif  // QFLOCK_RNG_HPP
