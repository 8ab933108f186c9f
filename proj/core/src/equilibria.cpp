#include "qflock/equilibria.hpp"

#include <cmath>

#include "qflock/quadrature.hpp"

namespace qflock::equilibria {

double weight_m(double theta, double d) {
  NoiseRatio check(d);
  return std::exp((0.5 + std::cos(theta)) / d);
}

double log_normalizer(double d) {
  NoiseRatio check(d);
  // m peaks at theta = 0 with exponent 3/(2d); factor it out before
  // integrating.
  const double peak = 1.5 / d;
  const auto f = [d, peak](double t) {
    const double s = std::sin(0.5 * t);
    return std::exp((0.5 + std::cos(t)) / d - peak) * s * s;
  };
  const auto q = quadrature::integrate_adaptive(f, 0.0, M_PI, 1e-13);
  return peak + std::log(4.0 * M_PI * q.value);
}

double normalizer(double d) { return std::exp(log_normalizer(d)); }

double log_density(const EquilibriumDist& dist, const UnitQuat& q) {
  const double r = dot(dist.qbar, q);
  return (2.0 / dist.d.d) * (r * r - 0.25) - dist.logZ;
}

double density(const EquilibriumDist& dist, const UnitQuat& q) {
  return std::exp(log_density(dist, q));
}

double sample_theta(double d, Rng& rng) {
  NoiseRatio check(d);
  // Envelope density sin^2(theta/2)/pi on [0, 2pi], sampled by inverting
  // (theta - sin theta)/(2 pi) = u with a Newton iteration (monotone, the
  // derivative vanishes only at the endpoints).
  for (;;) {
    const double u = rng.uniform();
    const double target = 2.0 * M_PI * u;
    double lo = 0.0, hi = 2.0 * M_PI, t = M_PI;
    for (int it = 0; it < 200; ++it) {
      const double g = t - std::sin(t) - target;
      if (std::abs(g) < 1e-13) break;
      if (g > 0.0) hi = t; else lo = t;
      const double dg = 1.0 - std::cos(t);
      double next = (dg > 1e-12) ? t - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    // Accept with probability m(theta)/m(0) = exp((cos theta - 1)/d).
    const double accept = std::exp((std::cos(t) - 1.0) / d);
    if (rng.uniform() <= accept) return t;
  }
}

UnitQuat sample(const EquilibriumDist& dist, Rng& rng) {
  const double theta = sample_theta(dist.d.d, rng);
  const Vec3 axis = sample_uniform_axis(rng);
  const double h = 0.5 * theta;
  const Quat local(std::cos(h), axis * std::sin(h));
  return UnitQuat(mul(dist.qbar.value(), local));
}

double i_squared(double d) {
  NoiseRatio check(d);
  // E[(Re q)^2] under M_1, whose density against (1-r^2)^{1/2} dr carries the
  // exponent 2 r^2 / d. Substituting r = cos(t) gives smooth integrands on
  // [0, pi]; the exponent is shifted by its maximum 2/d to avoid overflow
  // (the shift cancels in the ratio).
  const auto num = [d](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return c * c * std::exp(2.0 * (c * c - 1.0) / d) * s * s;
  };
  const auto den = [d](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return std::exp(2.0 * (c * c - 1.0) / d) * s * s;
  };
  const double top = quadrature::integrate_adaptive(num, 0.0, M_PI, 1e-13).value;
  const double bot = quadrature::integrate_adaptive(den, 0.0, M_PI, 1e-13).value;
  return top / bot;
}

}  // namespace qflock::equilibria
