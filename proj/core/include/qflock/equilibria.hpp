#ifndef QFLOCK_EQUILIBRIA_HPP
#define QFLOCK_EQUILIBRIA_HPP

#include <stdexcept>

#include "qflock/quat.hpp"
#include "qflock/rng.hpp"

namespace qflock::equilibria {

/// Reduced noise parameter d = D / nu. The canonical knob of the whole model.
struct NoiseRatio {
  double d;
  explicit NoiseRatio(double d_) : d(d_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("NoiseRatio: d must be positive and finite");
    }
  }
};

/// Angle weight m(theta) = exp((1/2 + cos theta) / d); strictly positive and
/// decreasing on [0, pi].
double weight_m(double theta, double d);

/// log of the normalizer Z = 4 pi int_0^pi m(theta) sin^2(theta/2) dtheta,
/// factored so that small d stays in range.
double log_normalizer(double d);

/// Normalizer Z itself (adaptive quadrature, relative tolerance 1e-12).
double normalizer(double d);

/// The exponential-family equilibrium concentrated nematically around
/// +-qbar, with density (1/Z) exp((2/d)((qbar.q)^2 - 1/4)) against the
/// Lebesgue measure of the unit quaternions.
struct EquilibriumDist {
  NoiseRatio d;
  UnitQuat qbar;
  double Z;
  double logZ;

  EquilibriumDist(NoiseRatio d_, UnitQuat qbar_)
      : d(d_), qbar(qbar_), Z(0.0), logZ(log_normalizer(d_.d)) {
    Z = std::exp(logZ);
  }
};

/// Density at q. Evaluated in log space throughout, so it stays finite for
/// strongly concentrated distributions.
double density(const EquilibriumDist& dist, const UnitQuat& q);
double log_density(const EquilibriumDist& dist, const UnitQuat& q);

/// Exact sampling: theta on [0, 2pi] by rejection from the sin^2(theta/2)
/// envelope (acceptance ratio m(theta)/m(0)), uniform axis on S^2, then left
/// multiplication by qbar.
UnitQuat sample(const EquilibriumDist& dist, Rng& rng);

/// Sample only the angle theta in [0, 2pi] with density proportional to
/// m(theta) sin^2(theta/2).
double sample_theta(double d, Rng& rng);

/// Second moment of the real part under M_1, as the ratio of r-integrals
/// I^2(d) = int r^2 e^{2r^2/d} (1-r^2)^{1/2} dr / int e^{2r^2/d} (1-r^2)^{1/2} dr
/// over [-1, 1]. Strictly decreasing in d and always above 1/4.
double i_squared(double d);

}  // namespace qflock::equilibria

#endif  // QFLOCK_EQUILIBRIA_HPP
