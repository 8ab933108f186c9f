#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qflock/equilibria.hpp"
#include "qflock/nematic.hpp"
#include "qflock/quadrature.hpp"
#include "qflock/rng.hpp"

using namespace qflock;
using namespace qflock::equilibria;

// Golden values from an independent 30-digit quadrature of the theta-form
// integrals (fixed once; the library must reproduce them).
namespace golden {
constexpr double kZ_at_1 = 22.8106278496386007;
constexpr double kI2[][2] = {
    {0.01, 0.992480962608178361}, {0.1, 0.922759352061259254}, {0.2, 0.837937932401455121},
    {0.5, 0.577197343266560017},  {1.0, 0.403162820756521573}, {2.0, 0.320131338027426660},
    {5.0, 0.276245631278580697},  {10.0, 0.262812233162551986}, {1000.0, 0.250125031249997395},
};
}  // namespace golden

TEST_CASE("angle weight m") {
  CHECK(weight_m(M_PI / 2.0, 0.7) == doctest::Approx(std::exp(1.0 / 1.4)).epsilon(1e-15));
  CHECK(weight_m(0.0, 1.0) == doctest::Approx(4.48168907033806482).epsilon(1e-15));
  // symmetry product m(pi) m(0) = exp(1/d)
  for (double d : {0.3, 1.0, 4.0}) {
    CHECK(weight_m(M_PI, d) * weight_m(0.0, d) == doctest::Approx(std::exp(1.0 / d)).epsilon(1e-13));
  }
  // decreasing on [0, pi]
  double prev = weight_m(0.0, 0.8);
  for (int i = 1; i <= 32; ++i) {
    const double v = weight_m(M_PI * i / 32.0, 0.8);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(weight_m(0.1, -1.0), std::invalid_argument);
}

TEST_CASE("normalizer") {
  CHECK(normalizer(1.0) == doctest::Approx(golden::kZ_at_1).epsilon(1e-12));
  // d -> infinity limit: m -> 1 and Z -> 2 pi^2
  CHECK(normalizer(1e9) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-7));
  // small d stays finite through the log form
  CHECK(std::isfinite(log_normalizer(0.001)));

  SUBCASE("theta quadrature agrees with the Monte-Carlo route") {
    Rng rng(41);
    const double d = 0.8;
    const auto est = mc_integral(
        [&](const UnitQuat& q) {
          const double r = q.w();
          return std::exp((2.0 / d) * (r * r - 0.25));
        },
        1000000, rng);
    CHECK(std::abs(est.value - normalizer(d)) < 3.0 * est.std_error);
  }

  SUBCASE("Z does not depend on the center") {
    Rng rng(42);
    const double d = 0.5;
    for (const UnitQuat qbar : {sample_uniform(rng), sample_uniform(rng)}) {
      const auto est = mc_integral(
          [&](const UnitQuat& q) {
            const double r = dot(qbar, q);
            return std::exp((2.0 / d) * (r * r - 0.25));
          },
          400000, rng);
      CHECK(std::abs(est.value - normalizer(d)) < 3.0 * est.std_error);
    }
  }
}

TEST_CASE("density") {
  Rng rng(43);
  const UnitQuat qbar = sample_uniform(rng);
  const EquilibriumDist dist{NoiseRatio(1.3), qbar};

  CHECK(density(dist, qbar) ==
        doctest::Approx(std::exp(1.5 / 1.3) / dist.Z).epsilon(1e-12));
  const Quat ortho = project_orthogonal(sample_uniform(rng).value(), qbar.value());
  CHECK(density(dist, UnitQuat(ortho)) ==
        doctest::Approx(std::exp(-0.5 / 1.3) / dist.Z).epsilon(1e-12));

  SUBCASE("nematic symmetry is exact") {
    for (int it = 0; it < 100; ++it) {
      const UnitQuat q = sample_uniform(rng);
      CHECK(density(dist, q) == density(dist, -q));
    }
  }

  SUBCASE("normalization under the uniform measure") {
    const auto est = mc_integral([&](const UnitQuat& q) { return density(dist, q); },
                                 1000000, rng);
    CHECK(std::abs(est.value - 1.0) < 3.0 * est.std_error);
  }

  SUBCASE("rotational covariance") {
    const EquilibriumDist centered{NoiseRatio(1.3), UnitQuat::identity()};
    for (int it = 0; it < 100; ++it) {
      const UnitQuat q = sample_uniform(rng);
      const UnitQuat shifted(mul(q.value(), conj(qbar.value())));
      CHECK(density(dist, q) == doctest::Approx(density(centered, shifted)).epsilon(1e-12));
    }
  }

  SUBCASE("matrix-model equilibrium is the same family") {
    // density(q) / exp(d^-1 Phi(q).Phi(qbar)) is constant in q.
    const double d = 1.3;
    const Mat3 lam = to_matrix(qbar);
    double ref = 0.0;
    for (int it = 0; it < 200; ++it) {
      const UnitQuat q = sample_uniform(rng);
      const double ratio =
          density(dist, q) / std::exp(so3_dot(to_matrix(q), lam) / d);
      if (it == 0) ref = ratio;
      CHECK(std::abs(ratio - ref) < 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("exact sampler") {
  SUBCASE("mean alignment statistic matches I^2 at d = 1") {
    Rng rng(44);
    const UnitQuat qbar = sample_uniform(rng);
    const EquilibriumDist dist{NoiseRatio(1.0), qbar};
    const std::size_t n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = dot(qbar, sample(dist, rng));
      sum += r * r;
      sum2 += r * r * r * r;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::abs(mean - i_squared(1.0)) < 3.0 * se);
  }

  SUBCASE("concentration at small d") {
    Rng rng(45);
    const UnitQuat qbar = sample_uniform(rng);
    const EquilibriumDist dist{NoiseRatio(0.01), qbar};
    double mean_angle = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double c = std::abs(dot(qbar, sample(dist, rng)));
      mean_angle += std::acos(std::min(1.0, c));
    }
    mean_angle /= n;
    CHECK(mean_angle < 0.2);
  }

  SUBCASE("Kolmogorov-Smirnov against the quadrature CDF") {
    Rng rng(46);
    const double d = 1.0;
    std::vector<double> thetas;
    thetas.reserve(100000);
    for (int i = 0; i < 100000; ++i) thetas.push_back(sample_theta(d, rng));

    const auto pdf = [&](double t) {
      const double s = std::sin(0.5 * t);
      return weight_m(t, d) * s * s;
    };
    const double total = quadrature::integrate_adaptive(pdf, 0.0, 2.0 * M_PI, 1e-12).value;
    const auto cdf = [&](double t) {
      return quadrature::integrate_adaptive(pdf, 0.0, t, 1e-10).value / total;
    };
    const double dstat = oracles::ks_statistic(thetas, cdf);
    const double p = oracles::ks_pvalue_one_sample(dstat, thetas.size());
    CHECK(p > 0.001);
  }
}

TEST_CASE("i_squared") {
  for (const auto& [d, val] : golden::kI2) {
    CHECK(i_squared(d) == doctest::Approx(val).epsilon(1e-10));
  }
  // always above 1/4, decreasing in d
  double prev = 2.0;
  for (double d : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const double v = i_squared(d);
    CHECK(v > 0.25);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(std::abs(i_squared(1000.0) - 0.25) < 5e-3);
  CHECK(i_squared(0.01) > 0.95);
}

TEST_CASE("sampled ensemble feeds back through the nematic mean") {
  Rng rng(47);
  const UnitQuat qbar = sample_uniform(rng);
  const double d = 0.5;
  const EquilibriumDist dist{NoiseRatio(d), qbar};

  std::vector<UnitQuat> cloud;
  const std::size_t n = 100000;
  cloud.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cloud.push_back(sample(dist, rng));

  const NematicMean mean = principal_eigvec(build_qtensor(cloud), qbar);
  const double angle = std::acos(std::min(1.0, std::abs(dot(mean.qbar, qbar))));
  CHECK(angle < 0.02);

  // lambda_max estimates I^2 - 1/4 up to the Monte-Carlo error of the moment
  double sum = 0.0, sum2 = 0.0;
  for (const auto& q : cloud) {
    const double r = dot(qbar, q);
    sum += r * r;
    sum2 += r * r * r * r;
  }
  const double m1 = sum / n;
  const double se = std::sqrt((sum2 / n - m1 * m1) / n);
  CHECK(std::abs(mean.lambda_max - (i_squared(d) - 0.25)) <
        3.0 * se + 3.0 / (n * mean.spectral_gap));
}
