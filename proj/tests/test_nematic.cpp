#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qflock/nematic.hpp"
#include "qflock/quadrature.hpp"
#include "qflock/rng.hpp"

using namespace qflock;

namespace {

std::vector<UnitQuat> random_cloud(std::size_t n, Rng& rng) {
  std::vector<UnitQuat> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_uniform(rng));
  return out;
}

double angle_up_to_sign(const UnitQuat& a, const UnitQuat& b) {
  const double c = std::min(1.0, std::abs(dot(a, b)));
  return std::acos(c);
}

}  // namespace

TEST_CASE("build_qtensor basics") {
  Rng rng(31);
  const UnitQuat q0 = sample_uniform(rng);

  SUBCASE("all-equal cloud is the rank-one tensor") {
    std::vector<UnitQuat> cloud(7, q0);
    const QTensor t = build_qtensor(cloud);
    Mat4 expect;
    add_outer(expect, q0.value(), 1.0);
    for (int i = 0; i < 4; ++i) expect.m[i][i] -= 0.25;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(t.m[i][j] == doctest::Approx(expect.m[i][j]).epsilon(1e-14));
    CHECK(std::abs(t.trace()) < 1e-14);
  }

  SUBCASE("flipping any input sign leaves the tensor bitwise equal") {
    auto cloud = random_cloud(20, rng);
    std::vector<double> w(20, 1.0);
    const QTensor a = build_qtensor(cloud, w);
    cloud[3] = -cloud[3];
    cloud[11] = -cloud[11];
    const QTensor b = build_qtensor(cloud, w);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(a.m[i][j] == b.m[i][j]);
  }

  SUBCASE("two orthogonal quaternions give the paired spectrum") {
    const UnitQuat a = UnitQuat(1, 0, 0, 0);
    const UnitQuat b = UnitQuat(0, 1, 0, 0);
    std::vector<UnitQuat> cloud{a, b};
    const QTensor t = build_qtensor(cloud);
    const auto eig = oracles::eig4_qr(t);
    CHECK(eig.values[0] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(eig.values[1] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(eig.values[2] == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(eig.values[3] == doctest::Approx(-0.25).epsilon(1e-13));
  }

  SUBCASE("errors") {
    std::vector<UnitQuat> empty;
    CHECK_THROWS_AS(build_qtensor(empty), std::invalid_argument);
    std::vector<UnitQuat> cloud{q0};
    std::vector<double> zero_w{0.0};
    CHECK_THROWS_AS(build_qtensor(cloud, zero_w), std::invalid_argument);
    std::vector<double> neg_w{-1.0};
    CHECK_THROWS_AS(build_qtensor(cloud, neg_w), std::invalid_argument);
  }
}

TEST_CASE("principal_eigvec") {
  Rng rng(32);

  SUBCASE("all-equal cloud") {
    const UnitQuat q0 = sample_uniform(rng);
    std::vector<UnitQuat> cloud(5, q0);
    const NematicMean m = principal_eigvec(build_qtensor(cloud), q0);
    CHECK(m.lambda_max == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(angle_up_to_sign(m.qbar, q0) < 1e-10);
    CHECK(dot(m.qbar, q0) >= 0.0);  // hint alignment
  }

  SUBCASE("zero tensor is a degenerate maximum") {
    CHECK_THROWS_AS(principal_eigvec(QTensor{}), DegenerateMaximumError);
    CHECK_NOTHROW(principal_eigvec(QTensor{}, std::nullopt, 1e-9, /*allow_ties=*/true));
  }

  SUBCASE("matches the independent eigensolver on random clouds") {
    for (int it = 0; it < 200; ++it) {
      const auto cloud = random_cloud(20, rng);
      const QTensor t = build_qtensor(cloud);
      const auto oracle = oracles::eig4_qr(t);
      if (oracle.values[0] - oracle.values[1] < 1e-6) continue;  // skip near ties
      const NematicMean m = principal_eigvec(t);
      CHECK(std::abs(m.lambda_max - oracle.values[0]) < 1e-12);
      const double align = std::abs(dot(m.qbar.value(), oracle.vectors[0]));
      CHECK(align > 1.0 - 1e-10);
      // eigenpair residual
      const Quat res = apply(t, m.qbar.value()) - m.qbar.value() * m.lambda_max;
      CHECK(norm(res) < 1e-10);
      CHECK(m.spectral_gap >= 0.0);
    }
  }
}

TEST_CASE("maximizer_objective") {
  Rng rng(33);
  const UnitQuat q0 = sample_uniform(rng);
  std::vector<UnitQuat> cloud(6, q0);
  std::vector<double> w(6, 2.5);
  const QTensor t = build_qtensor(cloud, w);

  CHECK(maximizer_objective(t, q0) == doctest::Approx(0.75 * 2.5).epsilon(1e-13));

  // any q orthogonal to q0 scores -mean_weight/4
  const Quat raw{q0.z(), q0.w(), -q0.x(), q0.y()};
  const Quat ortho = project_orthogonal(raw, q0.value());
  const UnitQuat qperp(ortho);
  CHECK(maximizer_objective(t, qperp) == doctest::Approx(-0.25 * 2.5).epsilon(1e-12));

  SUBCASE("objective at the principal eigenvector dominates random probes") {
    const auto cloud2 = random_cloud(25, rng);
    const QTensor t2 = build_qtensor(cloud2);
    const NematicMean m = principal_eigvec(t2);
    const double best = maximizer_objective(t2, m.qbar);
    for (int it = 0; it < 1000; ++it) {
      CHECK(maximizer_objective(t2, sample_uniform(rng)) <= best + 1e-12);
    }
  }
}

TEST_CASE("sign invariance of the mean") {
  Rng rng(34);
  auto cloud = random_cloud(15, rng);
  const NematicMean a = principal_eigvec(build_qtensor(cloud));
  for (std::size_t i = 0; i < cloud.size(); i += 2) cloud[i] = -cloud[i];
  const NematicMean b = principal_eigvec(build_qtensor(cloud));
  CHECK(angle_up_to_sign(a.qbar, b.qbar) < 1e-12);
  CHECK(a.lambda_max == b.lambda_max);
}

TEST_CASE("relaxation fixed points") {
  Rng rng(35);
  const UnitQuat qbar = sample_uniform(rng);
  Mat4 proj;
  add_outer(proj, qbar.value(), 1.0);
  for (int i = 0; i < 4; ++i) proj.m[i][i] -= 0.25;

  const auto drift_norm = [&](const UnitQuat& q) {
    const Quat f = apply(proj, q.value());
    return norm(project_orthogonal(f, q.value()));
  };

  CHECK(drift_norm(qbar) < 1e-14);
  CHECK(drift_norm(-qbar) < 1e-14);
  const Quat ortho = project_orthogonal(sample_uniform(rng).value(), qbar.value());
  CHECK(drift_norm(UnitQuat(ortho)) < 1e-13);
  // a generic point is not a fixed point
  const UnitQuat generic(qbar.value() * 0.8 + UnitQuat(ortho).value() * 0.6);
  CHECK(drift_norm(generic) > 1e-3);
}

TEST_CASE("smoothed tensor converges quadratically to the local mean") {
  // Smooth synthetic attitude field sampled with an even spatial kernel of
  // width eps: the principal eigenvector drifts from the pointwise one at
  // O(eps^2). Fit the log-log slope over eps = 0.2, 0.1, 0.05, 0.025.
  const UnitQuat q0 = UnitQuat(0.9, 0.1, -0.3, 0.27);
  const auto field = [&](const Vec3& y) {
    const Vec3 b = Vec3{0.9, 0.0, 0.3} * y.x + Vec3{0.0, -0.7, 0.4} * y.y +
                   Vec3{0.2, 0.5, 0.0} * y.z + Vec3{0.6, 0.0, 0.0} * (y.x * y.y);
    return UnitQuat(mul(exp_map(b).value(), q0.value()));
  };

  const auto& rule = quadrature::gauss_legendre(8);
  std::vector<double> log_eps, log_err;
  for (const double eps : {0.2, 0.1, 0.05, 0.025}) {
    Mat4 acc;
    double wsum = 0.0;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        for (int c = 0; c < 8; ++c) {
          const Vec3 y{rule.nodes[a] * 2.0 * eps, rule.nodes[b] * 2.0 * eps,
                       rule.nodes[c] * 2.0 * eps};
          const double r2 = dot(y, y) / (eps * eps);
          const double w =
              rule.weights[a] * rule.weights[b] * rule.weights[c] * std::exp(-0.5 * r2);
          add_outer(acc, field(y).value(), w);
          wsum += w;
        }
    for (int i = 0; i < 4; ++i) acc.m[i][i] -= 0.25 * wsum;
    const auto eig = oracles::eig4_qr(acc);
    const UnitQuat smoothed(eig.vectors[0]);
    const double err = std::acos(std::min(1.0, std::abs(dot(smoothed, field(Vec3{})))));
    log_eps.push_back(std::log(eps));
    log_err.push_back(std::log(std::max(err, 1e-300)));
  }
  const double slope = oracles::fit_slope(log_eps, log_err);
  CHECK(slope >= 1.8);
}
