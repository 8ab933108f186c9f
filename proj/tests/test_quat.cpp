#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qflock/quat.hpp"
#include "qflock/rng.hpp"

using namespace qflock;

namespace {
const Quat kI{0, 1, 0, 0};
const Quat kJ{0, 0, 1, 0};
const Quat kK{0, 0, 0, 1};
const Quat kOne{1, 0, 0, 0};

double max_abs(const Quat& q) {
  return std::max(std::max(std::abs(q.w), std::abs(q.x)),
                  std::max(std::abs(q.y), std::abs(q.z)));
}
double max_abs(const Mat3& a) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a.m[i][j]));
  return m;
}
}  // namespace

TEST_CASE("Hamilton unit relations") {
  CHECK(max_abs(mul(kI, kJ) - kK) == 0.0);
  CHECK(max_abs(mul(kJ, kK) - kI) == 0.0);
  CHECK(max_abs(mul(kK, kI) - kJ) == 0.0);
  CHECK(max_abs(mul(kJ, kI) + kK) == 0.0);
  CHECK(max_abs(mul(mul(kI, kJ), kK) + kOne) == 0.0);  // ijk = -1
  const Quat q{0.3, -1.2, 0.5, 2.0};
  CHECK(max_abs(mul(kOne, q) - q) == 0.0);
}

TEST_CASE("inner product and norms") {
  CHECK(dot(kI, kJ) == 0.0);
  CHECK(dot(Quat{1, 1, 1, 1}, Quat{1, 1, 1, 1}) == 4.0);

  Rng rng(11);
  for (int it = 0; it < 10000; ++it) {
    const UnitQuat q = sample_uniform(rng);
    // Re(q q*) = |q|^2 = 1
    CHECK(std::abs(mul(q.value(), conj(q.value())).w - 1.0) < 1e-12);
    // dot(p, p') = Re(p' p*)
    const Quat p{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    CHECK(std::abs(dot(p, q.value()) - mul(q.value(), conj(p)).w) < 1e-12);
  }
}

TEST_CASE("group laws on random triples") {
  Rng rng(12);
  for (int it = 0; it < 10000; ++it) {
    const Quat p{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const Quat r{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    CHECK(max_abs(mul(mul(p, q), r) - mul(p, mul(q, r))) < 1e-12 * (1.0 + norm(p) * norm(q) * norm(r)));
    CHECK(max_abs(conj(mul(p, q)) - mul(conj(q), conj(p))) < 1e-12);
    CHECK(std::abs(norm(mul(p, q)) - norm(p) * norm(q)) < 1e-12 * (1.0 + norm(p) * norm(q)));
  }
}

TEST_CASE("axis-angle conversions") {
  CHECK(max_abs(from_axis_angle(AxisAngle(0.0, {0, 1, 0})).value() - kOne) == 0.0);
  const UnitQuat qk = from_axis_angle(AxisAngle(M_PI, {0, 0, 1}));
  CHECK(std::abs(qk.z() - 1.0) < 1e-15);
  CHECK(std::abs(qk.w()) < 1e-15);

  SUBCASE("degenerate angle flags the default axis") {
    const AxisAngle aa = to_axis_angle(UnitQuat(1.0, 1e-12, 0, 0));
    CHECK(aa.axis_defaulted);
    CHECK(aa.axis.z == 1.0);
  }

  SUBCASE("round trip up to sign on random quaternions") {
    Rng rng(13);
    for (int it = 0; it < 10000; ++it) {
      const UnitQuat q = sample_uniform(rng);
      const UnitQuat back = from_axis_angle(to_axis_angle(q));
      const double err = std::min(max_abs(back.value() - q.value()),
                                  max_abs(back.value() + q.value()));
      CHECK(err < 1e-10);
    }
  }
}

TEST_CASE("rotation by a quaternion") {
  Rng rng(14);
  const Vec3 e1{1, 0, 0}, e2{0, 1, 0};

  CHECK(norm(rotate(UnitQuat::identity(), Vec3{0.3, -2, 0.5}) - Vec3{0.3, -2, 0.5}) == 0.0);

  const UnitQuat quarter = from_axis_angle(AxisAngle(M_PI / 2.0, {0, 0, 1}));
  CHECK(norm(rotate(quarter, e1) - e2) < 1e-15);

  for (int it = 0; it < 10000; ++it) {
    const UnitQuat q = sample_uniform(rng);
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    CHECK(std::abs(norm(rotate(q, v)) - norm(v)) < 1e-12 * (1.0 + norm(v)));
    CHECK(norm(rotate(-q, v) - rotate(q, v)) < 1e-12 * (1.0 + norm(v)));
    CHECK(norm(rotate(q, e1) - matvec(to_matrix(q), e1)) < 1e-12);
  }
}

TEST_CASE("morphism identities") {
  Rng rng(15);
  CHECK(max_abs(to_matrix(UnitQuat::identity()) - Mat3::identity()) == 0.0);
  for (int it = 0; it < 10000; ++it) {
    const UnitQuat q = sample_uniform(rng);
    const UnitQuat r = sample_uniform(rng);
    CHECK(max_abs(to_matrix(-q) - to_matrix(q)) == 0.0);
    CHECK(max_abs(to_matrix(conj(q)) - transpose(to_matrix(q))) < 1e-12);
    CHECK(max_abs(matmul(to_matrix(q), to_matrix(r)) - to_matrix(UnitQuat(mul(q, r)))) < 1e-12);
    CHECK(rotation_defect(to_matrix(q)) < 1e-10);

    // scalar-product identity: A.B/2 = (q.r)^2 - 1/4
    const double lhs = 0.5 * so3_dot(to_matrix(q), to_matrix(r));
    const double rhs = dot(q, r) * dot(q, r) - 0.25;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("differential of the morphism") {
  CHECK(max_abs(dphi(UnitQuat::identity(), Vec3{0, 0, 1}) -
                cross_matrix(Vec3{0, 0, 1}) * 2.0) == 0.0);
  CHECK(max_abs(dphi(UnitQuat(0.3, 0.4, 0.5, std::sqrt(1 - 0.5)), Vec3{0, 0, 0})) == 0.0);

  Rng rng(16);
  for (int it = 0; it < 2000; ++it) {
    const UnitQuat q = sample_uniform(rng);
    const Vec3 u = rng.normal3();
    const double step = 1e-5;
    const Quat tangent = mul(Quat::from_vec(u), q.value());
    const Mat3 fd = (to_matrix(UnitQuat(q.value() + tangent * step)) -
                     to_matrix(UnitQuat(q.value() - tangent * step))) *
                    (1.0 / (2.0 * step));
    CHECK(max_abs(fd - dphi(q, u)) < 1e-8 * (1.0 + norm(u)));
  }
}

TEST_CASE("relative derivative") {
  Rng rng(17);
  for (int it = 0; it < 10000; ++it) {
    const UnitQuat q = sample_uniform(rng);
    const Vec3 u = rng.normal3();
    const Quat dq = mul(Quat::from_vec(u), q.value());
    CHECK(norm(rel_derivative(dq, q) - u) < 1e-12 * (1.0 + norm(u)));
  }
  const UnitQuat q = sample_uniform(rng);
  CHECK(norm(rel_derivative(Quat{}, q)) == 0.0);
  CHECK_THROWS_AS(rel_derivative(q.value(), q), std::invalid_argument);

  SUBCASE("path derivative recovers the generator") {
    for (int it = 0; it < 100; ++it) {
      const UnitQuat q0 = sample_uniform(rng);
      const Vec3 b = rng.normal3();
      const double t = 1e-5;
      const Quat plus = mul(exp_map(b * t).value(), q0.value());
      const Quat minus = mul(exp_map(b * (-t)).value(), q0.value());
      const Quat dq = (plus - minus) * (1.0 / (2.0 * t));
      CHECK(norm(rel_derivative(dq, q0) - b) < 1e-8 * (1.0 + norm(b)));
    }
  }
}

TEST_CASE("gradient of a quadratic form is the projected matrix action") {
  Rng rng(18);
  for (int it = 0; it < 200; ++it) {
    Mat4 qm;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) qm.m[i][j] = qm.m[j][i] = rng.normal();
    const UnitQuat q = sample_uniform(rng);
    const Quat grad_fd = oracles::sphere_gradient_fd(
        [&](const UnitQuat& p) { return dot(p.value(), apply(qm, p.value())); }, q);
    const Quat expected = project_orthogonal(apply(qm, q.value()), q.value()) * 2.0;
    CHECK(max_abs(grad_fd - expected) < 1e-6);
  }
}

TEST_CASE("gradient correspondence through the morphism") {
  // For f(q) = g(to_matrix(q)) with linear g(A) = B.A, the SO(3) gradient is
  // the quarter-scaled image of the sphere gradient under dphi.
  Rng rng(19);
  for (int it = 0; it < 200; ++it) {
    Mat3 b;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b.m[i][j] = rng.normal();
    const UnitQuat q = sample_uniform(rng);
    const auto g = [&](const Mat3& a) { return so3_dot(b, a); };

    const Quat grad_f =
        oracles::sphere_gradient_fd([&](const UnitQuat& p) { return g(to_matrix(p)); }, q);
    const Vec3 u = rel_derivative(project_orthogonal(grad_f, q.value()), q);
    const Mat3 pushforward = dphi(q, u) * 0.25;
    const Mat3 grad_g = oracles::so3_gradient_fd(g, to_matrix(q));
    CHECK(max_abs(pushforward - grad_g) < 1e-6);
  }
}

TEST_CASE("uniform sampling and Monte-Carlo integration") {
  Rng rng(20);
  CHECK_THROWS_AS(mc_integral([](const UnitQuat&) { return 1.0; }, 0, rng),
                  std::invalid_argument);

  SUBCASE("constant integrand gives the sphere area exactly") {
    const auto est = mc_integral([](const UnitQuat&) { return 1.0; }, 1000, rng);
    CHECK(est.value == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-14));
    CHECK(est.std_error == 0.0);
  }

  SUBCASE("second moment of the real part") {
    const auto est = mc_integral(
        [](const UnitQuat& q) { return q.w() * q.w(); }, 1000000, rng);
    const double mean = est.value / (2.0 * M_PI * M_PI);
    const double se = est.std_error / (2.0 * M_PI * M_PI);
    CHECK(std::abs(mean - 0.25) < 3.0 * se);
  }

  SUBCASE("volume decomposition against the angular quadrature") {
    // even g(theta): MC of g(theta(q)) vs 4 pi / (2 pi^2) int g sin^2(theta/2)
    const auto g = [](double th) { return std::cos(th) + 0.25 * std::cos(2 * th); };
    const auto est = mc_integral(
        [&](const UnitQuat& q) {
          const double th = 2.0 * std::atan2(norm(q.value().im()), q.w());
          return g(th);
        },
        1000000, rng);
    // trapezoid-free oracle: dense Simpson on [0, pi] (g even around pi here
    // means the [0,2pi] integral is twice the [0,pi] one in the sin^2 weight)
    const int n = 20001;
    double acc = 0.0;
    const double hh = M_PI / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double th = i * hh;
      const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * std::sin(0.5 * th) * std::sin(0.5 * th) * g(th);
    }
    acc *= hh / 3.0;
    const double expected = 4.0 * M_PI * acc;
    CHECK(std::abs(est.value - expected) < 3.0 * est.std_error);
  }
}

TEST_CASE("volume correspondence with SO(3)") {
  // MC over the quaternions of (Tr A)^k equals the normalized angular
  // quadrature of (1 + 2 cos theta)^k for k = 1, 2, 3.
  Rng rng(21);
  for (int k = 1; k <= 3; ++k) {
    const auto est = mc_integral(
        [&](const UnitQuat& q) {
          const Mat3 a = to_matrix(q);
          return std::pow(a.m[0][0] + a.m[1][1] + a.m[2][2], k);
        },
        1000000, rng);
    const double mc_mean = est.value / (2.0 * M_PI * M_PI);
    const double mc_se = est.std_error / (2.0 * M_PI * M_PI);

    const int n = 40001;
    double acc = 0.0;
    const double hh = M_PI / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double th = i * hh;
      const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * std::sin(0.5 * th) * std::sin(0.5 * th) * std::pow(1.0 + 2.0 * std::cos(th), k);
    }
    acc *= hh / 3.0;
    const double so3_integral = acc * 4.0 * M_PI / (2.0 * M_PI * M_PI);
    CHECK(std::abs(mc_mean - so3_integral) < 3.0 * mc_se + 1e-9);
  }
}

TEST_CASE("exp and log maps") {
  Rng rng(22);
  for (int it = 0; it < 1000; ++it) {
    Vec3 b = rng.normal3();
    b = b * (1.4 / std::max(1.0, norm(b)));  // keep |b| < pi/2 for principality
    const Vec3 back = log_map(exp_map(b));
    CHECK(norm(back - b) < 1e-12 * (1.0 + norm(b)));
  }
}
