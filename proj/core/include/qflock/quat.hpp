#ifndef QFLOCK_QUAT_HPP
#define QFLOCK_QUAT_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace qflock {

inline constexpr double kUnitTol = 1e-12;       // renormalization tolerance on construction
inline constexpr double kOrthoTol = 1e-8;       // tangency preconditions
inline constexpr double kAxisDegenerateTheta = 1e-9;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw std::invalid_argument("Vec3: cannot normalize zero vector");
  return v * (1.0 / n);
}

/// General quaternion, components against (1, i, j, k). Scalar-first storage
/// (w, x, y, z); this is the single storage convention of the library and
/// callers convert at their own boundaries.
struct Quat {
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
  Quat(double re, const Vec3& im) : w(re), x(im.x), y(im.y), z(im.z) {}

  static Quat from_vec(const Vec3& v) { return {0.0, v.x, v.y, v.z}; }

  double re() const { return w; }
  Vec3 im() const { return {x, y, z}; }

  Quat operator+(const Quat& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quat operator-(const Quat& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quat operator-() const { return {-w, -x, -y, -z}; }
  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quat& operator+=(const Quat& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }

  double operator[](int i) const { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
};

inline Quat operator*(double s, const Quat& q) { return q * s; }

/// Hamilton product. Non-commutative; |pq| = |p||q|.
inline Quat mul(const Quat& p, const Quat& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

inline Quat conj(const Quat& p) { return {p.w, -p.x, -p.y, -p.z}; }

/// Componentwise inner product, equal to Re(p' p*).
inline double dot(const Quat& p, const Quat& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

inline double norm2(const Quat& p) { return dot(p, p); }
inline double norm(const Quat& p) { return std::sqrt(norm2(p)); }

/// Projection of p onto the orthogonal complement of the unit direction n.
inline Quat project_orthogonal(const Quat& p, const Quat& n) {
  return p - n * dot(p, n);
}

/// Unit quaternion. Always renormalized on construction; construction from a
/// (near-)zero quaternion is an error.
class UnitQuat {
 public:
  UnitQuat() : q_{1.0, 0.0, 0.0, 0.0} {}

  explicit UnitQuat(const Quat& q) : q_(q) {
    const double n2 = norm2(q_);
    if (!std::isfinite(n2) || n2 < kUnitTol) {
      throw std::invalid_argument("UnitQuat: non-finite or near-zero quaternion");
    }
    if (std::abs(n2 - 1.0) > kUnitTol) {
      const double inv = 1.0 / std::sqrt(n2);
      q_ = q_ * inv;
    }
  }
  UnitQuat(double w, double x, double y, double z) : UnitQuat(Quat{w, x, y, z}) {}

  static UnitQuat identity() { return UnitQuat(); }

  const Quat& value() const { return q_; }
  double w() const { return q_.w; }
  double x() const { return q_.x; }
  double y() const { return q_.y; }
  double z() const { return q_.z; }

  UnitQuat operator-() const {
    UnitQuat r;
    r.q_ = -q_;
    return r;
  }

 private:
  Quat q_;
};

inline Quat mul(const UnitQuat& p, const UnitQuat& q) { return mul(p.value(), q.value()); }
inline double dot(const UnitQuat& p, const UnitQuat& q) { return dot(p.value(), q.value()); }
inline UnitQuat conj(const UnitQuat& q) { return UnitQuat(conj(q.value())); }

/// 3x3 matrix, row-major. Used both for rotation matrices (orthonormal,
/// det +1) and for general matrices such as ensemble averages.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }
  static Mat3 zero() { return Mat3{}; }

  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }
  Mat3 operator-(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
    return r;
  }
  Mat3 operator*(double s) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
    return r;
  }
  Mat3& operator+=(const Mat3& o) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] += o.m[i][j];
    return *this;
  }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

inline Vec3 matvec(const Mat3& a, const Vec3& v) {
  return {a.m[0][0] * v.x + a.m[0][1] * v.y + a.m[0][2] * v.z,
          a.m[1][0] * v.x + a.m[1][1] * v.y + a.m[1][2] * v.z,
          a.m[2][0] * v.x + a.m[2][1] * v.y + a.m[2][2] * v.z};
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = a.m[j][i];
  return r;
}

inline double det(const Mat3& a) {
  return a.m[0][0] * (a.m[1][1] * a.m[2][2] - a.m[1][2] * a.m[2][1]) -
         a.m[0][1] * (a.m[1][0] * a.m[2][2] - a.m[1][2] * a.m[2][0]) +
         a.m[0][2] * (a.m[1][0] * a.m[2][1] - a.m[1][1] * a.m[2][0]);
}

inline Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (std::abs(d) < 1e-300) throw std::domain_error("Mat3: singular matrix");
  const double id = 1.0 / d;
  Mat3 r;
  r.m[0][0] = (a.m[1][1] * a.m[2][2] - a.m[1][2] * a.m[2][1]) * id;
  r.m[0][1] = (a.m[0][2] * a.m[2][1] - a.m[0][1] * a.m[2][2]) * id;
  r.m[0][2] = (a.m[0][1] * a.m[1][2] - a.m[0][2] * a.m[1][1]) * id;
  r.m[1][0] = (a.m[1][2] * a.m[2][0] - a.m[1][0] * a.m[2][2]) * id;
  r.m[1][1] = (a.m[0][0] * a.m[2][2] - a.m[0][2] * a.m[2][0]) * id;
  r.m[1][2] = (a.m[0][2] * a.m[1][0] - a.m[0][0] * a.m[1][2]) * id;
  r.m[2][0] = (a.m[1][0] * a.m[2][1] - a.m[1][1] * a.m[2][0]) * id;
  r.m[2][1] = (a.m[0][1] * a.m[2][0] - a.m[0][0] * a.m[2][1]) * id;
  r.m[2][2] = (a.m[0][0] * a.m[1][1] - a.m[0][1] * a.m[1][0]) * id;
  return r;
}

inline double frobenius_norm(const Mat3& a) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a.m[i][j] * a.m[i][j];
  return std::sqrt(s);
}

/// Inner product on SO(3): A.B = Tr(A B^t) / 2.
inline double so3_dot(const Mat3& a, const Mat3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a.m[i][j] * b.m[i][j];
  return 0.5 * s;
}

/// Antisymmetric matrix [u]x such that [u]x v = u x v.
inline Mat3 cross_matrix(const Vec3& u) {
  Mat3 r;
  r.m[0][1] = -u.z; r.m[0][2] = u.y;
  r.m[1][0] = u.z;  r.m[1][2] = -u.x;
  r.m[2][0] = -u.y; r.m[2][1] = u.x;
  return r;
}

/// Axial vector of the antisymmetric part of a.
inline Vec3 axial(const Mat3& a) {
  return {0.5 * (a.m[2][1] - a.m[1][2]),
          0.5 * (a.m[0][2] - a.m[2][0]),
          0.5 * (a.m[1][0] - a.m[0][1])};
}

using RotMatrix = Mat3;

/// Orthonormality defect max(|M^t M - Id|, |det - 1|); rotation matrices keep
/// this below 1e-10.
inline double rotation_defect(const Mat3& a) {
  const Mat3 g = matmul(transpose(a), a);
  double worst = std::abs(det(a) - 1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(g.m[i][j] - target));
    }
  return worst;
}

inline bool is_rotation(const Mat3& a, double tol = 1e-10) { return rotation_defect(a) <= tol; }

/// Rotation given by angle theta in [0, 2pi] around a unit axis. When the
/// angle is degenerate (below kAxisDegenerateTheta) conversions flag the
/// default axis (0,0,1).
struct AxisAngle {
  double theta = 0.0;
  Vec3 axis{0.0, 0.0, 1.0};
  bool axis_defaulted = false;

  AxisAngle() = default;
  AxisAngle(double theta_, const Vec3& axis_) : theta(theta_), axis(axis_) {
    if (!(theta >= -1e-12 && theta <= 2.0 * M_PI + 1e-12)) {
      throw std::invalid_argument("AxisAngle: theta outside [0, 2pi]");
    }
    const double n = norm(axis);
    if (std::abs(n - 1.0) > kUnitTol) {
      if (!(n > 0.0)) throw std::invalid_argument("AxisAngle: zero axis");
      axis = axis * (1.0 / n);
    }
  }
};

inline UnitQuat from_axis_angle(const AxisAngle& aa) {
  const double h = 0.5 * aa.theta;
  return UnitQuat(Quat(std::cos(h), aa.axis * std::sin(h)));
}

inline AxisAngle to_axis_angle(const UnitQuat& q) {
  const Vec3 im = q.value().im();
  const double s = norm(im);
  const double theta = 2.0 * std::atan2(s, q.w());  // in [0, 2pi]
  AxisAngle aa;
  if (theta < kAxisDegenerateTheta) {
    aa.theta = theta;
    aa.axis = {0.0, 0.0, 1.0};
    aa.axis_defaulted = true;
  } else {
    aa.theta = theta;
    aa.axis = im * (1.0 / s);
  }
  return aa;
}

/// Rotation of v by q: Im(q v q*). Preserves |v|; q and -q act identically.
inline Vec3 rotate(const UnitQuat& q, const Vec3& v) {
  // Im(q v q*) expanded; equivalent to the two Hamilton products.
  const Vec3 u = q.value().im();
  const double w = q.w();
  const Vec3 t = cross(u, v) * 2.0;
  return v + w * t + cross(u, t);
}

inline Vec3 e1_of(const UnitQuat& q) { return rotate(q, Vec3{1.0, 0.0, 0.0}); }

/// The 2-to-1 group morphism onto SO(3): columns are the rotated basis
/// vectors, so to_matrix(q) v == rotate(q, v).
inline RotMatrix to_matrix(const UnitQuat& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  RotMatrix a;
  a.m[0][0] = 1.0 - 2.0 * (y * y + z * z);
  a.m[0][1] = 2.0 * (x * y - w * z);
  a.m[0][2] = 2.0 * (x * z + w * y);
  a.m[1][0] = 2.0 * (x * y + w * z);
  a.m[1][1] = 1.0 - 2.0 * (x * x + z * z);
  a.m[1][2] = 2.0 * (y * z - w * x);
  a.m[2][0] = 2.0 * (x * z - w * y);
  a.m[2][1] = 2.0 * (y * z + w * x);
  a.m[2][2] = 1.0 - 2.0 * (x * x + y * y);
  return a;
}

/// Differential of the morphism along the tangent direction u q at q:
/// returns 2 [u]x to_matrix(q).
inline Mat3 dphi(const UnitQuat& q, const Vec3& u) {
  return matmul(cross_matrix(u), to_matrix(q)) * 2.0;
}

/// Body-frame (right-relative) derivative: Im((dq) q*) for a tangent dq.
/// Precondition: dq orthogonal to q (checked to kOrthoTol).
inline Vec3 rel_derivative(const Quat& dq, const UnitQuat& q) {
  const double align = std::abs(dot(dq, q.value()));
  if (align > kOrthoTol * std::max(1.0, norm(dq))) {
    throw std::invalid_argument("rel_derivative: dq is not tangent to q");
  }
  return mul(dq, conj(q.value())).im();
}

/// Exponential map at the identity: b is half the rotation vector, so
/// exp_map(b) = cos|b| + sin|b| b/|b|.
inline UnitQuat exp_map(const Vec3& b) {
  const double t = norm(b);
  if (t < 1e-300) return UnitQuat::identity();
  const double s = std::sin(t) / t;
  return UnitQuat(Quat(std::cos(t), b * s));
}

/// Principal logarithm on the unit quaternions: |log_map(q)| <= pi/2 + ...,
/// with the branch chosen from the sign-free angle atan2(|Im q|, Re q).
inline Vec3 log_map(const UnitQuat& q) {
  const Vec3 im = q.value().im();
  const double s = norm(im);
  if (s < 1e-300) return {0.0, 0.0, 0.0};
  const double half = std::atan2(s, q.w());
  return im * (half / s);
}

}  // namespace qflock

#endif  // QFLOCK_QUAT_HPP
