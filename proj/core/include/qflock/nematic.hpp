#ifndef QFLOCK_NEMATIC_HPP
#define QFLOCK_NEMATIC_HPP

#include <array>
#include <optional>
#include <span>
#include <stdexcept>

#include "qflock/quat.hpp"

namespace qflock {

/// 4x4 symmetric matrix acting on quaternions seen as 4-vectors.
struct Mat4 {
  std::array<std::array<double, 4>, 4> m{};

  static Mat4 identity() {
    Mat4 r;
    for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
    return r;
  }

  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }

  Mat4 operator+(const Mat4& o) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
  }
  Mat4 operator*(double s) const {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r.m[i][j] = m[i][j] * s;
    return r;
  }

  double trace() const { return m[0][0] + m[1][1] + m[2][2] + m[3][3]; }
};

inline Quat apply(const Mat4& a, const Quat& q) {
  Quat r;
  r.w = a.m[0][0] * q.w + a.m[0][1] * q.x + a.m[0][2] * q.y + a.m[0][3] * q.z;
  r.x = a.m[1][0] * q.w + a.m[1][1] * q.x + a.m[1][2] * q.y + a.m[1][3] * q.z;
  r.y = a.m[2][0] * q.w + a.m[2][1] * q.x + a.m[2][2] * q.y + a.m[2][3] * q.z;
  r.z = a.m[3][0] * q.w + a.m[3][1] * q.x + a.m[3][2] * q.y + a.m[3][3] * q.z;
  return r;
}

/// Rank-one update a += s * (q x q).
inline void add_outer(Mat4& a, const Quat& q, double s) {
  const double c[4] = {q.w, q.x, q.y, q.z};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a.m[i][j] += s * c[i] * c[j];
}

/// The nematic average operator: (1/N) sum_i w_i (q_i x q_i - Id/4).
/// Traceless and invariant under flipping the sign of any input.
using QTensor = Mat4;

/// Full spectrum of a symmetric 4x4 matrix, eigenvalues descending,
/// eigenvectors as columns of v (orthonormal). Cyclic Jacobi rotations.
struct SymEig4 {
  std::array<double, 4> values{};
  Mat4 vectors;  // column j is the eigenvector of values[j]
};

SymEig4 jacobi_eig4(const Mat4& a);

struct NematicMean {
  UnitQuat qbar;
  double lambda_max = 0.0;
  double spectral_gap = 0.0;  // lambda_max - lambda_second, >= 0
};

/// Raised when the maximal eigenvalue of a QTensor is (numerically) multiple
/// and the caller did not opt into arbitrary tie-breaking.
class DegenerateMaximumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

QTensor build_qtensor(std::span<const UnitQuat> quats, std::span<const double> weights);

/// Convenience for unit weights.
QTensor build_qtensor(std::span<const UnitQuat> quats);

/// Maximizer of q . Q q over the unit quaternions. The sign of qbar is
/// aligned with `hint` when given (dot >= 0); without a hint it is whatever
/// the eigensolver produced, deterministic for identical input bits.
NematicMean principal_eigvec(const QTensor& q, std::optional<UnitQuat> hint = std::nullopt,
                             double gap_tol = 1e-9, bool allow_ties = false);

/// q . Q q; for a tensor from build_qtensor this is
/// (1/N) sum w_i ((q_i . q)^2 - 1/4).
inline double maximizer_objective(const QTensor& t, const UnitQuat& q) {
  return dot(q.value(), apply(t, q.value()));
}

}  // namespace qflock

#endif  // QFLOCK_NEMATIC_HPP
