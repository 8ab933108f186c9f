#include "qflock/nematic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qflock {

SymEig4 jacobi_eig4(const Mat4& input) {
  Mat4 a = input;
  Mat4 v = Mat4::identity();

  auto off_norm2 = [&]() {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) s += a.m[i][j] * a.m[i][j];
    return s;
  };

  double scale = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) scale = std::max(scale, std::abs(a.m[i][j]));
  const double stop = std::max(scale * 1e-15, 1e-300);

  for (int sweep = 0; sweep < 64 && off_norm2() > stop * stop; ++sweep) {
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double apq = a.m[p][q];
        if (std::abs(apq) <= stop * 1e-2) continue;
        const double theta = (a.m[q][q] - a.m[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < 4; ++k) {
          const double akp = a.m[k][p], akq = a.m[k][q];
          a.m[k][p] = c * akp - s * akq;
          a.m[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a.m[p][k], aqk = a.m[q][k];
          a.m[p][k] = c * apk - s * aqk;
          a.m[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = v.m[k][p], vkq = v.m[k][q];
          v.m[k][p] = c * vkp - s * vkq;
          v.m[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  SymEig4 out;
  std::array<int, 4> order = {0, 1, 2, 3};
  std::array<double, 4> vals = {a.m[0][0], a.m[1][1], a.m[2][2], a.m[3][3]};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return vals[i] > vals[j]; });
  for (int j = 0; j < 4; ++j) {
    out.values[j] = vals[order[j]];
    for (int i = 0; i < 4; ++i) out.vectors.m[i][j] = v.m[i][order[j]];
  }
  return out;
}

QTensor build_qtensor(std::span<const UnitQuat> quats, std::span<const double> weights) {
  if (quats.empty()) throw std::invalid_argument("build_qtensor: empty input");
  if (quats.size() != weights.size()) {
    throw std::invalid_argument("build_qtensor: quats and weights differ in length");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("build_qtensor: weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("build_qtensor: all weights are zero");

  const double inv_n = 1.0 / static_cast<double>(quats.size());
  Mat4 t;
  for (std::size_t i = 0; i < quats.size(); ++i) {
    add_outer(t, quats[i].value(), weights[i] * inv_n);
  }
  const double d = 0.25 * total * inv_n;
  for (int i = 0; i < 4; ++i) t.m[i][i] -= d;
  return t;
}

QTensor build_qtensor(std::span<const UnitQuat> quats) {
  std::vector<double> w(quats.size(), 1.0);
  return build_qtensor(quats, w);
}

NematicMean principal_eigvec(const QTensor& q, std::optional<UnitQuat> hint, double gap_tol,
                             bool allow_ties) {
  const SymEig4 eig = jacobi_eig4(q);
  const double gap = eig.values[0] - eig.values[1];
  if (gap < gap_tol && !allow_ties) {
    throw DegenerateMaximumError(
        "principal_eigvec: maximal eigenvalue is (numerically) multiple, spectral gap " +
        std::to_string(gap));
  }
  Quat top{eig.vectors.m[0][0], eig.vectors.m[1][0], eig.vectors.m[2][0], eig.vectors.m[3][0]};
  if (hint && dot(top, hint->value()) < 0.0) top = -top;
  NematicMean mean{UnitQuat(top), eig.values[0], gap};
  return mean;
}

}  // namespace qflock
