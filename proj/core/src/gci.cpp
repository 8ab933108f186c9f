#include "qflock/gci.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "qflock/equilibria.hpp"

namespace qflock::gci {

namespace {

// Chebyshev collocation points on [0, 1] (ascending) with the barycentric
// differentiation matrix.
struct Collocation {
  std::vector<double> r;
  std::vector<double> lam;  // barycentric weights
  Eigen::MatrixXd d1;
};

Collocation chebyshev_grid(int n_points) {
  const int n = n_points - 1;
  Collocation c;
  c.r.resize(n_points);
  c.lam.resize(n_points);
  for (int j = 0; j <= n; ++j) {
    c.r[j] = 0.5 * (1.0 - std::cos(M_PI * j / n));
    c.lam[j] = ((j % 2 == 0) ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  }
  c.d1.resize(n_points, n_points);
  for (int i = 0; i <= n; ++i) {
    double diag = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double v = (c.lam[j] / c.lam[i]) / (c.r[i] - c.r[j]);
      c.d1(i, j) = v;
      diag -= v;
    }
    c.d1(i, i) = diag;
  }
  return c;
}

double barycentric_eval(const Collocation& g, const Eigen::VectorXd& values, double x) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < g.r.size(); ++j) {
    const double dx = x - g.r[j];
    if (std::abs(dx) < 1e-14) return values(static_cast<Eigen::Index>(j));
    const double w = g.lam[j] / dx;
    num += w * values(static_cast<Eigen::Index>(j));
    den += w;
  }
  return num / den;
}

// Cubic Hermite on an ascending grid with values y and slopes dy.
double hermite(const std::vector<double>& xs, const std::vector<double>& y,
               const std::vector<double>& dy, double x) {
  const std::size_t n = xs.size();
  if (x <= xs.front()) x = xs.front();
  if (x >= xs.back()) x = xs.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
  const double x0 = xs[i], x1 = xs[i + 1], dx = x1 - x0;
  const double t = (x - x0) / dx;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y[i] + (t3 - 2.0 * t2 + t) * dx * dy[i] +
         (-2.0 * t3 + 3.0 * t2) * y[i + 1] + (t3 - t2) * dx * dy[i + 1];
}

}  // namespace

double GciTable::eval_h(double x) const { return hermite(r, h, hprime, x); }
double GciTable::eval_hprime(double x) const { return hermite(r, hprime, hsecond, x); }

GciTable solve_h(double d, int n_nodes) {
  if (!(d > 0.0)) throw std::invalid_argument("solve_h: d must be positive");
  if (n_nodes < 64) throw std::invalid_argument("solve_h: n_nodes must be >= 64");

  const Collocation grid = chebyshev_grid(n_nodes);
  const int n = n_nodes;
  const Eigen::MatrixXd d2 = grid.d1 * grid.d1;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double r = grid.r[i];
    const double one_m_r2 = 1.0 - r * r;
    for (int j = 0; j < n; ++j) {
      a(i, j) = one_m_r2 * d2(i, j) + ((4.0 / d) * one_m_r2 - 5.0) * r * grid.d1(i, j);
    }
    a(i, i) -= 3.0 + 4.0 * r * r / d;
    b(i) = r;
  }
  // Oddness pins h(0) = 0. At r = 1 the second-order coefficient vanishes and
  // the collocation row itself selects the analytic branch.
  a.row(0).setZero();
  a(0, 0) = 1.0;
  b(0) = 0.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd h = lu.solve(b);
  const double defect = (a * h - b).cwiseAbs().maxCoeff();
  if (!h.allFinite() || defect > 1e-8) {
    throw SolverFailure("solve_h: collocation solve failed, defect " + std::to_string(defect) +
                        " at d = " + std::to_string(d));
  }
  h(0) = 0.0;
  const Eigen::VectorXd hp = grid.d1 * h;
  const Eigen::VectorXd hpp = d2 * h;

  // Resample onto a uniform grid: the solution is resolved to machine
  // precision, and evenly spaced nodes keep finite-difference residual
  // checks on the table well conditioned near the clustered ends.
  std::vector<double> ru(static_cast<std::size_t>(n)), hu(ru.size()), hpu(ru.size()),
      hppu(ru.size());
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1);
    ru[i] = x;
    hu[i] = barycentric_eval(grid, h, x);
    hpu[i] = barycentric_eval(grid, hp, x);
    hppu[i] = barycentric_eval(grid, hpp, x);
  }
  hu[0] = 0.0;

  // Reflect to (-1, 1): h odd, h' even, h'' odd.
  GciTable t;
  t.d = d;
  t.r.reserve(2 * n - 1);
  t.h.reserve(2 * n - 1);
  t.hprime.reserve(2 * n - 1);
  t.hsecond.reserve(2 * n - 1);
  for (int i = n - 1; i >= 1; --i) {
    t.r.push_back(-ru[i]);
    t.h.push_back(-hu[i]);
    t.hprime.push_back(hpu[i]);
    t.hsecond.push_back(-hppu[i]);
  }
  for (int i = 0; i < n; ++i) {
    t.r.push_back(ru[i]);
    t.h.push_back(hu[i]);
    t.hprime.push_back(hpu[i]);
    t.hsecond.push_back(hppu[i]);
  }

  for (std::size_t i = 0; i < t.r.size(); ++i) {
    if (t.r[i] >= 0.0 && t.h[i] > 1e-10) {
      throw SolverFailure("solve_h: positivity violation h(" + std::to_string(t.r[i]) +
                          ") = " + std::to_string(t.h[i]));
    }
  }
  return t;
}

namespace {

// Derivatives at node i from the degree-4 polynomial through nodes
// [lo, lo+4], by Newton divided differences.
void local_poly_derivs(const std::vector<double>& x, const std::vector<double>& y,
                       std::size_t lo, double at, double& d1, double& d2) {
  double xs[5], c[5];
  for (int k = 0; k < 5; ++k) {
    xs[k] = x[lo + k];
    c[k] = y[lo + k];
  }
  for (int j = 1; j < 5; ++j)
    for (int k = 4; k >= j; --k) c[k] = (c[k] - c[k - 1]) / (xs[k] - xs[k - j]);
  // Horner for p', p'' of the Newton form at `at`.
  double p = c[4], dp = 0.0, ddp = 0.0;
  for (int k = 3; k >= 0; --k) {
    ddp = ddp * (at - xs[k]) + 2.0 * dp;
    dp = dp * (at - xs[k]) + p;
    p = p * (at - xs[k]) + c[k];
  }
  d1 = dp;
  d2 = ddp;
}

}  // namespace

double ode_residual_max(const GciTable& t) {
  const double d = t.d;
  const std::size_t n = t.r.size();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t lo = std::min(std::max<std::size_t>(i, 2) - 2, n - 5);
    double h1 = 0.0, h2 = 0.0;
    local_poly_derivs(t.r, t.h, lo, t.r[i], h1, h2);
    const double r = t.r[i];
    const double res = (-4.0 / d * r * r - 3.0) * t.h[i] +
                       ((4.0 / d) * (1.0 - r * r) - 5.0) * r * h1 + (1.0 - r * r) * h2 - r;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

double eval_psi(const GciFunction& f, const UnitQuat& q) {
  return dot(f.beta, q.value()) * f.table->eval_h(dot(f.qbar, q));
}

Quat psi_gradient(const GciFunction& f, const UnitQuat& q) {
  const double r = dot(f.qbar, q);
  const Quat pbeta = project_orthogonal(f.beta, q.value());
  const Quat pqbar = project_orthogonal(f.qbar.value(), q.value());
  return pbeta * f.table->eval_h(r) + pqbar * (dot(f.beta, q.value()) * f.table->eval_hprime(r));
}

WeakFormReport weak_form_defects(const GciFunction& f, double d, std::size_t n_mc, Rng& rng) {
  equilibria::EquilibriumDist dist{equilibria::NoiseRatio(d), f.qbar};

  // Dictionary: 1, the four coordinates, and five quadratics.
  struct TestFn {
    double (*phi)(const Quat&);
    Quat (*grad_ambient)(const Quat&);
  };
  static const TestFn dict[10] = {
      {[](const Quat&) { return 1.0; }, [](const Quat&) { return Quat{}; }},
      {[](const Quat& q) { return q.w; }, [](const Quat&) { return Quat{1, 0, 0, 0}; }},
      {[](const Quat& q) { return q.x; }, [](const Quat&) { return Quat{0, 1, 0, 0}; }},
      {[](const Quat& q) { return q.y; }, [](const Quat&) { return Quat{0, 0, 1, 0}; }},
      {[](const Quat& q) { return q.z; }, [](const Quat&) { return Quat{0, 0, 0, 1}; }},
      {[](const Quat& q) { return q.w * q.w; }, [](const Quat& q) { return Quat{2 * q.w, 0, 0, 0}; }},
      {[](const Quat& q) { return q.w * q.x; }, [](const Quat& q) { return Quat{q.x, q.w, 0, 0}; }},
      {[](const Quat& q) { return q.x * q.y; }, [](const Quat& q) { return Quat{0, q.y, q.x, 0}; }},
      {[](const Quat& q) { return q.x * q.x - q.y * q.y; },
       [](const Quat& q) { return Quat{0, 2 * q.x, -2 * q.y, 0}; }},
      {[](const Quat& q) { return q.y * q.z; }, [](const Quat& q) { return Quat{0, 0, q.z, q.y}; }},
  };

  // Samples are drawn from M itself, so both sides of the weak identity are
  // plain means and the defect of each phi is a single correlated estimator.
  constexpr int kDict = 10;
  double sum[kDict] = {}, sum2[kDict] = {};
  for (std::size_t s = 0; s < n_mc; ++s) {
    const UnitQuat q = equilibria::sample(dist, rng);
    const Quat grad_psi = psi_gradient(f, q);
    const double proj = dot(q.value(), f.qbar.value());
    for (int k = 0; k < kDict; ++k) {
      const Quat grad_phi = project_orthogonal(dict[k].grad_ambient(q.value()), q.value());
      const double lhs = dot(grad_psi, grad_phi);
      const double rhs = dot(f.beta, q.value()) * proj * dict[k].phi(q.value());
      const double v = lhs + rhs;
      sum[k] += v;
      sum2[k] += v * v;
    }
  }

  WeakFormReport rep;
  rep.defect.resize(kDict);
  rep.std_error.resize(kDict);
  for (int k = 0; k < kDict; ++k) {
    const double mean = sum[k] / static_cast<double>(n_mc);
    const double var =
        std::max(0.0, (sum2[k] - sum[k] * mean) / static_cast<double>(n_mc - 1));
    rep.defect[k] = mean;
    rep.std_error[k] = std::sqrt(var / static_cast<double>(n_mc));
    if (rep.std_error[k] > 0.0) {
      rep.max_normalized = std::max(rep.max_normalized, std::abs(mean) / rep.std_error[k]);
    }
  }
  return rep;
}

double weak_residual(const GciFunction& f, double d, std::size_t n_mc, Rng& rng) {
  return weak_form_defects(f, d, n_mc, rng).max_normalized;
}

double k_from_h(const GciTable& t, double theta) {
  if (theta > M_PI - 1e-3) {
    throw std::domain_error("k_from_h: theta too close to pi (cos(theta/2) vanishes)");
  }
  const double c = std::cos(0.5 * theta);
  return 4.0 * t.eval_h(c) / c;
}

double k_eval_stable(const GciTable& t, double theta) {
  const double c = std::cos(0.5 * theta);
  if (std::abs(c) < 1e-4) return 4.0 * t.eval_hprime(c);
  return 4.0 * t.eval_h(c) / c;
}

double k_ode_residual(const GciTable& t, double theta_min, double theta_max, int n_grid) {
  if (n_grid < 9) throw std::invalid_argument("k_ode_residual: grid too small");
  const double d = t.d;
  const double dth = (theta_max - theta_min) / (n_grid - 1);

  // G(theta) = s^2 m(theta) d/dtheta(sin(theta) k), with the inner derivative
  // in closed form from the table: d/dtheta(sin(theta) k) = 4 c h - 4 s^2 h'.
  const auto big_g = [&](double th) {
    const double c = std::cos(0.5 * th), s = std::sin(0.5 * th);
    return s * s * equilibria::weight_m(th, d) *
           (4.0 * c * t.eval_h(c) - 4.0 * s * s * t.eval_hprime(c));
  };

  double worst = 0.0;
  for (int i = 0; i < n_grid; ++i) {
    const double th = theta_min + i * dth;
    // 5-point central first derivative of G.
    const double gm2 = big_g(th - 2.0 * dth), gm1 = big_g(th - dth);
    const double gp1 = big_g(th + dth), gp2 = big_g(th + 2.0 * dth);
    const double dg = (gm2 - 8.0 * gm1 + 8.0 * gp1 - gp2) / (12.0 * dth);
    const double s2 = std::sin(0.5 * th) * std::sin(0.5 * th);
    const double m = equilibria::weight_m(th, d);
    const double k = k_eval_stable(t, th);
    const double res = dg / s2 - m * std::sin(th) * k / (2.0 * s2) - m * std::sin(th);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

}  // namespace qflock::gci
