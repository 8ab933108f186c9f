#include "qflock/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qflock::quadrature {

namespace {

GaussRule make_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
  return it->second;
}

double integrate_panel(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += r.weights[i] * f(c + h * r.nodes[i]);
  return s * h;
}

double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int panels, int n) {
  if (panels < 1) throw std::invalid_argument("integrate_composite: panels must be >= 1");
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) s += integrate_panel(f, a + p * h, a + (p + 1) * h, n);
  return s;
}

namespace {

struct AdaptCtx {
  double tol_per_length = 0.0;
  double abs_floor = 0.0;
  int max_depth = 0;
  long panel_budget = 1 << 22;
};

void adapt(const std::function<double(double)>& f, double a, double b, double coarse,
           AdaptCtx& ctx, int depth, AdaptiveResult& out) {
  const double mid = 0.5 * (a + b);
  const double left = integrate_panel(f, a, mid, 15);
  const double right = integrate_panel(f, mid, b, 15);
  const double fine = left + right;
  const double err = std::abs(fine - coarse);
  --ctx.panel_budget;
  if (depth >= ctx.max_depth || ctx.panel_budget <= 0 ||
      err <= ctx.tol_per_length * (b - a) + ctx.abs_floor) {
    out.value += fine;
    out.error_estimate += err;
    return;
  }
  adapt(f, a, mid, left, ctx, depth + 1, out);
  adapt(f, mid, b, right, ctx, depth + 1, out);
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_floor, int max_depth) {
  AdaptiveResult out;
  const double coarse = integrate_panel(f, a, b, 15);
  // Per-length error budget relative to the integral of |f| (not the signed
  // integral, which can vanish under cancellation), so the accumulated defect
  // over all panels stays below rel_tol * int |f|.
  const double scale =
      std::abs(integrate_panel([&](double x) { return std::abs(f(x)); }, a, b, 30));
  AdaptCtx ctx;
  ctx.tol_per_length =
      std::max(rel_tol * scale, 1e-15 * scale) / std::max(b - a, 1e-300);
  ctx.abs_floor = abs_floor;
  ctx.max_depth = max_depth;
  adapt(f, a, b, coarse, ctx, 0, out);
  return out;
}

}  // namespace qflock::quadrature
