#ifndef QFLOCK_QUADRATURE_HPP
#define QFLOCK_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace qflock::quadrature {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre nodes/weights of order n (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Single-panel Gauss-Legendre integral of f on [a, b].
double integrate_panel(const std::function<double(double)>& f, double a, double b, int n);

/// Composite rule: panels equal subintervals, order-n Gauss per panel.
double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int panels, int n = 20);

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive bisection with order-15 / order-30 comparison per panel.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-12, double abs_floor = 1e-300,
                                  int max_depth = 48);

}  // namespace qflock::quadrature

#endif  // QFLOCK_QUADRATURE_HPP
