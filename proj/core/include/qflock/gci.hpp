#ifndef QFLOCK_GCI_HPP
#define QFLOCK_GCI_HPP

#include <stdexcept>
#include <vector>

#include "qflock/quat.hpp"
#include "qflock/rng.hpp"

namespace qflock::gci {

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tabulated solution h(r) of the singular two-point problem
///   (1-r^2) h'' + ((4/d)(1-r^2) - 5) r h' - (3 + (4/d) r^2) h = r
/// on (-1, 1), with h odd and h <= 0 on [0, 1]. Solved on [0, 1] with
/// h(0) = 0 and the analytic branch at r = 1 (the weight (1-r^2)^{5/2} of the
/// self-adjoint form vanishes there), then reflected. Interpolation between
/// nodes is cubic Hermite, C^1, with tabulated derivative data.
struct GciTable {
  double d = 0.0;
  std::vector<double> r;        // ascending nodes in [-1, 1], symmetric, r=0 included
  std::vector<double> h;        // odd
  std::vector<double> hprime;   // even
  std::vector<double> hsecond;  // interpolation slopes for hprime

  double eval_h(double x) const;
  double eval_hprime(double x) const;
};

/// Solve the profile equation at noise ratio d with n_nodes Chebyshev
/// collocation points on [0, 1] (n_nodes >= 64).
GciTable solve_h(double d, int n_nodes = 256);

/// Max norm over interior nodes of the strong-form residual, with h' and h''
/// reconstructed by local 5-point polynomial differentiation of the tabulated
/// values (independent of how the table was produced).
double ode_residual_max(const GciTable& table);

/// psi^beta(q) = (beta . q) h(q . qbar) with beta = b qbar, b in R^3, so that
/// beta is tangent at qbar by construction.
struct GciFunction {
  UnitQuat qbar;
  Quat beta;              // tangent at qbar
  const GciTable* table;  // borrowed; must outlive the function

  GciFunction(const UnitQuat& qbar_, const Vec3& b, const GciTable& table_)
      : qbar(qbar_), beta(mul(Quat::from_vec(b), qbar_.value())), table(&table_) {
    if (std::abs(dot(beta, qbar.value())) > 1e-10) {
      throw std::invalid_argument("GciFunction: beta is not tangent to qbar");
    }
  }
};

double eval_psi(const GciFunction& f, const UnitQuat& q);

/// Tangential gradient of psi at q (chain rule through the tabulated h, h').
Quat psi_gradient(const GciFunction& f, const UnitQuat& q);

struct WeakFormReport {
  std::vector<double> defect;     // one per dictionary test function
  std::vector<double> std_error;  // Monte-Carlo standard errors
  double max_normalized = 0.0;    // max |defect| / std_error
};

/// Monte-Carlo check of the weak formulation
///   int M ∇psi . ∇phi dq + beta . int q (q.qbar) phi M dq = 0
/// against a fixed dictionary of low-order polynomial test functions.
WeakFormReport weak_form_defects(const GciFunction& f, double d, std::size_t n_mc, Rng& rng);

/// Scalar form: max defect in units of its Monte-Carlo standard error.
double weak_residual(const GciFunction& f, double d, std::size_t n_mc, Rng& rng);

/// Rotation-matrix-side profile k(theta) = 4 h(cos(theta/2)) / cos(theta/2).
/// theta must stay 1e-3 away from pi, where cos(theta/2) vanishes.
double k_from_h(const GciTable& table, double theta);

/// Stable evaluation used internally by the coefficient brackets; switches to
/// 4 h'(c) near c = 0 (the theta -> pi limit of the ratio).
double k_eval_stable(const GciTable& table, double theta);

/// Max-norm residual of the matrix-side profile equation
///   (1/s^2) d/dtheta [ s^2 m d/dtheta (sin(theta) k) ] - m sin(theta) k / (2 s^2)
///     = m sin(theta),   s = sin(theta/2),
/// on a uniform theta grid of [theta_min, theta_max]. The inner derivative is
/// taken from the tabulated h, h' via the chain rule; the outer one by
/// 5-point central finite differences.
double k_ode_residual(const GciTable& table, double theta_min = 0.05,
                      double theta_max = M_PI - 0.05, int n_grid = 2001);

}  // namespace qflock::gci

#endif  // QFLOCK_GCI_HPP
