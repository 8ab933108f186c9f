#include "qflock/coeffs.hpp"

#include <cmath>
#include <string>

#include "qflock/equilibria.hpp"
#include "qflock/quadrature.hpp"

namespace qflock::coeffs {

namespace {

using Fn = std::function<double(double)>;

double bracket_fixed(const Fn& g, const Fn& w, int panels) {
  const auto num = [&](double t) { return g(t) * w(t); };
  const double top = quadrature::integrate_composite(num, 0.0, M_PI, panels, 16);
  const double bot = quadrature::integrate_composite(w, 0.0, M_PI, panels, 16);
  if (std::abs(bot) < 1e-14) {
    throw DegenerateWeightError("bracket: integral of the weight is below 1e-14");
  }
  return top / bot;
}

struct Weights {
  Fn m_sin2;   // m(theta) sin^2(theta/2)
  Fn w_h;      // m sin^4(theta/2) h(cos(theta/2)) cos(theta/2)
  Fn w_tilde;  // sin^2(theta) m k(theta) sin^2(theta/2)
};

Weights make_weights(double d, const gci::GciTable& table) {
  Weights w;
  w.m_sin2 = [d](double t) {
    const double s = std::sin(0.5 * t);
    return equilibria::weight_m(t, d) * s * s;
  };
  w.w_h = [d, &table](double t) {
    const double s = std::sin(0.5 * t), c = std::cos(0.5 * t);
    const double s2 = s * s;
    return equilibria::weight_m(t, d) * s2 * s2 * table.eval_h(c) * c;
  };
  w.w_tilde = [d, &table](double t) {
    const double st = std::sin(t), s = std::sin(0.5 * t);
    return st * st * equilibria::weight_m(t, d) * gci::k_eval_stable(table, t) * s * s;
  };
  return w;
}

void check_table(double d, const gci::GciTable& table) {
  if (std::abs(table.d - d) > 1e-12 * std::max(1.0, std::abs(d))) {
    throw std::invalid_argument("coeffs: table was solved at d = " + std::to_string(table.d) +
                                ", requested d = " + std::to_string(d));
  }
}

HydroCoefficients compute_with_panels(double d, const gci::GciTable& table, int panels) {
  const Weights w = make_weights(d, table);
  const auto g_c1 = [](double t) { return 0.5 + std::cos(t); };
  const auto g_c2 = [](double t) { return 1.0 + 4.0 * std::cos(t); };
  const auto g_c4 = [](double t) { return 1.0 - std::cos(t); };
  const auto g_ct2 = [](double t) { return 2.0 + 3.0 * std::cos(t); };

  HydroCoefficients c;
  c.d = d;
  c.c1 = (2.0 / 3.0) * bracket_fixed(g_c1, w.m_sin2, panels);
  c.c2 = 0.2 * bracket_fixed(g_c2, w.w_h, panels);
  c.c3 = 0.5 * d;
  c.c4 = 0.2 * bracket_fixed(g_c4, w.w_h, panels);
  c.ct2 = 0.2 * bracket_fixed(g_ct2, w.w_tilde, panels);
  c.ct3 = d;
  c.ct4 = 0.2 * bracket_fixed(g_c4, w.w_tilde, panels);
  return c;
}

}  // namespace

double bracket(const Fn& g, const Fn& w) {
  const auto num = [&](double t) { return g(t) * w(t); };
  const double top = quadrature::integrate_adaptive(num, 0.0, M_PI, 1e-11).value;
  const double bot = quadrature::integrate_adaptive(w, 0.0, M_PI, 1e-11).value;
  if (std::abs(bot) < 1e-14) {
    throw DegenerateWeightError("bracket: integral of the weight is below 1e-14");
  }
  return top / bot;
}

HydroCoefficients compute(double d, const gci::GciTable& table) {
  check_table(d, table);
  // Concentrated weights (small d) need panels finer than the m peak width
  // ~ sqrt(d); 64 panels cover d >= 0.01, doubled for the error report.
  const int base_panels = 64;
  const HydroCoefficients coarse = compute_with_panels(d, table, base_panels);
  HydroCoefficients fine = compute_with_panels(d, table, 2 * base_panels);
  double err = 0.0;
  err = std::max(err, std::abs(coarse.c1 - fine.c1));
  err = std::max(err, std::abs(coarse.c2 - fine.c2));
  err = std::max(err, std::abs(coarse.c4 - fine.c4));
  err = std::max(err, std::abs(coarse.ct2 - fine.ct2));
  err = std::max(err, std::abs(coarse.ct4 - fine.ct4));
  fine.quadrature_error = err;
  return fine;
}

ProofConstants proof_constants(double d, const gci::GciTable& table) {
  check_table(d, table);
  const double log_z = equilibria::log_normalizer(d);

  // H(cos(theta/2)) against the volume element 4 pi sin^2(theta/2), with
  // H(r) = M(r) h(r) r and log M = (1/2 + cos theta)/d - log Z.
  const auto h_weighted = [&](const Fn& g) {
    const auto f = [&](double t) {
      const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
      const double m_val = std::exp((0.5 + std::cos(t)) / d - log_z);
      return g(t) * m_val * table.eval_h(c) * c * s * s;
    };
    return 4.0 * M_PI * quadrature::integrate_adaptive(f, 0.0, M_PI, 1e-12).value;
  };

  // Angular moments of the axis over S^2, by the same double quadrature that
  // appears in the derivation (theta_2 polar, theta_3 azimuthal).
  const auto n1sq_n2sq = [](double t2, double t3) {
    const double n1 = std::cos(t2), n2 = std::sin(t2) * std::cos(t3);
    return n1 * n1 * n2 * n2 * std::sin(t2);
  };
  const auto n1_fourth = [](double t2, double t3) {
    (void)t3;
    const double n1 = std::cos(t2);
    return n1 * n1 * n1 * n1 * std::sin(t2);
  };
  const auto integrate_s2 = [](const std::function<double(double, double)>& f) {
    const auto outer = [&](double t2) {
      const auto inner = [&](double t3) { return f(t2, t3); };
      return quadrature::integrate_composite(inner, 0.0, 2.0 * M_PI, 8, 20);
    };
    return quadrature::integrate_composite(outer, 0.0, M_PI, 8, 20);
  };

  ProofConstants pc;
  pc.C2 = h_weighted([](double t) {
            const double s = std::sin(0.5 * t);
            return s * s / 3.0;
          });
  pc.C3 = h_weighted([](double t) {
            const double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
            return (2.0 * c * c - 1.0) * s * s / 3.0;
          });
  const double radial = h_weighted([](double t) {
                          const double s = std::sin(0.5 * t);
                          return s * s * s * s;
                        }) /
                        (4.0 * M_PI);
  pc.C5 = integrate_s2(n1sq_n2sq) * radial;
  pc.C4 = integrate_s2(n1_fourth) * radial - pc.C5;
  return pc;
}

}  // namespace qflock::coeffs
