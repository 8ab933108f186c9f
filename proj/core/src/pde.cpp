#include "qflock/pde.hpp"

#include <cmath>
#include <string>

namespace qflock::pde {

namespace {

std::size_t next(std::size_t i, std::size_t n) { return (i + 1 == n) ? 0 : i + 1; }
std::size_t prev(std::size_t i, std::size_t n) { return (i == 0) ? n - 1 : i - 1; }

double e1x(const UnitQuat& q) { return e1_of(q).x; }

}  // namespace

void gauge_fix(HydroField& field) {
  const std::size_t n = field.size();
  if (n < 2) return;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (dot(field.qbar[i], field.qbar[i + 1]) < 0.0) {
      field.qbar[i + 1] = -field.qbar[i + 1];
    }
  }
  if (dot(field.qbar[n - 1], field.qbar[0]) < 0.0) {
    throw TopologicalDefectError(
        "gauge_fix: odd number of sign flips around the periodic loop");
  }
}

std::vector<Vec3> rel_grad(const HydroField& field) {
  const std::size_t n = field.size();
  if (n < 3) throw std::invalid_argument("rel_grad: need at least 3 cells");
  const double inv2dx = 1.0 / (2.0 * field.dx);
  std::vector<Vec3> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = next(i, n), im = prev(i, n);
    if (dot(field.qbar[i], field.qbar[ip]) < 0.0 || dot(field.qbar[i], field.qbar[im]) < 0.0) {
      throw SignDiscontinuityError("rel_grad: neighbor sign discontinuity at cell " +
                                   std::to_string(i));
    }
    const Quat dq = (field.qbar[ip].value() - field.qbar[im].value()) * inv2dx;
    out[i] = mul(dq, conj(field.qbar[i].value())).im();
  }
  return out;
}

Rhs rhs(const HydroField& field, const coeffs::HydroCoefficients& c) {
  const std::size_t n = field.size();
  if (n < 3) throw std::invalid_argument("rhs: need at least 3 cells");
  const double inv2dx = 1.0 / (2.0 * field.dx);
  const double invdx = 1.0 / field.dx;

  Rhs out;
  out.drho.resize(n);
  out.dqbar.resize(n);

  // Cell-face mass fluxes c1 * average(u rho); the telescoping sum keeps the
  // total mass exact.
  std::vector<double> urho(n);
  for (std::size_t i = 0; i < n; ++i) urho[i] = e1x(field.qbar[i]) * field.rho[i];

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = next(i, n), im = prev(i, n);
    const double flux_right = 0.5 * c.c1 * (urho[i] + urho[ip]);
    const double flux_left = 0.5 * c.c1 * (urho[im] + urho[i]);
    out.drho[i] = -(flux_right - flux_left) * invdx;

    const Quat qi = field.qbar[i].value();
    const Vec3 u3 = e1_of(field.qbar[i]);
    const Quat dqdx = (field.qbar[ip].value() - field.qbar[im].value()) * inv2dx;
    const Vec3 grad_rho{(field.rho[ip] - field.rho[im]) * inv2dx, 0.0, 0.0};
    const Vec3 rel = mul(dqdx, conj(qi)).im();

    // transport, projected tangent
    Quat dq = project_orthogonal(dqdx, qi) * (-c.c2 * u3.x);
    // pressure rotation, skipped in vacuum cells
    if (field.rho[i] > kRhoFloor) {
      const Vec3 vp = cross(u3, grad_rho) * (c.c3 / field.rho[i]);
      dq = dq - mul(Quat::from_vec(vp), qi);
    } else {
      ++out.vacuum_skips;
    }
    // the two relative-gradient terms
    const Vec3 w = Vec3{dot(rel, u3), 0.0, 0.0} + rel.x * u3;
    dq = dq - mul(Quat::from_vec(w), qi) * c.c4;

    out.dqbar[i] = dq;
  }
  return out;
}

void step(HydroField& field, const coeffs::HydroCoefficients& c, double dt) {
  const double speed = std::max(std::abs(c.c1), std::abs(c.c2));
  if (dt * speed / field.dx > 0.4 + 1e-12) {
    throw CflError("step: CFL violation, dt max(|c1|,|c2|)/dx = " +
                   std::to_string(dt * speed / field.dx));
  }
  const std::size_t n = field.size();

  const Rhs k1 = rhs(field, c);
  HydroField mid = field;
  for (std::size_t i = 0; i < n; ++i) {
    mid.rho[i] = field.rho[i] + dt * k1.drho[i];
    mid.qbar[i] = UnitQuat(field.qbar[i].value() + k1.dqbar[i] * dt);
  }
  gauge_fix(mid);
  mid.time = field.time + dt;

  const Rhs k2 = rhs(mid, c);
  for (std::size_t i = 0; i < n; ++i) {
    field.rho[i] += 0.5 * dt * (k1.drho[i] + k2.drho[i]);
    field.qbar[i] =
        UnitQuat(field.qbar[i].value() + (k1.dqbar[i] + k2.dqbar[i]) * (0.5 * dt));
  }
  gauge_fix(field);
  field.time += dt;
}

double relative_form_check(const HydroField& field, const coeffs::HydroCoefficients& c) {
  const std::size_t n = field.size();
  const Rhs direct = rhs(field, c);
  const double inv2dx = 1.0 / (2.0 * field.dx);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = next(i, n), im = prev(i, n);
    const Quat qi = field.qbar[i].value();
    const Vec3 u3 = e1_of(field.qbar[i]);
    const Quat dqdx = (field.qbar[ip].value() - field.qbar[im].value()) * inv2dx;
    const Vec3 rel = mul(dqdx, conj(qi)).im();
    const Vec3 grad_rho{(field.rho[ip] - field.rho[im]) * inv2dx, 0.0, 0.0};

    // Right-relative form: all terms are vectors, the implied time derivative
    // is their negated sum multiplied back by qbar.
    Vec3 sum = rel * (c.c2 * u3.x);
    if (field.rho[i] > kRhoFloor) {
      sum += cross(u3, grad_rho) * (c.c3 / field.rho[i]);
    }
    sum += (Vec3{dot(rel, u3), 0.0, 0.0} + rel.x * u3) * c.c4;
    const Quat implied = mul(Quat::from_vec(-1.0 * sum), qi);

    const Quat diff = implied - direct.dqbar[i];
    worst = std::max(worst, std::max(std::max(std::abs(diff.w), std::abs(diff.x)),
                                     std::max(std::abs(diff.y), std::abs(diff.z))));
  }
  return worst;
}

std::array<Vec3, 5> term_table(const TermInputs& in) {
  const Quat qc = conj(in.qbar.value());
  const Vec3 u3 = e1_of(in.qbar);
  std::array<Vec3, 3> rel;
  for (int a = 0; a < 3; ++a) rel[a] = mul(in.dq_dx[a], qc).im();

  std::array<Vec3, 5> x;
  x[0] = mul(in.dq_dt, qc).im() * (2.0 * in.rho);
  x[1] = (rel[0] * u3.x + rel[1] * u3.y + rel[2] * u3.z) * (2.0 * in.rho);
  x[2] = cross(u3, in.grad_rho);
  x[3] = Vec3{dot(rel[0], u3), dot(rel[1], u3), dot(rel[2], u3)} * (2.0 * in.rho);
  x[4] = u3 * ((rel[0].x + rel[1].y + rel[2].z) * 2.0 * in.rho);
  return x;
}

HydroField make_uniform(std::size_t n_cells, double dx, double rho0, const UnitQuat& q0) {
  if (n_cells < 3) throw ConfigError("n_cells", "must be >= 3");
  if (!(dx > 0.0)) throw ConfigError("dx", "must be positive");
  if (!(rho0 >= 0.0)) throw ConfigError("initial.rho0", "must be nonnegative");
  HydroField f;
  f.dx = dx;
  f.rho.assign(n_cells, rho0);
  f.qbar.assign(n_cells, q0);
  return f;
}

HydroField make_bump(std::size_t n_cells, double dx, double rho0, double amplitude,
                     double width, const UnitQuat& q0) {
  HydroField f = make_uniform(n_cells, dx, rho0, q0);
  if (!(width > 0.0)) throw ConfigError("initial.width", "must be positive");
  const double length = n_cells * dx;
  const double center = 0.5 * length;
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double x = i * dx;
    const double t = (x - center) / width;
    f.rho[i] = rho0 * (1.0 + amplitude * std::exp(-t * t));
  }
  return f;
}

HydroField make_twist(std::size_t n_cells, double dx, double rho0, int winding,
                      const Vec3& axis, const UnitQuat& q0) {
  HydroField f = make_uniform(n_cells, dx, rho0, q0);
  if (winding % 2 != 0) {
    throw ConfigError("initial.winding", "must be even for a periodic quaternion field");
  }
  const double length = n_cells * dx;
  const Vec3 n_axis = normalized(axis);
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double angle = 2.0 * M_PI * winding * (i * dx) / length;
    const UnitQuat twist = exp_map(n_axis * (0.5 * angle));
    f.qbar[i] = UnitQuat(mul(twist.value(), q0.value()));
  }
  return f;
}

}  // namespace qflock::pde
