#ifndef QFLOCK_PDE_HPP
#define QFLOCK_PDE_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qflock/coeffs.hpp"
#include "qflock/config_error.hpp"
#include "qflock/quat.hpp"

namespace qflock::pde {

/// Periodic 1D slab: fields vary along x_1 only, sampled at n points
/// x_i = i dx with period n dx.
struct HydroField {
  std::vector<double> rho;
  std::vector<UnitQuat> qbar;
  double dx = 0.0;
  double time = 0.0;

  std::size_t size() const { return rho.size(); }
};

class TopologicalDefectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SignDiscontinuityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CflError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nematic gauge lift: align neighbor signs left to right from cell 0.
/// An odd number of flips around the periodic loop cannot be lifted and
/// raises TopologicalDefectError.
void gauge_fix(HydroField& field);

/// Body-frame spatial derivative per cell: Im((d qbar / dx) qbar*), central
/// differences on the gauge-fixed field. In the slab reduction this is the
/// only nonzero column of the relative gradient; the relative divergence is
/// its first component.
std::vector<Vec3> rel_grad(const HydroField& field);

struct Rhs {
  std::vector<double> drho;
  std::vector<Quat> dqbar;          // tangent per cell
  std::uint64_t vacuum_skips = 0;   // cells where the pressure term was dropped
};

inline constexpr double kRhoFloor = 1e-10;

Rhs rhs(const HydroField& field, const coeffs::HydroCoefficients& c);

/// Two-stage explicit step (Heun) with renormalization and gauge fixing after
/// each stage. Enforces dt max(|c1|, |c2|) / dx <= 0.4 before stepping; the
/// mass flux is conservative so sum(rho) dx is preserved to roundoff.
void step(HydroField& field, const coeffs::HydroCoefficients& c, double dt);

/// Pointwise defect between the evolution equation and its right-relative
/// form (the equation right-multiplied by qbar*): algebraically zero, so the
/// return value is a roundoff measure.
double relative_form_check(const HydroField& field, const coeffs::HydroCoefficients& c);

/// Pointwise inputs for the term-table: the five tangent-vector terms of the
/// relative-form equation, usable with any consistent derivative data.
struct TermInputs {
  double rho = 1.0;
  Vec3 grad_rho;
  UnitQuat qbar;
  std::array<Quat, 3> dq_dx;  // spatial derivatives (tangent at qbar)
  Quat dq_dt;                 // time derivative (tangent at qbar)
};

/// X_{q,1..5} as vectors in R^3:
///   X1 = 2 rho rel(d_t qbar),      X2 = 2 rho (e1(qbar) . grad_rel) qbar,
///   X3 = e1(qbar) x grad rho,      X4 = 2 rho (grad_rel qbar) e1(qbar),
///   X5 = 2 rho (grad_rel . qbar) e1(qbar).
std::array<Vec3, 5> term_table(const TermInputs& in);

/// Initial conditions for the slab runs.
HydroField make_uniform(std::size_t n_cells, double dx, double rho0, const UnitQuat& q0);
/// rho0 (1 + amplitude exp(-((x-c)/width)^2)) with the bump centered in the box.
HydroField make_bump(std::size_t n_cells, double dx, double rho0, double amplitude,
                     double width, const UnitQuat& q0);
/// Constant-twist attitude field exp(2 pi winding x / L * axis/|axis| / ...):
/// the attitude rotates `winding` full turns across the box; winding must be
/// even for the quaternion field to be periodic.
HydroField make_twist(std::size_t n_cells, double dx, double rho0, int winding,
                      const Vec3& axis, const UnitQuat& q0);

}  // namespace qflock::pde

#endif  // QFLOCK_PDE_HPP
