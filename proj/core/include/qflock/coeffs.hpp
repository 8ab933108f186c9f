#ifndef QFLOCK_COEFFS_HPP
#define QFLOCK_COEFFS_HPP

#include <functional>
#include <stdexcept>

#include "qflock/gci.hpp"

namespace qflock::coeffs {

class DegenerateWeightError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// <g>_w = int_0^pi g w dtheta / int_0^pi w dtheta. The weight may be signed
/// (the c2/c4 weights carry the sign of h); only a vanishing integral of w is
/// rejected. Do not take absolute values of w: the ratio is what is defined.
double bracket(const std::function<double(double)>& g, const std::function<double(double)>& w);

/// Transport and relaxation constants of the macroscopic system at noise
/// ratio d, plus the rotation-matrix-model constants computed through the
/// independent sin^2(theta) m k weight.
struct HydroCoefficients {
  double d = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double ct2 = 0.0, ct3 = 0.0, ct4 = 0.0;
  double quadrature_error = 0.0;  // node-doubling defect over all constants
};

HydroCoefficients compute(double d, const gci::GciTable& table);

/// The intermediate integrals of the derivation, weighted by
/// H(r) = M(r) h(r) r. C4 = 2 C5 identically; c2 = (C3 + C4) / C2 and
/// c4 = C4 / C2 reproduce the packaged constants.
struct ProofConstants {
  double C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0;
};

ProofConstants proof_constants(double d, const gci::GciTable& table);

}  // namespace qflock::coeffs

#endif  // QFLOCK_COEFFS_HPP
