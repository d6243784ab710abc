#include "vortmod/flowmodel.hpp"

#include <limits>

namespace vortmod {

RadialTrajectoryBounds model_radial_trajectories(double r0_L, double g_r0, double c, double t) {
  if (!(t >= 0.0)) throw DomainError("model_radial_trajectories needs t >= 0");
  if (!(r0_L > 0.0)) throw DomainError("r0 must lie in (0,1)");
  const double shift = c * g_r0 * r0_L * t;
  RadialTrajectoryBounds b;
  b.phi_upper_L = r0_L + shift;
  b.phi_inv_lower_L = r0_L - shift;
  if (!(b.phi_inv_lower_L > 0.0)) {
    b.phi_inv_lower_L = std::numeric_limits<double>::min();
    b.inverse_clamped = true;
  }
  return b;
}

YudovichEnvelope yudovich_envelopes(double d0, double t, double k) {
  if (!(d0 > 0.0 && d0 < 0.5)) throw DomainError("separation must lie in (0, 1/2)");
  if (!(t >= 0.0)) throw DomainError("yudovich_envelopes needs t >= 0");
  if (!(k > 0.0)) throw DomainError("yudovich_envelopes needs k > 0");
  const double L = -std::log(d0);
  return {L * std::exp(k * t), L * std::exp(-k * t)};
}

double propagation_bound(double omega0_rho, double gamma, double t) {
  if (!(t >= 0.0)) throw DomainError("propagation_bound needs t >= 0");
  return omega0_rho * std::exp(gamma * t);
}

}  // namespace vortmod
