#pragma once

// Closed-form model dynamics: the transported abscissa x -> lambda x G(x)|log x|,
// the predicted modulus ratio, the radial flow-map bounds, the Yudovich
// Hölder sandwich and the propagation bound for |log rho|^{-gamma}.

#include <cmath>
#include <concepts>
#include <string>

#include "vortmod/errors.hpp"
#include "vortmod/logdomain.hpp"

namespace vortmod {

template <class M>
concept RadialModulus = requires(const M& m, double L) {
  { m.eval(L) } -> std::convertible_to<double>;
  { m.domain_start() } -> std::convertible_to<double>;
};

struct FlowParams {
  double c = 1.0;
  double tau = 1.0;
  double norm_bound = 1.0;

  void validate() const {
    if (!(c > 0.0) || !(tau > 0.0) || !(norm_bound > 0.0)) {
      throw DomainError("flow parameters c, tau, norm_bound must be positive");
    }
  }
};

// The pure lower envelope L^{-gamma} as a modulus in its own right.
class EnvelopeModulus {
 public:
  explicit EnvelopeModulus(double gamma, double L_min = 1.0) : gamma_(gamma), L_min_(L_min) {
    validate_gamma(gamma);
    if (!(L_min > 0.0)) throw DomainError("envelope modulus needs L_min > 0");
  }
  double eval(double L) const {
    if (L < L_min_ * (1.0 - kDomainSlack)) throw DomainError("L below envelope domain");
    return f_lower(L, gamma_);
  }
  double domain_start() const noexcept { return L_min_; }
  double gamma() const noexcept { return gamma_; }

 private:
  double gamma_;
  double L_min_;
};

// L' = L - ln lambda_eff - ln G(L) - ln L, i.e. -ln(lambda_eff x G(x) |log x|).
template <RadialModulus M>
double transported_abscissa(const M& m, double L, double lambda_eff) {
  if (!(lambda_eff > 0.0)) throw DomainError("lambda_eff must be positive");
  const double G = m.eval(L);
  const double L_out = L - std::log(lambda_eff) - std::log(G) - std::log(L);
  if (L_out < m.domain_start() * (1.0 - kDomainSlack)) {
    throw DomainError("transported scale exceeds x_0 (L' = " + std::to_string(L_out) + ")");
  }
  return L_out;
}

// G(c t x G(x)|log x|) / G(x) with lambda_eff = c t.
template <RadialModulus M>
double predicted_ratio(const M& m, double L, double t, double c) {
  if (!(t > 0.0)) throw DomainError("predicted_ratio needs t > 0");
  if (!(c > 0.0)) throw DomainError("predicted_ratio needs c > 0");
  return m.eval(transported_abscissa(m, L, c * t)) / m.eval(L);
}

struct RadialTrajectoryBounds {
  double phi_upper_L = 0.0;      // -ln of the upper bound on Phi_r(t)
  double phi_inv_lower_L = 0.0;  // -ln of the lower bound on Phi_r^{-1}(t)
  bool inverse_clamped = false;  // inverse bound left (0,1) and was clamped
};

// Phi_r(t) <= r0 e^{-c g(r0)|log r0| t} and Phi_r^{-1}(t) >= r0 e^{+c g(r0)|log r0| t}.
RadialTrajectoryBounds model_radial_trajectories(double r0_L, double g_r0, double c, double t);

struct YudovichEnvelope {
  double lower_L = 0.0;  // -ln(d0^{e^{kt}})
  double upper_L = 0.0;  // -ln(d0^{e^{-kt}})
};

YudovichEnvelope yudovich_envelopes(double d0, double t, double k);

// Omega(t, rho) <= Omega_0(rho) e^{gamma t}
double propagation_bound(double omega0_rho, double gamma, double t);

}  // namespace vortmod
