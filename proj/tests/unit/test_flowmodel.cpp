#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "vortmod/errors.hpp"
#include "vortmod/flowmodel.hpp"
#include "vortmod/modulus.hpp"

using namespace vortmod;
using doctest::Approx;

namespace {

struct ConstantOne {
  double eval(double) const { return 1.0; }
  double domain_start() const { return 1.0; }
};

}  // namespace

TEST_CASE("transported abscissa") {
  const auto m = construct(0.5, 1.0, 100.0, 6);
  const double L1 = m.node(1).L;
  CHECK(transported_abscissa(m, L1, 1.0) == Approx(100.0).epsilon(1e-10));

  const double e = std::exp(1.0);
  CHECK(transported_abscissa(ConstantOne{}, e, 1.0) == Approx(e - 1.0).epsilon(1e-15));

  CHECK_THROWS_AS(transported_abscissa(m, L1, 0.0), DomainError);
  // A large lambda_eff carries the scale above x_0.
  CHECK_THROWS_AS(transported_abscissa(m, L1, 1e3), DomainError);
}

TEST_CASE("predicted ratio") {
  const auto m = construct(0.5, 1.0, 100.0, 6);
  CHECK(predicted_ratio(m, m.node(1).L, 1.0, 1.0) == Approx(4.6581478172877962276).epsilon(1e-9));
  CHECK(predicted_ratio_at_node(m, 1, 1.0, 1.0) == Approx(4.6581478172877962276).epsilon(1e-11));
  // Small c t sends the scale further toward 0; it is large c t that leaves the domain.
  const double tiny = predicted_ratio(m, m.node(1).L, 1e-300, 1.0);
  CHECK(tiny > 0.0);
  CHECK(tiny < 1.0);
  CHECK_THROWS_AS(predicted_ratio(m, m.node(1).L, 10.0, 1.0), DomainError);
  CHECK_THROWS_AS(predicted_ratio(m, m.node(1).L, 0.0, 1.0), DomainError);

  const EnvelopeModulus env(0.5);
  const double Lp = 100.0 - 0.5 * std::log(100.0);
  CHECK(transported_abscissa(env, 100.0, 1.0) == Approx(Lp).epsilon(1e-14));
  CHECK(predicted_ratio(env, 100.0, 1.0, 1.0) == Approx(std::sqrt(100.0 / Lp)).epsilon(1e-14));
  CHECK(predicted_ratio(env, 100.0, 1.0, 1.0) == Approx(1.0117).epsilon(1e-4));
}

TEST_CASE("envelope modulus stays O(1)") {
  const EnvelopeModulus env(0.5);
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double L = std::exp(2.0 + i * (std::log(1e12) - 2.0) / 2000.0);
    worst = std::max(worst, predicted_ratio(env, L, 1.0, 1.0));
  }
  CHECK(worst < 2.0);
  CHECK(worst > 1.0);
}

TEST_CASE("radial trajectories") {
  auto b0 = model_radial_trajectories(100.0, 0.1, 1.0, 0.0);
  CHECK(b0.phi_upper_L == 100.0);
  CHECK(b0.phi_inv_lower_L == 100.0);
  auto b = model_radial_trajectories(100.0, 0.1, 1.0, 0.1);
  CHECK(b.phi_upper_L == Approx(101.0).epsilon(1e-15));
  CHECK(b.phi_inv_lower_L == Approx(99.0).epsilon(1e-15));
  for (double t : {0.0, 0.3, 1.7}) {
    auto q = model_radial_trajectories(42.0, 0.37, 0.8, t);
    CHECK(q.phi_upper_L + q.phi_inv_lower_L == Approx(84.0).epsilon(1e-15));
  }
  auto clamped = model_radial_trajectories(2.0, 1.0, 1.0, 5.0);
  CHECK(clamped.inverse_clamped);
  CHECK(clamped.phi_inv_lower_L > 0.0);
  CHECK_THROWS_AS(model_radial_trajectories(2.0, 1.0, 1.0, -1.0), DomainError);
}

TEST_CASE("yudovich envelopes") {
  auto z = yudovich_envelopes(1e-4, 0.0, 3.0);
  CHECK(z.lower_L == Approx(-std::log(1e-4)));
  CHECK(z.upper_L == Approx(-std::log(1e-4)));
  auto y = yudovich_envelopes(1e-4, std::log(2.0), 1.0);
  CHECK(std::exp(-y.lower_L) == Approx(1e-8).epsilon(1e-12));
  CHECK(std::exp(-y.upper_L) == Approx(1e-2).epsilon(1e-12));
  double prev_lo = INFINITY, prev_up = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.02 * i;
    const auto env = yudovich_envelopes(0.01, t, 0.7);
    const double lo = std::exp(-env.lower_L), up = std::exp(-env.upper_L);
    CHECK(lo <= 0.01 * (1 + 1e-15));
    CHECK(up >= 0.01 * (1 - 1e-15));
    CHECK(lo <= prev_lo);
    CHECK(up >= prev_up);
    prev_lo = lo;
    prev_up = up;
  }
  CHECK_THROWS_AS(yudovich_envelopes(0.5, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(yudovich_envelopes(0.7, 1.0, 1.0), DomainError);
}

TEST_CASE("propagation bound") {
  CHECK(propagation_bound(0.3, 0.5, 0.0) == 0.3);
  CHECK(propagation_bound(0.3, 0.5, 2.0) == Approx(0.3 * std::exp(1.0)).epsilon(1e-15));
  CHECK(propagation_bound(0.3, 0.2, 1.0) < propagation_bound(0.3, 0.6, 1.0));
  CHECK_THROWS_AS(propagation_bound(0.3, 0.5, -1.0), DomainError);
}

TEST_CASE("flow parameters") {
  CHECK_NOTHROW(FlowParams{}.validate());
  CHECK_THROWS_AS((FlowParams{0.0, 1.0, 1.0}.validate()), DomainError);
}
