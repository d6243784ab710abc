#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vortmod/errors.hpp"
#include "vortmod/eulersim.hpp"
#include "vortmod/fieldanalysis.hpp"
#include "vortmod/modulus.hpp"

using namespace vortmod;
using doctest::Approx;

namespace {

BatchField constant_field(double c) {
  return [c](std::span<const double>, std::span<const double>, std::span<double> out) {
    for (double& v : out) v = c;
  };
}

BatchField x1_field() {
  return [](std::span<const double> x, std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i];
  };
}

BatchField oracle_field(const VorticityOracle& w) {
  return [w](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const PolarPoint p = PolarPoint::from({x[i], y[i]});
      out[i] = w(p.r, p.theta);
    }
  };
}

RadialProfile demo_profile() { return RadialProfile::from_modulus(construct(0.5, 1.0, 100.0, 40)); }

}  // namespace

TEST_CASE("constant field") {
  PairSampler s;
  const auto est = empirical_modulus(constant_field(3.0), {0.01, 0.1, 0.5}, s);
  REQUIRE(est.size() == 3);
  for (const auto& e : est) CHECK(e.omega_hat == 0.0);
}

TEST_CASE("linear field on the unit square") {
  PairSampler s;
  s.mode = SamplerMode::RandomPairs;
  s.direction = PairDirection::AxisAligned;
  s.n_random = 100000;
  s.region = SampleRegion::box(0.0, 1.0, 0.0, 1.0);
  const auto est = empirical_modulus(x1_field(), {0.02, 0.1}, s);
  CHECK(est[1].omega_hat >= 0.095);
  CHECK(est[1].omega_hat <= 0.1 + 1e-15);
  CHECK(est[0].omega_hat <= 0.02 + 1e-15);
  CHECK(est[0].omega_hat <= est[1].omega_hat);
}

TEST_CASE("more pairs never lower the estimate") {
  PairSampler s;
  s.mode = SamplerMode::RandomPairs;
  s.region = SampleRegion::box(0.0, 1.0, 0.0, 1.0);
  auto field = [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sin(7.0 * x[i]) * std::cos(3.0 * y[i]);
  };
  double prev = 0.0;
  for (int n : {100, 200, 400, 800, 1600}) {
    s.n_random = n;
    const double v = empirical_modulus(field, {0.05}, s).front().omega_hat;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("running max in rho") {
  PairSampler s;
  s.mode = SamplerMode::RandomPairs;
  s.n_random = 500;
  s.region = SampleRegion::box(0.0, 1.0, 0.0, 1.0);
  const auto est = empirical_modulus(x1_field(), {0.5, 0.01, 0.2, 0.05}, s);
  for (std::size_t i = 1; i < est.size(); ++i) {
    CHECK(est[i].rho > est[i - 1].rho);
    CHECK(est[i].omega_hat >= est[i - 1].omega_hat);
  }
}

TEST_CASE("witness pair on the initial field") {
  const auto g = demo_profile();
  const BumpSpec h;
  const auto w = initial_vorticity(g, h, 2.0);
  PairSampler s;
  s.mode = SamplerMode::AxisWitness;
  const auto est = empirical_modulus(oracle_field(w), {0.1}, s).front();
  const double theta = std::sqrt(0.1);
  CHECK(h(theta) == 1.0);
  CHECK(est.omega_hat == Approx(g(0.1)).epsilon(1e-12));
  CHECK(est.pairs == 1);
  CHECK(est.witness_y.y == 0.0);
}

TEST_CASE("sampler validation") {
  PairSampler s;
  s.c_exponent = 1.0;
  CHECK_THROWS_AS(empirical_modulus(x1_field(), {0.1}, s), ConfigError);
  s = PairSampler{};
  s.region = SampleRegion::annulus(1.0, 0.5);
  CHECK_THROWS_AS(empirical_modulus(x1_field(), {0.1}, s), ConfigError);
  s = PairSampler{};
  s.mode = SamplerMode::RandomPairs;
  s.n_random = 0;
  CHECK_THROWS_AS(empirical_modulus(x1_field(), {0.1}, s), DomainError);
  CHECK_THROWS_AS(empirical_modulus(x1_field(), {-0.1}, PairSampler{}), DomainError);
}

TEST_CASE("ratio series and probe") {
  SimConfig cfg;
  cfg.n_radial_cells = 24;
  cfg.n_angular_cells = 16;
  const auto sys = initial_data(demo_profile(), BumpSpec{}, cfg);
  PairSampler s;
  s.n_random = 2000;
  const auto one = modulus_ratio_series({sys}, 0.05, s);
  REQUIRE(one.ratios.size() == 1);
  CHECK(one.ratios[0] == 1.0);

  // zero circulation: nothing moves, every snapshot is the same field
  BlobSystem still = sys;
  for (double& c : still.circulation) c *= 0.5;
  const auto frozen = modulus_ratio_series({still, step_rk4(still, 0.0), still}, 0.05, s);
  for (double r : frozen.ratios) CHECK(r == 1.0);

  BlobSystem none = sys;
  for (double& c : none.circulation) c = 0.0;
  CHECK_THROWS_AS(modulus_ratio_series({none}, 0.05, s), DomainError);

  CHECK_THROWS_AS(axis_pair_probe(sys, 5.0, 0.5), DomainError);
  CHECK_THROWS_AS(axis_pair_probe(sys, 1e-4, 0.5), DomainError);
  CHECK(std::abs(axis_pair_probe(sys, 0.5, 0.5)) > 0.0);
  // on the axis h = 0 and the image sum cancels exactly
  CHECK(reconstruct_vorticity(sys, {0.5, 0.0}) == 0.0);
}

TEST_CASE("probe at t = 0 tracks g") {
  const auto g = demo_profile();
  const auto sys = initial_data(g, BumpSpec{}, SimConfig{});
  for (double rho : {0.1, 0.2, 0.4}) {
    const double p = axis_pair_probe(sys, rho, 0.5);
    CHECK(std::abs(p - g(rho)) <= 0.1 * g(rho));
  }
}
