#include "vortmod/fieldanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "vortmod/errors.hpp"

namespace vortmod {

namespace {

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

struct UnitPair {
  Vec2 x;
  Vec2 e;    // unit direction
  double u;  // fraction of rho
};

std::vector<UnitPair> draw_pairs(const PairSampler& s) {
  std::mt19937_64 gen(s.seed);
  std::vector<UnitPair> out(static_cast<std::size_t>(s.n_random));
  const auto& g = s.region;
  for (auto& p : out) {
    const double a = unit_uniform(gen);
    const double b = unit_uniform(gen);
    if (g.kind == SampleRegion::Kind::QuadrantAnnulus) {
      const double r = g.a0 * std::exp(a * std::log(g.a1 / g.a0));
      p.x = PolarPoint{r, b * 0.5 * std::numbers::pi}.cartesian();
    } else {
      p.x = {g.a0 + a * (g.a1 - g.a0), g.b0 + b * (g.b1 - g.b0)};
    }
    const double c = unit_uniform(gen);
    if (s.direction == PairDirection::AxisAligned) {
      const int k = std::min(3, static_cast<int>(c * 4.0));
      constexpr Vec2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      p.e = dirs[k];
    } else {
      p.e = PolarPoint{1.0, c * 2.0 * std::numbers::pi}.cartesian();
    }
    p.u = unit_uniform(gen);
  }
  return out;
}

}  // namespace

bool SampleRegion::contains(Vec2 p) const {
  if (kind == Kind::Box) return p.x >= a0 && p.x <= a1 && p.y >= b0 && p.y <= b1;
  const double r = std::hypot(p.x, p.y);
  return p.x >= 0.0 && p.y >= 0.0 && r >= a0 && r <= a1;
}

void PairSampler::validate() const {
  if (!(c_exponent > 0.0 && c_exponent < 1.0)) throw ConfigError("sampler c_exponent must lie in (0,1)");
  if (n_random < 0) throw ConfigError("sampler n_random must be non-negative");
  if (region.kind == SampleRegion::Kind::QuadrantAnnulus) {
    if (!(region.a0 > 0.0 && region.a1 > region.a0)) throw ConfigError("sampler annulus needs 0 < r_min < r_max");
  } else if (!(region.a1 > region.a0 && region.b1 > region.b0)) {
    throw ConfigError("sampler box is empty");
  }
}

std::vector<ModulusEstimate> empirical_modulus(const BatchField& field, std::vector<double> rho_list,
                                               const PairSampler& sampler) {
  sampler.validate();
  std::sort(rho_list.begin(), rho_list.end());
  for (double rho : rho_list) {
    if (!(rho > 0.0)) throw DomainError("rho must be positive");
  }
  const bool witness = sampler.mode != SamplerMode::RandomPairs;
  const std::vector<UnitPair> base =
      sampler.mode == SamplerMode::AxisWitness ? std::vector<UnitPair>{} : draw_pairs(sampler);

  // Pairs in evaluation order: per rho, the witness first, then random pairs by index.
  std::vector<double> px, py;
  std::vector<std::size_t> first(rho_list.size() + 1, 0);
  for (std::size_t k = 0; k < rho_list.size(); ++k) {
    const double rho = rho_list[k];
    first[k] = px.size() / 2;
    auto push = [&](Vec2 a, Vec2 b) {
      px.push_back(a.x);
      py.push_back(a.y);
      px.push_back(b.x);
      py.push_back(b.y);
    };
    if (witness) push(PolarPoint{rho, std::pow(rho, sampler.c_exponent)}.cartesian(), {rho, 0.0});
    for (const auto& p : base) {
      const Vec2 y = p.x + (rho * p.u) * p.e;
      if (sampler.region.contains(y)) push(p.x, y);
    }
  }
  first[rho_list.size()] = px.size() / 2;
  if (px.empty()) throw DomainError("empirical modulus: empty sample");

  std::vector<double> values(px.size());
  field(px, py, values);

  std::vector<ModulusEstimate> out;
  ModulusEstimate running;
  bool have = false;
  for (std::size_t k = 0; k < rho_list.size(); ++k) {
    ModulusEstimate e = have ? running : ModulusEstimate{};
    e.rho = rho_list[k];
    e.pairs = first[k + 1] - first[k];
    for (std::size_t i = first[k]; i < first[k + 1]; ++i) {
      const double d = std::abs(values[2 * i] - values[2 * i + 1]);
      if (!have || d > e.omega_hat) {
        e.omega_hat = d;
        e.witness_x = {px[2 * i], py[2 * i]};
        e.witness_y = {px[2 * i + 1], py[2 * i + 1]};
        have = true;
      }
    }
    running = e;
    out.push_back(e);
  }
  if (!have) throw DomainError("empirical modulus: empty sample");
  return out;
}

RatioSeries modulus_ratio_series(const std::vector<BlobSystem>& snapshots, double rho,
                                 const PairSampler& sampler) {
  if (snapshots.empty()) throw DomainError("ratio series needs at least one snapshot");
  RatioSeries s;
  s.rho = rho;
  for (const auto& snap : snapshots) {
    const BatchField f = [&snap](std::span<const double> x, std::span<const double> y, std::span<double> o) {
      reconstruct_vorticity(snap, x, y, o);
    };
    const auto est = empirical_modulus(f, {rho}, sampler).front();
    s.times.push_back(snap.time);
    s.omega_hat.push_back(est.omega_hat);
    s.witness_x.push_back(est.witness_x);
    s.witness_y.push_back(est.witness_y);
  }
  const double base = s.omega_hat.front();
  if (!(base > 0.0)) throw DomainError("ratio series: zero baseline modulus");
  for (double w : s.omega_hat) s.ratios.push_back(w / base);
  return s;
}

double axis_pair_probe(const BlobSystem& sys, double rho, double c_exponent) {
  if (!(rho >= sys.config.r_inner && rho <= sys.config.r_outer)) {
    throw DomainError("probe scale outside the simulated annulus");
  }
  return reconstruct_vorticity(sys, {rho, std::pow(rho, c_exponent)});
}

}  // namespace vortmod
