#include "vortmod/eulersim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "vortmod/errors.hpp"
#include "vortmod/flowmodel.hpp"
#include "vortmod/logdomain.hpp"

namespace vortmod {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

// C-infinity step from 0 at t <= 0 to 1 at t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace

void BumpSpec::validate() const {
  if (!(delta > 0.0) || !(delta < std::numbers::pi / 8.0)) {
    throw ConfigError("bump margin delta must lie in (0, pi/8)");
  }
}

double BumpSpec::operator()(double theta) const {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  double sign = 1.0;
  if (t > kHalfPi) {
    t = std::numbers::pi - t;
    sign = -1.0;
  }
  if (t < delta) return sign * smooth_step(t / delta);
  if (t > kHalfPi - delta) return sign * smooth_step((kHalfPi - t) / delta);
  return sign;
}

void RadialExtension::validate() const {
  if (!(g_one > 0.0) || !std::isfinite(g_one)) throw ConfigError("g_one must be positive");
  if (!(hold_until >= 1.0) || !(cutoff > hold_until)) {
    throw ConfigError("extension needs 1 <= hold_until < cutoff");
  }
}

RadialProfile RadialProfile::from_modulus(PiecewiseModulus m, RadialExtension ext) {
  ext.validate();
  RadialProfile p;
  p.gamma_ = m.gamma();
  p.L_core_ = m.domain_start();
  p.x_core_ = std::exp(-p.L_core_);
  p.g_core_ = m.node(0).G;
  p.modulus_ = std::move(m);
  p.ext_ = ext;
  return p;
}

RadialProfile RadialProfile::from_envelope(double gamma, double L_core, RadialExtension ext) {
  validate_gamma(gamma);
  ext.validate();
  if (!(L_core > 0.0)) throw DomainError("envelope profile needs L_core > 0");
  RadialProfile p;
  p.gamma_ = gamma;
  p.L_core_ = L_core;
  p.x_core_ = std::exp(-L_core);
  p.g_core_ = f_lower(L_core, gamma);
  p.ext_ = ext;
  return p;
}

double RadialProfile::core(double L) const {
  L = std::max(L, L_core_);
  return modulus_ ? modulus_->eval(L) : f_lower(L, gamma_);
}

double RadialProfile::operator()(double r) const {
  if (!(r > 0.0)) return 0.0;
  if (r <= x_core_) return core(-std::log(r));
  if (r <= 1.0) return g_core_ + (ext_.g_one - g_core_) * ((r - x_core_) / (1.0 - x_core_));
  if (r <= ext_.hold_until) return ext_.g_one;
  if (r >= ext_.cutoff) return 0.0;
  const double s = (r - ext_.hold_until) / (ext_.cutoff - ext_.hold_until);
  return ext_.g_one * (1.0 - s * s * (3.0 - 2.0 * s));
}

void SimConfig::validate() const {
  if (n_radial_cells < 1 || n_angular_cells < 1) throw ConfigError("cell counts must be positive");
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) throw ConfigError("need 0 < r_inner < r_outer");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be non-negative");
  if (!(core_delta_factor > 0.0)) throw ConfigError("core_delta_factor must be positive");
  cutoff.validate();
}

double BlobSystem::total_circulation() const {
  double s = 0.0;
  for (double g : circulation) s += g;
  return s;
}

VorticityOracle initial_vorticity(const RadialProfile& g, const BumpSpec& bump, double r_outer) {
  bump.validate();
  double sup = 0.0;
  // g is increasing up to the hold region, so sampling the plateau is enough.
  for (int i = 0; i <= 4096; ++i) sup = std::max(sup, g(r_outer * i / 4096.0));
  const double support = std::min(r_outer, g.extension().cutoff);
  return {[g, bump](double r, double theta) { return g(r) * bump(theta); }, sup, support,
          Symmetry::OddOdd, {}};
}

BlobSystem initial_data(const RadialProfile& g, const BumpSpec& bump, const SimConfig& cfg) {
  cfg.validate();
  bump.validate();
  BlobSystem sys;
  sys.config = cfg;
  const int nr = cfg.n_radial_cells;
  const int na = cfg.n_angular_cells;
  const double lo = std::log(cfg.r_inner);
  const double du = (std::log(cfg.r_outer) - lo) / nr;
  const double dtheta = kHalfPi / na;
  const std::size_t n = static_cast<std::size_t>(nr) * static_cast<std::size_t>(na);
  sys.x.reserve(n);
  sys.y.reserve(n);
  sys.circulation.reserve(n);
  sys.core.reserve(n);
  sys.cell_size.reserve(n);
  for (int i = 0; i < nr; ++i) {
    const double r_lo = std::exp(lo + i * du);
    const double r_hi = std::exp(lo + (i + 1) * du);
    const double r = std::exp(lo + (i + 0.5) * du);
    const double area = 0.5 * (r_hi - r_lo) * (r_hi + r_lo) * dtheta;
    const double cell = std::max(r_hi - r_lo, r * dtheta);
    const double gr = g(r);
    for (int j = 0; j < na; ++j) {
      const double theta = (j + 0.5) * dtheta;
      sys.x.push_back(r * std::cos(theta));
      sys.y.push_back(r * std::sin(theta));
      sys.circulation.push_back(gr * bump(theta) * area);
      sys.core.push_back(cfg.core_delta_factor * cell);
      sys.cell_size.push_back(cell);
    }
  }
  return sys;
}

void blob_velocity(const BlobSystem& sys, std::span<const double> px, std::span<const double> py,
                   std::span<double> ux, std::span<double> uy) {
  simd::induced_velocity(sys.sources(), {px, py}, ux, uy, simd::active_isa());
}

Vec2 blob_velocity(const BlobSystem& sys, Vec2 point) {
  double ux = 0.0, uy = 0.0;
  blob_velocity(sys, {&point.x, 1}, {&point.y, 1}, {&ux, 1}, {&uy, 1});
  return {ux, uy};
}

void reconstruct_vorticity(const BlobSystem& sys, std::span<const double> px,
                           std::span<const double> py, std::span<double> out) {
  simd::reconstructed_vorticity(sys.sources(), {px, py}, out, simd::active_isa());
}

double reconstruct_vorticity(const BlobSystem& sys, PolarPoint p) {
  const Vec2 c = p.cartesian();
  double w = 0.0;
  reconstruct_vorticity(sys, {&c.x, 1}, {&c.y, 1}, {&w, 1});
  return w;
}

VorticityOracle reconstructed_oracle(const BlobSystem& sys) {
  auto shared = std::make_shared<const BlobSystem>(sys);
  VorticityOracle w;
  w.eval = [shared](double r, double theta) { return reconstruct_vorticity(*shared, {r, theta}); };
  w.batch = [shared](std::span<const double> x, std::span<const double> y, std::span<double> out) {
    reconstruct_vorticity(*shared, x, y, out);
  };
  w.symmetry = Symmetry::OddOdd;
  double support = 0.0;
  for (std::size_t j = 0; j < sys.size(); ++j) {
    support = std::max(support, std::hypot(sys.x[j], sys.y[j]) + 8.0 * sys.core[j]);
  }
  w.support_radius = support > 0.0 ? support : 1.0;
  std::vector<double> at(sys.size());
  reconstruct_vorticity(sys, sys.x, sys.y, at);
  double sup = 0.0;
  for (double v : at) sup = std::max(sup, std::abs(v));
  w.sup_norm = sup > 0.0 ? sup : 1.0;
  return w;
}

void check_cfl(const BlobSystem& sys, std::span<const double> ux, std::span<const double> uy, double dt) {
  double worst = 0.0;
  double limit = INFINITY;
  for (std::size_t j = 0; j < sys.size(); ++j) {
    const double speed = std::hypot(ux[j], uy[j]);
    if (speed == 0.0) continue;
    const double allowed = sys.cell_size[j] / speed;
    limit = std::min(limit, allowed);
    worst = std::max(worst, dt / allowed);
  }
  if (worst >= 1.0) {
    throw CflViolation("dt * |u| exceeds the local cell size (ratio " + std::to_string(worst) + ")",
                       0.5 * limit);
  }
}

BlobSystem step_rk4(const BlobSystem& sys, double dt, std::vector<Tracer>* tracers) {
  BlobSystem out = sys;
  if (dt == 0.0) return out;
  if (!(dt > 0.0)) throw ConfigError("dt must be non-negative");

  const std::size_t nb = sys.size();
  const std::size_t nt = tracers ? tracers->size() : 0;
  const std::size_t n = nb + nt;

  std::vector<double> x0(n), y0(n);
  std::copy(sys.x.begin(), sys.x.end(), x0.begin());
  std::copy(sys.y.begin(), sys.y.end(), y0.begin());
  for (std::size_t i = 0; i < nt; ++i) {
    const Vec2 c = PolarPoint{(*tracers)[i].current().r, (*tracers)[i].current().theta}.cartesian();
    x0[nb + i] = c.x;
    y0[nb + i] = c.y;
  }

  std::vector<double> xs = x0, ys = y0, ux(n), uy(n), ax(n, 0.0), ay(n, 0.0);
  const double stage_dt[3] = {0.5 * dt, 0.5 * dt, dt};
  const double stage_w[4] = {1.0, 2.0, 2.0, 1.0};
  for (int s = 0; s < 4; ++s) {
    const simd::BlobSources src{std::span<const double>(xs).first(nb),
                                std::span<const double>(ys).first(nb), sys.circulation, sys.core};
    simd::induced_velocity(src, {xs, ys}, ux, uy, simd::active_isa());
    if (s == 0) check_cfl(sys, ux, uy, dt);
    for (std::size_t i = 0; i < n; ++i) {
      ax[i] += stage_w[s] * ux[i];
      ay[i] += stage_w[s] * uy[i];
    }
    if (s < 3) {
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x0[i] + stage_dt[s] * ux[i];
        ys[i] = y0[i] + stage_dt[s] * uy[i];
      }
    }
  }

  const double h = dt / 6.0;
  for (std::size_t i = 0; i < nb; ++i) {
    out.x[i] = x0[i] + h * ax[i];
    out.y[i] = y0[i] + h * ay[i];
  }
  out.time = sys.time + dt;
  for (std::size_t i = 0; i < nt; ++i) {
    const PolarPoint p = PolarPoint::from({x0[nb + i] + h * ax[nb + i], y0[nb + i] + h * ay[nb + i]});
    (*tracers)[i].trajectory.push_back({out.time, p.r, p.theta});
  }
  return out;
}

RunResult run(const BlobSystem& sys, std::vector<Tracer> tracers, std::vector<double> snapshot_times) {
  const SimConfig& cfg = sys.config;
  cfg.validate();
  const double t_end = cfg.t_end;
  const double eps = 1e-12 * std::max(1.0, t_end);
  for (double t : snapshot_times) {
    if (!(t >= sys.time - eps) || !(t <= t_end + eps)) {
      throw ConfigError("snapshot time " + std::to_string(t) + " outside [start, t_end]");
    }
  }
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()), snapshot_times.end());

  std::vector<double> stops = snapshot_times;
  if (stops.empty() || stops.back() < t_end - eps) stops.push_back(t_end);

  RunResult result;
  const double gamma0 = sys.total_circulation();
  BlobSystem cur = sys;
  std::size_t next_snapshot = 0;
  for (double stop : stops) {
    const double start = cur.time;
    const double span = stop - start;
    if (span > eps) {
      // Uniform sub-steps no longer than dt that land exactly on the stop.
      const auto k = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
      const double h = span / static_cast<double>(k);
      for (std::size_t i = 0; i < k; ++i) {
        cur = step_rk4(cur, h, &tracers);
        cur.time = i + 1 == k ? stop : start + static_cast<double>(i + 1) * h;
        for (auto& tr : tracers) tr.trajectory.back().t = cur.time;
        ++result.steps;
      }
    }
    if (next_snapshot < snapshot_times.size() && std::abs(snapshot_times[next_snapshot] - stop) <= eps) {
      result.snapshots.push_back(cur);
      const double drift = std::abs(cur.total_circulation() - gamma0);
      result.max_circulation_drift = std::max(result.max_circulation_drift, drift);
      ++next_snapshot;
    }
  }
  result.tracers = std::move(tracers);
  return result;
}

FlowFit fit_flow_exponent(const Tracer& tr, const RadialProfile& g) {
  const auto& s = tr.trajectory;
  if (s.size() < 10) throw DomainError("flow fit needs at least 10 trajectory samples");
  FlowFit fit;
  const double r0 = s.front().r;
  const double g0 = g(r0);
  const double L0 = -std::log(r0);
  double saa = 0.0, say = 0.0, syy = 0.0;
  double lowest = 0.0, rebound = 0.0;  // in ln r0 - ln r
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double a = g0 * L0 * (s[i].t - s.front().t);
    const double y = std::log(r0) - std::log(s[i].r);
    saa += a * a;
    say += a * y;
    syy += y * y;
    lowest = std::max(lowest, y);
    rebound = std::max(rebound, lowest - y);
  }
  if (saa == 0.0) throw DomainError("flow fit needs a non-zero time span and g(r0) > 0");
  fit.c_fit = say / saa;
  const double sres = std::max(0.0, syy - fit.c_fit * say);
  fit.residual = syy > 0.0 ? std::sqrt(sres / syy) : 0.0;
  if (syy == 0.0) {
    fit.degenerate = true;
    fit.note = "constant trajectory";
  } else if (rebound > kFitReboundTolerance * lowest) {
    fit.degenerate = true;
    fit.note = "radius not monotone";
  } else if (!(fit.c_fit > 0.0)) {
    fit.degenerate = true;
    fit.note = "non-positive exponent";
  }
  return fit;
}

YudovichFit fit_yudovich(const Tracer& a, const Tracer& b, double safety) {
  const auto& sa = a.trajectory;
  const auto& sb = b.trajectory;
  if (sa.size() != sb.size() || sa.size() < 3) throw DomainError("tracer pair needs matching samples");
  auto sep = [&](std::size_t i) {
    const Vec2 p = PolarPoint{sa[i].r, sa[i].theta}.cartesian();
    const Vec2 q = PolarPoint{sb[i].r, sb[i].theta}.cartesian();
    return norm(p - q);
  };
  const double d0 = sep(0);
  const double L0 = -std::log(d0);
  const double t0 = sa.front().t;
  const double half = t0 + 0.5 * (sa.back().t - t0);

  YudovichFit fit;
  for (std::size_t i = 1; i < sa.size() && sa[i].t <= half; ++i) {
    const double q = -std::log(sep(i)) / L0;
    fit.k = std::max(fit.k, std::abs(std::log(q)) / (sa[i].t - t0));
  }
  fit.k = fit.k > 0.0 ? safety * fit.k : 1e-12;

  fit.worst_margin = INFINITY;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const YudovichEnvelope env = yudovich_envelopes(d0, sa[i].t - t0, fit.k);
    const double L = -std::log(sep(i));
    const double margin = std::min(env.lower_L - L, L - env.upper_L) / L0;
    fit.worst_margin = std::min(fit.worst_margin, margin);
  }
  fit.contained = fit.worst_margin >= -1e-12;
  return fit;
}

}  // namespace vortmod
