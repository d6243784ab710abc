#include "vortmod/biotsavart.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vortmod/errors.hpp"
#include "vortmod/parallel.hpp"

namespace vortmod {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double log_step(const QuadratureSpec& q, double r_max) {
  return std::log(r_max / q.r_min) / q.n_radial;
}

// Threshold for the singular-cell warning, relative to the local speed.
constexpr double kExcludedShare = 0.01;

}  // namespace

void QuadratureSpec::validate() const {
  if (n_radial < 8 || n_angular < 8) throw ConfigError("quadrature needs at least 8 nodes per direction");
  if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ConfigError("quadrature r_min must be positive");
  if (r_max > 0.0 && !(r_min < r_max)) throw ConfigError("quadrature needs r_min < r_max");
}

double QuadratureSpec::resolved_r_max(const VorticityOracle& w) const {
  const double r = r_max > 0.0 ? r_max : w.support_radius;
  if (!(r > r_min)) throw ConfigError("quadrature r_max must exceed r_min");
  return r;
}

RadialMoments::RadialMoments(VorticityOracle w, QuadratureSpec q) : w_(std::move(w)), q_(q) {
  q_.validate();
  const double r_max = q_.resolved_r_max(w_);
  log_r_max_ = std::log(r_max);
  du_ = log_step(q_, r_max);
  cumulative_.push_back({});
}

RadialMoments::Moments RadialMoments::angular_moments(double radius) const {
  const int n = q_.n_angular;
  const double dtheta = kTwoPi / n;
  Moments m;
  for (int j = 0; j < n; ++j) {
    const double theta = (j + 0.5) * dtheta;
    const double v = w_(radius, theta);
    if (v == 0.0) continue;
    m.s += std::sin(2.0 * theta) * v;
    m.c += std::cos(2.0 * theta) * v;
  }
  m.s *= dtheta;
  m.c *= dtheta;
  return m;
}

void RadialMoments::extend_to(std::size_t cells) {
  while (cumulative_.size() <= cells) {
    const std::size_t k = cumulative_.size() - 1;
    const double radius = std::exp(log_r_max_ - (static_cast<double>(k) + 0.5) * du_);
    const Moments m = angular_moments(radius);
    const Moments& prev = cumulative_.back();
    cumulative_.push_back({prev.s + du_ * m.s, prev.c + du_ * m.c});
  }
}

RadialMoments::Moments RadialMoments::integral(double r) {
  if (!(r > 0.0)) throw DomainError("I^s/I^c need r > 0");
  const double u = std::log(r);
  if (u >= log_r_max_) return {};
  const auto k = static_cast<std::size_t>(std::floor((log_r_max_ - u) / du_));
  extend_to(k);
  Moments total = cumulative_[k];
  const double width = log_r_max_ - static_cast<double>(k) * du_ - u;
  if (width > 0.0) {
    const Moments m = angular_moments(std::exp(u + 0.5 * width));
    total.s += width * m.s;
    total.c += width * m.c;
  }
  return total;
}

double RadialMoments::i_s(double r) { return integral(r).s; }
double RadialMoments::i_c(double r) { return integral(r).c; }

double i_s(const VorticityOracle& w, double r, const QuadratureSpec& q) {
  return RadialMoments(w, q).i_s(r);
}

double i_c(const VorticityOracle& w, double r, const QuadratureSpec& q) {
  return RadialMoments(w, q).i_c(r);
}

QuadratureGrid::QuadratureGrid(const VorticityOracle& w, const QuadratureSpec& q) : q_(q) {
  q_.validate();
  const double r_max = q_.resolved_r_max(w);
  log_r_max_ = std::log(r_max);
  du_ = log_step(q_, r_max);
  dtheta_ = kTwoPi / q_.n_angular;

  const std::size_t nr = static_cast<std::size_t>(q_.n_radial);
  const std::size_t na = static_cast<std::size_t>(q_.n_angular);
  const std::size_t total = nr * na;
  x_.resize(total);
  y_.resize(total);
  weight_.resize(total);
  value_.resize(total);
  area_.resize(total);

  const bool batch = static_cast<bool>(w.batch);
  parallel_for(nr, 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const double u_hi = log_r_max_ - static_cast<double>(k) * du_;
      const double s_hi = std::exp(u_hi);
      const double s_lo = std::exp(u_hi - du_);
      const double s = std::exp(u_hi - 0.5 * du_);
      const double area = 0.5 * (s_hi - s_lo) * (s_hi + s_lo) * dtheta_;
      for (std::size_t j = 0; j < na; ++j) {
        const double theta = (static_cast<double>(j) + 0.5) * dtheta_;
        const std::size_t i = k * na + j;
        x_[i] = s * std::cos(theta);
        y_[i] = s * std::sin(theta);
        value_[i] = batch ? 0.0 : w(s, theta);
        area_[i] = area;
      }
    }
  });
  if (batch) {
    w.batch(x_, y_, value_);
    for (std::size_t k = 0; k < nr; ++k) {
      const double s = std::exp(log_r_max_ - (static_cast<double>(k) + 0.5) * du_);
      if (s <= w.support_radius) continue;
      std::fill_n(value_.begin() + static_cast<std::ptrdiff_t>(k * na), na, 0.0);
    }
  }
  for (std::size_t i = 0; i < total; ++i) weight_[i] = value_[i] * area_[i];
}

std::ptrdiff_t QuadratureGrid::cell_index(PolarPoint p) const {
  if (!(p.r > 0.0)) return -1;
  const double k = std::floor((log_r_max_ - std::log(p.r)) / du_);
  if (k < 0.0 || k >= q_.n_radial) return -1;
  double theta = std::fmod(p.theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  const double a = theta / dtheta_;
  // On an angular edge (the axes, for instance) no node is closer than half a
  // cell, and dropping one side would break the mirror symmetry.
  const double edge = a - std::round(a);
  if (std::abs(edge) < 1e-9) return -1;
  auto j = static_cast<std::ptrdiff_t>(std::floor(a));
  j = std::clamp<std::ptrdiff_t>(j, 0, q_.n_angular - 1);
  return static_cast<std::ptrdiff_t>(k) * q_.n_angular + j;
}

DirectVelocity QuadratureGrid::velocity(PolarPoint p, simd::Isa isa) const {
  const Vec2 c = p.r == 0.0 ? Vec2{} : p.cartesian();
  const std::ptrdiff_t skip = cell_index(p);
  const simd::Velocity v =
      simd::quadrature_velocity({x_, y_, weight_}, c.x, c.y, skip, isa);
  DirectVelocity out;
  out.u = {v.x, v.y};
  if (skip >= 0) {
    const auto i = static_cast<std::size_t>(skip);
    // |int_cell K| <= sqrt(area/pi) for a unit density; the cell is omitted.
    out.excluded_bound = std::abs(value_[i]) * std::sqrt(area_[i] / std::numbers::pi);
    out.resolution_warning = out.excluded_bound > kExcludedShare * norm(out.u);
  }
  return out;
}

DirectVelocity velocity_direct(const VorticityOracle& w, PolarPoint p, const QuadratureSpec& q) {
  return QuadratureGrid(w, q).velocity(p);
}

namespace {

double remainder_from(Vec2 u, Vec2 u0, PolarPoint p, double is, double ic, double sup_norm) {
  const double a = p.r / kTwoPi;
  const double ct = std::cos(p.theta);
  const double st = std::sin(p.theta);
  const Vec2 lead{a * (-ct * is + st * ic), a * (st * is + ct * ic)};
  const Vec2 rest = (u - u0) - lead;
  if (sup_norm == 0.0) return 0.0;
  return norm(rest) / (p.r * sup_norm);
}

}  // namespace

double keylemma_remainder(const VorticityOracle& w, PolarPoint p, const QuadratureSpec& q) {
  if (!(p.r > 0.0)) throw DomainError("key-lemma remainder needs r > 0");
  const QuadratureGrid grid(w, q);
  RadialMoments moments(w, q);
  const Vec2 u = grid.velocity(p).u;
  const Vec2 u0 = grid.velocity({0.0, 0.0}).u;
  return remainder_from(u, u0, p, moments.i_s(p.r), moments.i_c(p.r), w.sup_norm);
}

RemainderScan remainder_scan(const VorticityOracle& w, const std::vector<double>& r_values,
                             const std::vector<double>& theta_values, const QuadratureSpec& q) {
  RemainderScan scan;
  for (double r : r_values) {
    if (!(r > 0.0)) throw DomainError("remainder scan radii must be positive");
  }
  const QuadratureGrid grid(w, q);
  RadialMoments moments(w, q);
  const Vec2 u0 = grid.velocity({0.0, 0.0}).u;

  for (double r : r_values) {
    const double is = moments.i_s(r);
    const double ic = moments.i_c(r);
    for (double t : theta_values) scan.rows.push_back({r, t, 0.0, is, ic});
  }
  parallel_for(scan.rows.size(), 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      RemainderRow& row = scan.rows[i];
      const PolarPoint p{row.r, row.theta};
      row.remainder = remainder_from(grid.velocity(p).u, u0, p, row.i_s, row.i_c, w.sup_norm);
    }
  });

  for (const auto& row : scan.rows) scan.max_remainder = std::max(scan.max_remainder, row.remainder);

  if (r_values.empty()) {
    scan.notice = "no radii; trend check skipped";
    return scan;
  }
  const auto [lo_it, hi_it] = std::minmax_element(r_values.begin(), r_values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi >= 100.0 * lo * (1.0 - 1e-12))) {
    scan.notice = "radii span less than two decades; trend check skipped";
    return scan;
  }
  for (const auto& row : scan.rows) {
    if (row.r <= 10.0 * lo) scan.max_smallest_decade = std::max(scan.max_smallest_decade, row.remainder);
    if (row.r >= hi / 10.0) scan.max_largest_decade = std::max(scan.max_largest_decade, row.remainder);
  }
  scan.trend_checked = true;
  scan.bounded = scan.max_smallest_decade <= 2.0 * scan.max_largest_decade;
  return scan;
}

VorticityOracle zero_vorticity() {
  return {[](double, double) { return 0.0; }, 1.0, 1.0, Symmetry::OddOdd, {}};
}

VorticityOracle annulus_mode(double a, double b, bool cosine) {
  if (!(a > 0.0) || !(b > a)) throw DomainError("annulus needs 0 < a < b");
  auto f = [a, b, cosine](double s, double theta) {
    if (s < a || s > b) return 0.0;
    return cosine ? std::cos(2.0 * theta) : std::sin(2.0 * theta);
  };
  return {f, 1.0, b, cosine ? Symmetry::None : Symmetry::OddOdd, {}};
}

VorticityOracle uniform_disk(double a) {
  if (!(a > 0.0)) throw DomainError("disk radius must be positive");
  return {[a](double s, double) { return s <= a ? 1.0 : 0.0; }, 1.0, a, Symmetry::None, {}};
}

}  // namespace vortmod
