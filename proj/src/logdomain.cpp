#include "vortmod/logdomain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vortmod/errors.hpp"

namespace vortmod {

LogAbscissa::LogAbscissa(double L) : L_(L) {
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw DomainError("log-abscissa must be positive and finite, got " + std::to_string(L));
  }
}

LogAbscissa LogAbscissa::from_scale(double x) {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("scale must lie in (0,1), got " + std::to_string(x));
  }
  return LogAbscissa(-std::log(x));
}

double LogAbscissa::log_value() const { return std::log(L_); }

void validate_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("gamma must lie strictly inside (0,1), got " + std::to_string(gamma));
  }
}

double f_lower(double L, double gamma) {
  if (!(L > 0.0)) throw DomainError("f_lower needs L > 0");
  return std::pow(L, -gamma);
}

double f_upper(double L, double gamma) {
  if (!(L > 1.0)) throw DomainError("f_upper needs L > 1");
  return std::pow(L, -gamma) * std::log(L);
}

double f_upper_peak(double gamma) { return std::exp(1.0 / gamma); }

double find_root_bracketed(const std::function<double(double)>& h, double lo, double hi,
                           double rel_tol) {
  if (!(lo < hi)) throw BracketError("bracket must satisfy lo < hi");
  double h_lo = h(lo);
  const double h_hi = h(hi);
  if (h_lo == 0.0) return lo;
  if (h_hi == 0.0) return hi;
  if (std::signbit(h_lo) == std::signbit(h_hi)) {
    throw BracketError("root not bracketed: h(lo) and h(hi) share a sign");
  }
  for (int step = 0; step < kBisectionBudget; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::abs(mid) || mid == lo || mid == hi) return mid;
    const double h_mid = h(mid);
    if (h_mid == 0.0) return mid;
    if (std::signbit(h_mid) == std::signbit(h_lo)) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
    }
  }
  throw BracketError("bisection did not converge within " + std::to_string(kBisectionBudget) +
                     " steps");
}

DirectScale to_direct(double L) {
  if (!(L > 0.0)) throw DomainError("to_direct needs L > 0");
  const double x = std::exp(-L);
  // exp(-L) goes subnormal below ~708 and reaches zero near 745; only an
  // exact zero counts as underflow.
  if (x == 0.0) return {0.0, true};
  return {x, false};
}

}  // namespace vortmod
