#pragma once

// Log-abscissa arithmetic. A scale x in (0,1) is carried as L = -ln x so
// that the super-exponentially small nodes of the modulus construction
// (x ~ e^{-30000} and below) stay representable.

#include <compare>
#include <functional>

namespace vortmod {

class LogAbscissa {
 public:
  LogAbscissa() = default;
  explicit LogAbscissa(double L);

  static LogAbscissa from_scale(double x);

  double value() const noexcept { return L_; }
  // ln L; the construction works with L >= e so this is >= 1 there.
  double log_value() const;

  // Ordering is by L, which reverses the ordering of the direct scale x.
  auto operator<=>(const LogAbscissa&) const = default;

 private:
  double L_ = 1.0;
};

struct DirectScale {
  double x = 0.0;
  bool underflowed = false;
};

// |log x|^{-gamma}
double f_lower(double L, double gamma);
// |log x|^{-gamma} log|log x|
double f_upper(double L, double gamma);

// Largest L for which f_upper is still increasing; f_upper decreases for L > e^{1/gamma}.
double f_upper_peak(double gamma);

inline constexpr double kDefaultRootTolerance = 1e-12;
// Relative slack allowed when a computed abscissa lands just below a domain start.
inline constexpr double kDomainSlack = 1e-12;
inline constexpr int kBisectionBudget = 80;

// Plain bisection on [lo, hi]. Requires h(lo) * h(hi) <= 0. Stops when the
// bracket width falls below rel_tol * |midpoint|; throws BracketError when the
// signs agree or the step budget is exhausted.
double find_root_bracketed(const std::function<double(double)>& h, double lo, double hi,
                           double rel_tol = kDefaultRootTolerance);

DirectScale to_direct(double L);
inline DirectScale to_direct(LogAbscissa L) { return to_direct(L.value()); }

void validate_gamma(double gamma);

}  // namespace vortmod
