#include "vortmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vortmod/errors.hpp"
#include "vortmod/flowmodel.hpp"

namespace vortmod {

namespace {
// Node positions feed the chord intercept, which amplifies their error; solve
// them to a few ulp rather than the generic tolerance.
constexpr double kNodeTolerance = 4 * std::numeric_limits<double>::epsilon();
}  // namespace

const char* to_string(Touch t) {
  return t == Touch::UpperEnvelope ? "upper" : "lower";
}

PiecewiseModulus::PiecewiseModulus(double gamma, double lambda, std::vector<ModulusNode> nodes,
                                   TailPolicy tail)
    : gamma_(gamma), lambda_(lambda), nodes_(std::move(nodes)), tail_(tail) {
  if (nodes_.empty()) throw DomainError("a modulus needs at least one node");
  if (!(lambda_ > 0.0)) throw DomainError("lambda must be positive");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (!(n.L > 0.0) || !std::isfinite(n.L) || !(n.G > 0.0) || !std::isfinite(n.G)) {
      throw DomainError("node " + std::to_string(n.index) + " has non-positive L or G");
    }
    if (i == 0) {
      n.gap = 0.0;
      n.drop = 0.0;
      continue;
    }
    // Hand-built node sets leave the differences to be filled in.
    if (n.gap == 0.0) n.gap = n.L - nodes_[i - 1].L;
    if (n.drop == 0.0) n.drop = nodes_[i - 1].G - n.G;
  }
}

double PiecewiseModulus::eval(double L) const {
  const double L0 = nodes_.front().L;
  if (L < L0) {
    if (L < L0 - kDomainSlack * L0) {
      throw DomainError("L = " + std::to_string(L) + " lies above x_0 (L_0 = " +
                        std::to_string(L0) + ")");
    }
    L = L0;
  }
  // Last node with node.L <= L.
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), L,
                             [](double v, const ModulusNode& n) { return v < n.L; });
  const auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return eval_from(k, L - nodes_[k].L);
}

double PiecewiseModulus::eval_from(std::size_t k, double dL) const {
  if (k >= nodes_.size()) throw std::out_of_range("eval_from: node index out of range");
  while (dL < 0.0) {
    if (k == 0) {
      if (dL < -kDomainSlack * nodes_.front().L) {
        throw DomainError("position lies above x_0 (" + std::to_string(-dL) + " before L_0)");
      }
      dL = 0.0;
      break;
    }
    dL += nodes_[k].gap;
    --k;
  }
  while (k + 1 < nodes_.size() && dL >= nodes_[k + 1].gap) {
    dL -= nodes_[k + 1].gap;
    ++k;
  }
  const auto& left = nodes_[k];
  if (dL == 0.0) return left.G;
  if (k + 1 == nodes_.size()) {
    // LineToOrigin: G = G_last * x / x_last.
    return left.G * std::exp(-dL);
  }
  const auto& right = nodes_[k + 1];
  // t = (x - x_{k+1}) / (x_k - x_{k+1}) scaled by x_k; every exponent is <= 0.
  const double t = (std::exp(-dL) - std::exp(-right.gap)) / (-std::expm1(-right.gap));
  return right.G + right.drop * t;
}

double recurrence_residual(double L, double L_n, double gamma, double lambda) {
  return L - (1.0 - gamma) * std::log(L) - (L_n + std::log(lambda));
}

double solve_recurrence_gap(double L_n, double gamma, double lambda) {
  validate_gamma(gamma);
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(L_n >= std::exp(1.0))) throw DomainError("solve_recurrence needs L_n >= e");
  // In the gap d = L_{n+1} - L_n the residual is d - ln lambda - (1-g) ln(L_n + d),
  // increasing wherever L_n + d > 1 - g, and non-positive at d = ln lambda.
  const double log_lambda = std::log(lambda);
  const double log_Ln = std::log(L_n);
  auto h = [&](double d) { return d - log_lambda - (1.0 - gamma) * (log_Ln + std::log1p(d / L_n)); };
  const double lo = std::max(log_lambda, 1.0 - L_n);
  double width = (1.0 - gamma) * std::log(10.0 * (L_n + std::max(log_lambda, 0.0) + 10.0));
  double hi = lo + width;
  int doublings = 0;
  while (h(hi) < 0.0) {
    if (++doublings > 60) throw BracketError("recurrence bracket could not be widened");
    width *= 2.0;
    hi = lo + width;
  }
  return find_root_bracketed(h, lo, hi, kNodeTolerance);
}

double solve_recurrence(double L_n, double gamma, double lambda) {
  return L_n + solve_recurrence_gap(L_n, gamma, lambda);
}

double node_gap(const ModulusNode& a, const ModulusNode& b) {
  if (b.index == a.index + 1 && b.gap != 0.0) return b.gap;
  return b.L - a.L;
}

double node_drop(const ModulusNode& a, const ModulusNode& b) {
  if (b.index == a.index + 1 && b.drop != 0.0) return b.drop;
  return a.G - b.G;
}

double chord_value_offset(const ModulusNode& a, const ModulusNode& b, double dL) {
  // chord(x) = G_b + (G_a - G_b) (x/x_b - 1) / (x_a/x_b - 1)
  return b.G + node_drop(a, b) * std::expm1(-dL) / std::expm1(node_gap(a, b));
}

double chord_value(const ModulusNode& a, const ModulusNode& b, double L) {
  return chord_value_offset(a, b, L - b.L);
}

namespace {

// Property 1 for the pair (a, b): the line from (x_a, G_a) to the origin passes
// below G_b at x_b. In x_b units: G_a e^{L_a - L_b} < G_b.
CheckEntry property1_entry(const ModulusNode& a, const ModulusNode& b, int step) {
  CheckEntry e;
  e.step = step;
  e.lhs = a.G * std::exp(-node_gap(a, b));
  e.rhs = b.G;
  e.margin = e.rhs - e.lhs;
  e.pass = e.lhs < e.rhs;
  return e;
}

// Property 2: chord slope below the slope of the line from (x_b, G_b) to the
// origin. In x_b units: (G_a - G_b) / (e^{L_b - L_a} - 1) < G_b.
CheckEntry property2_entry(const ModulusNode& a, const ModulusNode& b, int step) {
  CheckEntry e;
  e.step = step;
  e.rhs = b.G;
  const double denom = std::expm1(node_gap(a, b));
  if (!(denom > 0.0)) {
    e.pass = false;
    e.lhs = std::numeric_limits<double>::quiet_NaN();
    e.margin = std::numeric_limits<double>::quiet_NaN();
    e.note = "degenerate pair: L_b <= L_a";
    return e;
  }
  e.lhs = node_drop(a, b) / denom;
  e.margin = e.rhs - e.lhs;
  e.pass = e.lhs < e.rhs;
  return e;
}

}  // namespace

double solve_chord_intersection(const ModulusNode& node_a, const ModulusNode& node_b,
                                double gamma) {
  validate_gamma(gamma);
  if (!(node_gap(node_a, node_b) > 0.0)) {
    throw PropertyViolation(node_b.index, "chord endpoints coincide or are out of order");
  }
  if (!property1_entry(node_a, node_b, node_b.index).pass) {
    throw PropertyViolation(node_b.index, "property 1 fails; chord need not meet f_upper again");
  }
  // Property 2 is equivalent to a positive chord intercept at x = 0, which an
  // intersection with f_upper (-> 0 as x -> 0) requires.
  if (!property2_entry(node_a, node_b, node_b.index).pass) {
    throw PropertyViolation(node_b.index, "property 2 fails; chord intercept is not positive");
  }

  auto h = [&](double L) { return f_upper(L, gamma) - chord_value(node_a, node_b, L); };
  const double lo = std::max(node_b.L, f_upper_peak(gamma));
  const double h_lo = h(lo);
  if (h_lo <= 0.0) {
    // Chord already at or above f_upper where the decreasing branch starts:
    // only a touching configuration is acceptable.
    if (std::abs(h_lo) <= kDefaultRootTolerance * f_upper(lo, gamma)) return lo;
    throw BracketError("chord lies above f_upper at the start of its decreasing branch");
  }
  double hi = 2.0 * lo;
  while (h(hi) > 0.0) {
    hi *= 2.0;
    if (!(hi < kMaxLogAbscissa)) throw BracketError("chord intersection beyond representable L");
  }
  return find_root_bracketed(h, std::max(lo, 0.5 * hi), hi, kNodeTolerance);
}

PiecewiseModulus construct(double gamma, double lambda, double L0, int n_max) {
  validate_gamma(gamma);
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (n_max < 0 || n_max > kMaxNodes) {
    throw DomainError("n_max must lie in [0, " + std::to_string(kMaxNodes) + "]");
  }
  const double L_min = std::exp(1.0) + std::max(0.0, std::log(1.0 / lambda));
  if (!(L0 >= L_min)) {
    throw PropertyViolation(0, "x_0 not small enough: need L_0 >= " + std::to_string(L_min));
  }
  const double G0 = f_upper(L0, gamma);
  if (!(G0 < 1.0)) throw PropertyViolation(0, "x_0 not small enough: f_upper(L_0) >= 1");

  std::vector<ModulusNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n_max) + 1);
  nodes.push_back({0, L0, G0, Touch::UpperEnvelope});

  for (int n = 1; n <= n_max; ++n) {
    const auto& prev = nodes.back();
    ModulusNode next;
    next.index = n;
    if (n % 2 == 1) {
      next.gap = solve_recurrence_gap(prev.L, gamma, lambda);
      next.L = prev.L + next.gap;
      next.touch = Touch::LowerEnvelope;
      next.G = f_lower(next.L, gamma);
      next.drop = prev.G - next.G;
    } else {
      next.L = solve_chord_intersection(nodes[n - 2], prev, gamma);
      next.gap = next.L - prev.L;
      next.touch = Touch::UpperEnvelope;
      next.G = f_upper(next.L, gamma);
      // Along the chord: G_{n-1} - G_n = (G_{n-2} - G_{n-1}) (1 - x_n/x_{n-1}) / (x_{n-2}/x_{n-1} - 1).
      next.drop = -node_drop(nodes[n - 2], prev) * std::expm1(-next.gap) / std::expm1(prev.gap);
    }
    if (!(next.gap > 0.0)) {
      throw PropertyViolation(n, "node abscissae stopped increasing (x_n did not decrease)");
    }
    if (!(next.L < kMaxLogAbscissa)) throw PropertyViolation(n, "L_n overflowed the cap");
    if (!(next.drop > 0.0)) throw PropertyViolation(n, "G stopped decreasing");
    if (n % 2 == 1) {
      if (!property1_entry(prev, next, n).pass) throw PropertyViolation(n, "property 1 fails");
      if (!property2_entry(prev, next, n).pass) throw PropertyViolation(n, "property 2 fails");
    }
    nodes.push_back(next);
  }
  return PiecewiseModulus(gamma, lambda, std::move(nodes));
}

bool CheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.pass; });
}

const CheckEntry* CheckReport::first_failure() const {
  for (const auto& e : entries)
    if (!e.pass) return &e;
  return nullptr;
}

CheckReport check_property1(const PiecewiseModulus& m) {
  CheckReport r{"property1", {}, {}};
  const auto nodes = m.nodes();
  if (nodes.size() < 2) r.notice = "fewer than two nodes; vacuous";
  for (std::size_t n = 1; n < nodes.size(); n += 2) {
    r.entries.push_back(property1_entry(nodes[n - 1], nodes[n], static_cast<int>(n)));
  }
  return r;
}

CheckReport check_property2(const PiecewiseModulus& m) {
  CheckReport r{"property2", {}, {}};
  const auto nodes = m.nodes();
  if (nodes.size() < 2) r.notice = "fewer than two nodes; vacuous";
  for (std::size_t n = 1; n < nodes.size(); n += 2) {
    r.entries.push_back(property2_entry(nodes[n - 1], nodes[n], static_cast<int>(n)));
  }
  return r;
}

CheckReport check_concavity(const PiecewiseModulus& m) {
  CheckReport r{"concavity", {}, {}};
  const auto nodes = m.nodes();
  if (nodes.size() < 3) {
    r.notice = "fewer than three nodes; skipped";
    return r;
  }
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    const auto& a = nodes[k - 1];
    const auto& b = nodes[k];
    CheckEntry e;
    e.step = static_cast<int>(k);
    e.lhs = b.G;
    e.rhs = a.G;
    e.margin = node_drop(a, b);
    e.pass = node_gap(a, b) > 0.0 && e.margin > 0.0;
    e.note = "monotone";
    r.entries.push_back(e);
  }
  // Segment slopes, both measured in units of x_{k+1}, must not decrease
  // toward x = 0. The last comparison is against the tail line to the origin.
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const auto& a = nodes[k];
    const auto& b = nodes[k + 1];
    const double left = node_drop(a, b) / std::expm1(node_gap(a, b));
    double right;
    if (k + 2 < nodes.size()) {
      const auto& c = nodes[k + 2];
      right = node_drop(b, c) / (-std::expm1(-node_gap(b, c)));
    } else {
      right = b.G;
    }
    CheckEntry e;
    e.step = static_cast<int>(k + 1);
    e.lhs = left;
    e.rhs = right;
    const double scale = std::max(std::abs(left), std::abs(right));
    e.margin = scale > 0.0 ? (right - left) / scale : 0.0;
    e.pass = e.margin >= -1e-9;
    e.note = k + 2 < nodes.size() ? "slope gap" : "tail slope gap";
    r.entries.push_back(e);
  }
  return r;
}

CheckReport check_alternation(const PiecewiseModulus& m, double rel_tol) {
  CheckReport r{"alternation", {}, {}};
  for (const auto& n : m.nodes()) {
    CheckEntry e;
    e.step = n.index;
    const bool even = n.index % 2 == 0;
    const Touch expected = even ? Touch::UpperEnvelope : Touch::LowerEnvelope;
    e.lhs = n.G;
    e.rhs = even ? f_upper(n.L, m.gamma()) : f_lower(n.L, m.gamma());
    e.margin = std::abs(e.lhs - e.rhs) / e.rhs;
    e.pass = n.touch == expected && e.margin <= rel_tol;
    if (n.touch != expected) e.note = "touch flag out of sequence";
    r.entries.push_back(e);
  }
  return r;
}

CheckReport check_collinearity(const PiecewiseModulus& m, double rel_tol) {
  CheckReport r{"collinearity", {}, {}};
  const auto nodes = m.nodes();
  if (nodes.size() < 3) r.notice = "fewer than three nodes; vacuous";
  for (std::size_t n = 2; n < nodes.size(); n += 2) {
    CheckEntry e;
    e.step = static_cast<int>(n);
    e.lhs = chord_value_offset(nodes[n - 2], nodes[n - 1], node_gap(nodes[n - 1], nodes[n]));
    e.rhs = nodes[n].G;
    e.margin = std::abs(e.lhs - e.rhs) / e.rhs;
    e.pass = e.margin <= rel_tol;
    r.entries.push_back(e);
  }
  return r;
}

double transported_offset(const PiecewiseModulus& m, std::size_t n, double lambda_eff) {
  if (!(lambda_eff > 0.0)) throw DomainError("lambda_eff must be positive");
  const auto& node = m.node(n);
  return -std::log(lambda_eff) - std::log(node.G) - std::log(node.L);
}

NodeRatio ratio_at_node(const PiecewiseModulus& m, int n) {
  if (n < 1 || n % 2 == 0 || static_cast<std::size_t>(n) >= m.size()) {
    throw std::out_of_range("ratio_at_node needs an odd node index in [1, " +
                            std::to_string(m.size() - 1) + "], got " + std::to_string(n));
  }
  const auto k = static_cast<std::size_t>(n);
  const auto& node = m.node(k);
  NodeRatio out;
  out.transported_offset = transported_offset(m, k, m.lambda());
  out.transported_L = node.L + out.transported_offset;
  out.ratio = m.eval_from(k, out.transported_offset) / node.G;
  out.bound = 0.5 * std::log(node.L);
  out.meets_bound = out.ratio >= out.bound;
  return out;
}

double predicted_ratio_at_node(const PiecewiseModulus& m, std::size_t n, double t, double c) {
  if (!(t > 0.0)) throw DomainError("predicted_ratio needs t > 0");
  if (!(c > 0.0)) throw DomainError("predicted_ratio needs c > 0");
  return m.eval_from(n, transported_offset(m, n, c * t)) / m.node(n).G;
}

}  // namespace vortmod
