#pragma once

// Iterative construction of the rough concave modulus G.
//
// Nodes alternate between the two envelopes: even nodes sit on
// f_upper = L^{-g} ln L, odd nodes on f_lower = L^{-g}. An odd node is placed
// by the recurrence lambda x_{n+1} |log x_{n+1}|^{1-g} = x_n; the following
// even node is where the chord through the last two nodes meets f_upper
// again. G is the piecewise-linear interpolant in x-space.

#include <span>
#include <string>
#include <vector>

#include "vortmod/logdomain.hpp"

namespace vortmod {

enum class Touch { UpperEnvelope, LowerEnvelope };
enum class TailPolicy { LineToOrigin };

const char* to_string(Touch t);

// Beyond L ~ 1e17 an odd node's distance to its predecessor (a few dozen)
// is below one ulp of L, so consecutive L values may round to the same
// double. Likewise G_{n-1} - G_n at even n falls below one ulp of G after
// about twenty nodes. `gap` and `drop` carry both differences exactly and
// every difference of neighbouring nodes is taken from them.
struct ModulusNode {
  int index = 0;
  double L = 0.0;
  double G = 0.0;
  Touch touch = Touch::UpperEnvelope;
  double gap = 0.0;   // L_n - L_{n-1}; 0 for the first node
  double drop = 0.0;  // G_{n-1} - G_n; 0 for the first node
};

class PiecewiseModulus {
 public:
  // Only basic shape is validated here (non-empty, positive finite values).
  // Structural properties are the business of the check_* functions so that
  // deliberately broken node sets can be inspected.
  PiecewiseModulus(double gamma, double lambda, std::vector<ModulusNode> nodes,
                   TailPolicy tail = TailPolicy::LineToOrigin);

  double gamma() const noexcept { return gamma_; }
  double lambda() const noexcept { return lambda_; }
  TailPolicy tail_policy() const noexcept { return tail_; }
  std::span<const ModulusNode> nodes() const noexcept { return nodes_; }
  const ModulusNode& node(std::size_t n) const { return nodes_.at(n); }
  std::size_t size() const noexcept { return nodes_.size(); }

  double domain_start() const noexcept { return nodes_.front().L; }
  double domain_end() const noexcept { return nodes_.back().L; }

  // G at log-abscissa L >= L_0. Exact at nodes; linear in x between nodes,
  // evaluated with non-positive exponents only; LineToOrigin past the last node.
  // Where neighbouring nodes share a double L, the later node wins.
  double eval(double L) const;
  double eval(LogAbscissa L) const { return eval(L.value()); }
  // G at L_k + dL, walking across nodes by their exact gaps.
  double eval_from(std::size_t k, double dL) const;

 private:
  double gamma_;
  double lambda_;
  std::vector<ModulusNode> nodes_;
  TailPolicy tail_;
};

// Residual of the defining recurrence in log variables:
//   L - (1-g) ln L - (L_n + ln lambda).
double recurrence_residual(double L, double L_n, double gamma, double lambda);

// Solve lambda x_{n+1} |log x_{n+1}|^{1-g} = x_n for L_{n+1}.
double solve_recurrence(double L_n, double gamma, double lambda);
// The same, returning L_{n+1} - L_n without the rounding of L_{n+1}.
double solve_recurrence_gap(double L_n, double gamma, double lambda);

// L_b - L_a and G_a - G_b for a node pair, exact when b directly follows a.
double node_gap(const ModulusNode& a, const ModulusNode& b);
double node_drop(const ModulusNode& a, const ModulusNode& b);

// The chord through (x_a, G_a) and (x_b, G_b), with x_a > x_b, evaluated at L
// or at L_b + dL.
double chord_value(const ModulusNode& a, const ModulusNode& b, double L);
double chord_value_offset(const ModulusNode& a, const ModulusNode& b, double dL);

// Where the chord through node_a (earlier, larger x) and node_b meets
// f_upper beyond node_b on the decreasing branch of f_upper.
double solve_chord_intersection(const ModulusNode& node_a, const ModulusNode& node_b, double gamma);

inline constexpr int kMaxNodes = 200;
inline constexpr double kMaxLogAbscissa = 1e300;

PiecewiseModulus construct(double gamma, double lambda, double L0, int n_max);

struct CheckEntry {
  int step = 0;
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs for "<" style checks
  std::string note;
};

struct CheckReport {
  std::string name;
  std::vector<CheckEntry> entries;
  std::string notice;  // set when the check is vacuous or skipped

  bool passed() const;
  const CheckEntry* first_failure() const;
};

CheckReport check_property1(const PiecewiseModulus& m);
CheckReport check_property2(const PiecewiseModulus& m);
CheckReport check_concavity(const PiecewiseModulus& m);
// Touch flags alternate from UpperEnvelope and node values match the envelopes.
CheckReport check_alternation(const PiecewiseModulus& m, double rel_tol = 1e-10);
// Each even node n >= 2 lies on the extended chord through nodes n-2, n-1.
CheckReport check_collinearity(const PiecewiseModulus& m, double rel_tol = 1e-9);

struct NodeRatio {
  double ratio = 0.0;
  double bound = 0.0;
  double transported_L = 0.0;
  double transported_offset = 0.0;  // transported_L - L_n, exact
  bool meets_bound = false;
};

// -ln lambda_eff - ln G_n - ln L_n: where node n is transported, relative to L_n.
double transported_offset(const PiecewiseModulus& m, std::size_t n, double lambda_eff);

// G(lambda x_n G(x_n) |log x_n|) / G(x_n) at an odd node, against (1/2) ln L_n.
NodeRatio ratio_at_node(const PiecewiseModulus& m, int n);

// predicted_ratio at node n with lambda_eff = c t, in node-relative form.
double predicted_ratio_at_node(const PiecewiseModulus& m, std::size_t n, double t, double c);

}  // namespace vortmod
