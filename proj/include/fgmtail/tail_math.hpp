#pragma once

#include <functional>
#include <vector>

#include "fgmtail/distributions.hpp"

namespace fgmtail {

/// Exponential moments of F, G and of their min-squared laws at a common gamma.
struct HatValues {
  double hat_f = 1.0;
  double hat_g = 1.0;
  double hat_f_min = 1.0;
  double hat_g_min = 1.0;

  static HatValues ones() { return {}; }
  /// Evaluates all four transforms at `gamma` (quadrature for the min laws).
  static HatValues from_margins(const Margin& f, const Margin& g, double gamma);
};

/// n = n1 + n2 + n3 + n4 draws split over the four star terms.
struct Composition {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
  int n4 = 0;

  int total() const { return n1 + n2 + n3 + n4; }
  // Draws from F and from F_min entering the x-axis sum, and likewise for y.
  int x_full() const { return n1 + n3; }
  int x_min() const { return n2 + n4; }
  int y_full() const { return n1 + n2; }
  int y_min() const { return n3 + n4; }
};

struct ExpansionTerm {
  Composition parts;
  /// n!/(n1!n2!n3!n4!) (-1)^(n2+n3) (1+theta)^n1 theta^(n-n1)
  double coeff_a;
};

/// All compositions of n into four nonnegative parts, lexicographic in (n1,n2,n3,n4).
std::vector<Composition> compositions(int n);
std::vector<ExpansionTerm> expansion_terms(int n, double theta);

/// Sum of `values` accumulated in order of decreasing magnitude.
double ordered_sum(std::vector<double> values);

/// f(u,v,s,t) = (1+theta)uv - theta sv - theta ut + theta st
double f_poly(double u, double v, double s, double t, double theta);

/// Mixed derivative d^2 f^n / du dv at the hat point, via the closed recursion
///   n f^{n-1} (1+theta) + n(n-1) f_u f_v f^{n-2}.
double k_coefficient_iterative(int n, double theta, const HatValues& hats);
/// The same constant as the A-weighted sum of B * Gamma over all compositions.
double k_coefficient_sum(int n, double theta, const HatValues& hats);

/// P(sum of `num_full` draws of the base law + `num_min` draws of its min law > threshold).
using CompositeTail = std::function<double(int num_full, int num_min, double threshold)>;

/// Exact finite-x identity
///   P(S_n > x, T_n > y) = sum_A A * x_tail(n1+n3, n2+n4, x) * y_tail(n1+n2, n3+n4, y).
double joint_tail_expansion(int n, double theta, double x, double y, const CompositeTail& x_tail,
                            const CompositeTail& y_tail);

struct JointTailAsymptote {
  double value;
  double k;
  /// K vanished (n = 1, theta = -1): the joint tail is o(sfF sfG) and `value`
  /// carries no first-order information.
  bool degenerate;
};

/// K(n, theta, gamma) sfF(x) sfG(y). Throws ClassMismatchError when the margins
/// are not in S(gamma) for a common gamma.
JointTailAsymptote asym_joint_tail(int n, double theta, const Margin& f, const Margin& g, double x, double y);

struct TailMomentQuery {
  double x = 0.0;
  double y = 0.0;
  double beta = 1.0;
  double zeta = 0.0;
  int k = 1;
  int n = 1;
};

/// First-order asymptote of E[X_k^beta | X_k > zeta x, S_n > x, T_n > y].
///
/// S(gamma) margins (inverse Gaussian): x^beta for 0 < zeta < 1, x^beta / n
/// for zeta = 0. Regularly varying margins: alpha/(alpha-beta) x^beta for
/// 0 < zeta <= 1 and the same divided by n for zeta = 0. The value does not
/// depend on theta or on y.
double asym_rho(const TailMomentQuery& query, const Margin& f, const Margin& g, double theta);

/// Asymptote of P(X_k > u x, S_n > x, T_n > y), n >= 2.
double asym_component_tail(int n, double theta, const Margin& f, const Margin& g, double u, double x, double y);

}  // namespace fgmtail
