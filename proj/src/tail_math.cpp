#include "fgmtail/tail_math.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fgmtail/errors.hpp"

namespace fgmtail {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

void require_n(int n) {
  if (n < 1) throw DomainError("portfolio size n must be at least 1");
}

void require_theta(double theta) {
  if (!(theta >= -1.0 && theta <= 1.0)) throw DomainError("theta must lie in [-1, 1]");
}

bool is_positive_integer(double b) { return b > 0.0 && std::floor(b) == b; }

// Common gamma of two margins, or ClassMismatchError.
double common_gamma(const Margin& f, const Margin& g) {
  const double gf = f.convolution_gamma();
  const double gg = g.convolution_gamma();
  if (std::abs(gf - gg) > 1e-12 * std::max({1.0, gf, gg})) {
    std::ostringstream os;
    os << "margins belong to different classes: S(" << gf << ") vs S(" << gg << ")";
    throw ClassMismatchError(os.str());
  }
  return gf;
}

}  // namespace

HatValues HatValues::from_margins(const Margin& f, const Margin& g, double gamma) {
  if (gamma == 0.0) return ones();
  return {f.mgf_hat(gamma), g.mgf_hat(gamma), MinSquaredMargin(f).mgf_hat(gamma),
          MinSquaredMargin(g).mgf_hat(gamma)};
}

std::vector<Composition> compositions(int n) {
  std::vector<Composition> out;
  for (int n1 = 0; n1 <= n; ++n1)
    for (int n2 = 0; n1 + n2 <= n; ++n2)
      for (int n3 = 0; n1 + n2 + n3 <= n; ++n3) out.push_back({n1, n2, n3, n - n1 - n2 - n3});
  return out;
}

std::vector<ExpansionTerm> expansion_terms(int n, double theta) {
  require_n(n);
  std::vector<ExpansionTerm> terms;
  const double nfact = factorial(n);
  for (const auto& c : compositions(n)) {
    const double multinomial = nfact / (factorial(c.n1) * factorial(c.n2) * factorial(c.n3) * factorial(c.n4));
    const double sign = (c.n2 + c.n3) % 2 == 0 ? 1.0 : -1.0;
    const double a = multinomial * sign * std::pow(1.0 + theta, c.n1) * std::pow(theta, n - c.n1);
    terms.push_back({c, a});
  }
  return terms;
}

double ordered_sum(std::vector<double> values) {
  std::stable_sort(values.begin(), values.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double f_poly(double u, double v, double s, double t, double theta) {
  return (1.0 + theta) * u * v - theta * s * v - theta * u * t + theta * s * t;
}

double k_coefficient_iterative(int n, double theta, const HatValues& h) {
  require_n(n);
  require_theta(theta);
  const double f = f_poly(h.hat_f, h.hat_g, h.hat_f_min, h.hat_g_min, theta);
  const double first = (1.0 + theta) * n * std::pow(f, n - 1);
  if (n == 1) return first;
  const double df_dv = h.hat_f + theta * (h.hat_f - h.hat_f_min);  // (1+theta)u - theta s
  const double df_du = h.hat_g + theta * (h.hat_g - h.hat_g_min);  // (1+theta)v - theta t
  return first + static_cast<double>(n) * (n - 1) * df_dv * df_du * std::pow(f, n - 2);
}

double k_coefficient_sum(int n, double theta, const HatValues& h) {
  require_n(n);
  require_theta(theta);
  std::vector<double> values;
  for (const auto& term : expansion_terms(n, theta)) {
    const auto& c = term.parts;
    if (c.x_full() == 0 || c.y_full() == 0) continue;  // B or Gamma vanishes
    const double b = c.x_full() * std::pow(h.hat_f, c.x_full() - 1) * std::pow(h.hat_f_min, c.x_min());
    const double g = c.y_full() * std::pow(h.hat_g, c.y_full() - 1) * std::pow(h.hat_g_min, c.y_min());
    values.push_back(term.coeff_a * b * g);
  }
  return ordered_sum(std::move(values));
}

double joint_tail_expansion(int n, double theta, double x, double y, const CompositeTail& x_tail,
                            const CompositeTail& y_tail) {
  require_theta(theta);
  std::vector<double> values;
  for (const auto& term : expansion_terms(n, theta)) {
    if (term.coeff_a == 0.0) continue;
    const auto& c = term.parts;
    values.push_back(term.coeff_a * x_tail(c.x_full(), c.x_min(), x) * y_tail(c.y_full(), c.y_min(), y));
  }
  return ordered_sum(std::move(values));
}

JointTailAsymptote asym_joint_tail(int n, double theta, const Margin& f, const Margin& g, double x, double y) {
  require_n(n);
  require_theta(theta);
  const double gamma = common_gamma(f, g);
  const double k = k_coefficient_iterative(n, theta, HatValues::from_margins(f, g, gamma));
  const bool degenerate = std::abs(k) <= 1e-14;
  return {degenerate ? 0.0 : k * f.sf(x) * g.sf(y), degenerate ? 0.0 : k, degenerate};
}

double asym_rho(const TailMomentQuery& q, const Margin& f, const Margin& g, double theta) {
  require_n(q.n);
  require_theta(theta);
  if (q.k < 1 || q.k > q.n) throw DomainError("asset index k must lie in [1, n]");
  if (!(q.beta > 0.0) || std::isinf(q.beta)) throw DomainError("moment order beta must be positive and finite");
  if (!(q.zeta >= 0.0 && q.zeta <= 1.0)) throw DomainError("zeta must lie in [0, 1]");
  if (!(q.x > 0.0)) throw DomainError("threshold x must be positive");

  const bool nonnegative = f.nonnegative_support() && g.nonnegative_support();
  if (q.zeta == 0.0 && !is_positive_integer(q.beta) && !nonnegative) {
    throw DomainError("zeta = 0 with possibly negative losses requires a positive integer beta");
  }
  const double xb = std::pow(q.x, q.beta);

  if (f.is_pareto() && g.is_pareto()) {
    const double alpha = std::get<ShiftedPareto>(f.family()).alpha;
    if (alpha != std::get<ShiftedPareto>(g.family()).alpha) {
      throw ClassMismatchError("regularly varying margins must share the index alpha");
    }
    if (q.beta >= alpha) throw DomainError("beta must be smaller than the tail index alpha");
    const double factor = alpha / (alpha - q.beta);
    if (q.zeta > 0.0) return factor * xb;
    if (!(alpha > 1.0)) throw UnsupportedBranchError("zeta = 0 under regular variation requires alpha > 1");
    return factor * xb / q.n;
  }
  if (f.is_inverse_gaussian() && g.is_inverse_gaussian()) {
    common_gamma(f, g);
    if (q.zeta == 1.0) throw UnsupportedBranchError("zeta = 1 is not covered for S(gamma) margins");
    return q.zeta > 0.0 ? xb : xb / q.n;
  }
  throw ClassMismatchError("margins must both be inverse Gaussian or both be shifted Pareto");
}

double asym_component_tail(int n, double theta, const Margin& f, const Margin& g, double u, double x, double y) {
  require_theta(theta);
  if (n < 2) throw UnsupportedBranchError("component tail asymptote requires n >= 2");
  if (!(u > 0.0)) throw DomainError("u must be positive");
  if (f.is_pareto() && g.is_pareto()) {
    common_gamma(f, g);
    return (n + theta) * f.sf(std::max(u, 1.0) * x) * g.sf(y);
  }
  if (!(u < 1.0)) throw UnsupportedBranchError("S(gamma) component tail is covered only for 0 < u < 1");
  return asym_joint_tail(n, theta, f, g, x, y).value / n;
}

}  // namespace fgmtail
