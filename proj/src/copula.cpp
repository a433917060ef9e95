#include "fgmtail/copula.hpp"

#include <algorithm>
#include <cmath>

#include "fgmtail/errors.hpp"

namespace fgmtail {

double fgm_copula_cdf(double u, double v, double theta) {
  return u * v * (1.0 + theta * (1.0 - u) * (1.0 - v));
}

double fgm_copula_sf(double su, double sv, double theta) {
  return (1.0 + theta) * su * sv - theta * su * su * sv - theta * su * sv * sv + theta * su * su * sv * sv;
}

double fgm_conditional_inverse(double u, double w, double theta) {
  const double a = theta * (1.0 - 2.0 * u);
  if (std::abs(a) < 1e-12) return w;
  const double b = 1.0 + a;
  const double disc = std::max(0.0, b * b - 4.0 * a * w);
  // Smaller root; equals 2w / (b + sqrt(disc)) without the cancellation.
  return 2.0 * w / (b + std::sqrt(disc));
}

double StarDecomposition::joint_sf(double x, double y) const {
  const double sf_x = x_star.sf(x);
  const double sf_y = y_star.sf(y);
  const double sf_xm = x_min.sf(x);
  const double sf_ym = y_min.sf(y);
  return weights[0] * sf_x * sf_y + weights[1] * sf_xm * sf_y + weights[2] * sf_x * sf_ym +
         weights[3] * sf_xm * sf_ym;
}

FgmModel::FgmModel(Margin f, Margin g, double theta) : f_(f), g_(g), theta_(theta) {
  if (!(theta >= -1.0 && theta <= 1.0)) throw DomainError("FGM dependence theta must lie in [-1, 1]");
}

double FgmModel::joint_cdf(double x, double y) const {
  const double fx = f_.cdf(x);
  const double gy = g_.cdf(y);
  return std::clamp(fx * gy * (1.0 + theta_ * f_.sf(x) * g_.sf(y)), 0.0, 1.0);
}

double FgmModel::joint_sf(double x, double y) const {
  return std::clamp(fgm_copula_sf(f_.sf(x), g_.sf(y), theta_), 0.0, 1.0);
}

std::pair<double, double> FgmModel::pair_from_uniforms(double u, double w) const {
  // Rounding can push v onto the closed endpoints when w is within an ulp of them.
  const double v = std::clamp(fgm_conditional_inverse(u, w, theta_), std::nextafter(0.0, 1.0),
                              std::nextafter(1.0, 0.0));
  return {f_.quantile(u), g_.quantile(v)};
}

std::pair<double, double> FgmModel::sample_pair(RngStream& rng) const {
  const double u = rng.uniform();
  const double w = rng.uniform();
  return pair_from_uniforms(u, w);
}

StarDecomposition FgmModel::star_samplers() const {
  return StarDecomposition{f_, g_, MinSquaredMargin(f_), MinSquaredMargin(g_),
                           {1.0 + theta_, -theta_, -theta_, theta_}};
}

}  // namespace fgmtail
