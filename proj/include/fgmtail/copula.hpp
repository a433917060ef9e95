#pragma once

#include <array>
#include <utility>

#include "fgmtail/distributions.hpp"
#include "fgmtail/rng.hpp"

namespace fgmtail {

/// FGM copula C(u,v) = uv(1 + theta (1-u)(1-v)).
double fgm_copula_cdf(double u, double v, double theta);
/// Copula survival P(U > u, V > v) from the four-term star display in the
/// marginal tails su = 1-u, sv = 1-v.
double fgm_copula_sf(double su, double sv, double theta);
/// Conditional inverse: the v solving v(1 + A(1-v)) = w with A = theta(1-2u).
double fgm_conditional_inverse(double u, double w, double theta);

/// Signed mixture of four independent products reproducing an FGM joint
/// survival: Pi = (1+t) sfF sfG - t sfF^2 sfG - t sfF sfG^2 + t sfF^2 sfG^2.
struct StarDecomposition {
  Margin x_star;
  Margin y_star;
  MinSquaredMargin x_min;
  MinSquaredMargin y_min;
  /// Weights of (X*,Y*), (X*min,Y*), (X*,Y*min), (X*min,Y*min).
  std::array<double, 4> weights;

  /// Reconstruction of the joint survival from the four independent terms.
  double joint_sf(double x, double y) const;
};

/// Bivariate model with margins f, g joined by an FGM copula.
class FgmModel {
 public:
  /// Throws DomainError unless theta lies in [-1, 1].
  FgmModel(Margin f, Margin g, double theta);

  double joint_cdf(double x, double y) const;
  double joint_sf(double x, double y) const;

  /// Conditional inversion: U, W uniform, V = C_{2|1}^{-1}(W | U),
  /// returns (f.quantile(U), g.quantile(V)).
  std::pair<double, double> sample_pair(RngStream& rng) const;
  /// Same map with caller-supplied uniforms.
  std::pair<double, double> pair_from_uniforms(double u, double w) const;

  StarDecomposition star_samplers() const;

  const Margin& f() const { return f_; }
  const Margin& g() const { return g_; }
  double theta() const { return theta_; }

 private:
  Margin f_;
  Margin g_;
  double theta_;
};

}  // namespace fgmtail
