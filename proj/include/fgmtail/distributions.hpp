#pragma once

#include <string>
#include <variant>

#include "fgmtail/rng.hpp"

namespace fgmtail {

/// Inverse Gaussian law with mean `mu` and shape `nu` (often written lambda).
struct InverseGaussian {
  double mu;
  double nu;
};

/// Lomax law on [0, inf): sf(x) = (1 + x)^(-alpha).
struct ShiftedPareto {
  double alpha;
};

using Family = std::variant<InverseGaussian, ShiftedPareto>;

/// Member of the convolution-equivalent class S(gamma).
struct ConvolutionEquivalent {
  double gamma;
};

/// Regularly varying right tail with index -alpha (a subclass of S(0)).
struct RegularlyVarying {
  double alpha;
};

using TailClass = std::variant<ConvolutionEquivalent, RegularlyVarying>;

/// A one-dimensional loss distribution. Immutable; safe to share across threads.
class Margin {
 public:
  /// Throws DomainError unless mu > 0 and nu > 0.
  static Margin inverse_gaussian(double mu, double nu);
  /// Throws DomainError unless alpha > 0.
  static Margin shifted_pareto(double alpha);

  double cdf(double x) const;
  /// Right tail P(X > x), evaluated directly rather than as 1 - cdf.
  double sf(double x) const;
  double density(double x) const;
  /// Generalized inverse inf{x : cdf(x) >= q}; throws DomainError for q outside (0,1).
  double quantile(double q) const;
  /// E[exp(gamma X)]; throws DomainError beyond the abscissa of convergence.
  double mgf_hat(double gamma) const;
  double sample(RngStream& rng) const;

  TailClass tail_class() const;
  /// The gamma for which the margin is in S(gamma); 0 for regularly varying tails.
  double convolution_gamma() const;
  bool nonnegative_support() const { return true; }
  double mean() const;

  const Family& family() const { return family_; }
  bool is_inverse_gaussian() const { return std::holds_alternative<InverseGaussian>(family_); }
  bool is_pareto() const { return std::holds_alternative<ShiftedPareto>(family_); }
  std::string label() const;

 private:
  explicit Margin(Family f) : family_(f) {}
  Family family_;
};

/// Law of min(X1, X2) for independent X1, X2 ~ base, i.e. sf = base.sf^2.
class MinSquaredMargin {
 public:
  explicit MinSquaredMargin(Margin base) : base_(base) {}

  double cdf(double x) const;
  double sf(double x) const;
  double density(double x) const;
  double quantile(double q) const;
  /// Exponential moment by adaptive quadrature of exp(gamma x) * 2 f(x) sf(x).
  double mgf_hat(double gamma) const;
  double sample(RngStream& rng) const;

  const Margin& base() const { return base_; }
  bool nonnegative_support() const { return base_.nonnegative_support(); }
  std::string label() const;

 private:
  Margin base_;
};

}  // namespace fgmtail
