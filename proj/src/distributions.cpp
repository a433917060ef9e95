#include "fgmtail/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "fgmtail/errors.hpp"

namespace fgmtail {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ig_log_density(const InverseGaussian& d, double x) {
  if (!(x > 0.0) || std::isinf(x)) return -kInf;
  const double dev = x - d.mu;
  return 0.5 * std::log(d.nu / (2.0 * std::numbers::pi * x * x * x)) -
         d.nu * dev * dev / (2.0 * d.mu * d.mu * x);
}

// cdf = Phi(a) + e^{2 nu/mu} Phi(-b); the second term is formed in log space
// so that e^{2 nu/mu} cannot overflow on its own.
struct IgTerms {
  double a;
  double reflected;
};

IgTerms ig_terms(const InverseGaussian& d, double x) {
  const double r = std::sqrt(d.nu / x);
  const double a = r * (x / d.mu - 1.0);
  const double b = r * (x / d.mu + 1.0);
  const double tail_b = 0.5 * std::erfc(b / std::numbers::sqrt2);
  const double reflected = tail_b > 0.0 ? std::exp(2.0 * d.nu / d.mu + std::log(tail_b)) : 0.0;
  return {a, reflected};
}

double ig_cdf(const InverseGaussian& d, double x) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const auto t = ig_terms(d, x);
  return std::min(1.0, norm_cdf(t.a) + t.reflected);
}

double ig_sf(const InverseGaussian& d, double x) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  const auto t = ig_terms(d, x);
  return std::max(0.0, norm_cdf(-t.a) - t.reflected);
}

// Newton steps kept inside a monotone bracket, falling back to bisection
// whenever a step leaves it. Seeded from the normal approximation.
double ig_quantile(const InverseGaussian& d, double q) {
  const double sd = std::sqrt(d.mu * d.mu * d.mu / d.nu);
  const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
  double lo = 0.0;
  double hi = std::max(d.mu, d.mu + 2.0 * sd);
  for (int i = 0; i < 1100 && ig_cdf(d, hi) < q; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  double x = std::clamp(d.mu + sd * z, lo, hi);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  constexpr double kTol = 1e-11;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = ig_cdf(d, x) - q;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double pdf = std::exp(ig_log_density(d, x));
    double next = pdf > 0.0 ? x - f / pdf : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= kTol || hi - lo <= kTol) break;
  }
  return x;
}

double ig_mgf(const InverseGaussian& d, double gamma) {
  const double limit = d.nu / (2.0 * d.mu * d.mu);
  if (gamma > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "mgf_hat: gamma=" << gamma << " exceeds the abscissa of convergence " << limit;
    throw DomainError(os.str());
  }
  const double radicand = std::max(0.0, 1.0 - 2.0 * d.mu * d.mu * gamma / d.nu);
  return std::exp(d.nu / d.mu * (1.0 - std::sqrt(radicand)));
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("mgf_hat: gamma must be nonnegative");
}

}  // namespace

Margin Margin::inverse_gaussian(double mu, double nu) {
  if (!(mu > 0.0) || !(nu > 0.0) || std::isinf(mu) || std::isinf(nu)) {
    throw DomainError("inverse Gaussian requires mu > 0 and nu > 0");
  }
  return Margin(InverseGaussian{mu, nu});
}

Margin Margin::shifted_pareto(double alpha) {
  if (!(alpha > 0.0) || std::isinf(alpha)) throw DomainError("shifted Pareto requires alpha > 0");
  return Margin(ShiftedPareto{alpha});
}

double Margin::cdf(double x) const {
  return std::visit(overloaded{[x](const InverseGaussian& d) { return ig_cdf(d, x); },
                               [this, x](const ShiftedPareto&) { return x > 0.0 ? 1.0 - sf(x) : 0.0; }},
                    family_);
}

double Margin::sf(double x) const {
  return std::visit(overloaded{[x](const InverseGaussian& d) { return ig_sf(d, x); },
                               [x](const ShiftedPareto& d) {
                                 return x > 0.0 ? std::pow(1.0 / (x + 1.0), d.alpha) : 1.0;
                               }},
                    family_);
}

double Margin::density(double x) const {
  return std::visit(overloaded{[x](const InverseGaussian& d) { return std::exp(ig_log_density(d, x)); },
                               [x](const ShiftedPareto& d) {
                                 return x >= 0.0 ? d.alpha * std::pow(x + 1.0, -d.alpha - 1.0) : 0.0;
                               }},
                    family_);
}

double Margin::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile: q must lie in (0, 1)");
  return std::visit(overloaded{[q](const InverseGaussian& d) { return ig_quantile(d, q); },
                               [q](const ShiftedPareto& d) { return std::expm1(-std::log1p(-q) / d.alpha); }},
                    family_);
}

double Margin::mgf_hat(double gamma) const {
  check_gamma(gamma);
  if (gamma == 0.0) return 1.0;
  return std::visit(overloaded{[gamma](const InverseGaussian& d) { return ig_mgf(d, gamma); },
                               [](const ShiftedPareto&) -> double {
                                 throw DomainError("mgf_hat: regularly varying tails have no exponential moment");
                               }},
                    family_);
}

double Margin::sample(RngStream& rng) const {
  return std::visit(
      overloaded{[&rng](const InverseGaussian& d) {
                   // Michael, Schucany & Haas (1976): root of the chi-square(1) transform.
                   const double z = rng.normal();
                   const double y = z * z;
                   const double mu = d.mu;
                   const double x = mu + mu * mu * y / (2.0 * d.nu) -
                                    mu / (2.0 * d.nu) * std::sqrt(4.0 * mu * d.nu * y + mu * mu * y * y);
                   return rng.uniform() <= mu / (mu + x) ? x : mu * mu / x;
                 },
                 [this, &rng](const ShiftedPareto&) { return quantile(rng.uniform()); }},
      family_);
}

TailClass Margin::tail_class() const {
  return std::visit(overloaded{[](const InverseGaussian& d) -> TailClass {
                                 return ConvolutionEquivalent{d.nu / (2.0 * d.mu * d.mu)};
                               },
                               [](const ShiftedPareto& d) -> TailClass { return RegularlyVarying{d.alpha}; }},
                    family_);
}

double Margin::convolution_gamma() const {
  return std::visit(overloaded{[](const ConvolutionEquivalent& c) { return c.gamma; },
                               [](const RegularlyVarying&) { return 0.0; }},
                    tail_class());
}

double Margin::mean() const {
  return std::visit(overloaded{[](const InverseGaussian& d) { return d.mu; },
                               [](const ShiftedPareto& d) { return d.alpha > 1.0 ? 1.0 / (d.alpha - 1.0) : kInf; }},
                    family_);
}

std::string Margin::label() const {
  std::ostringstream os;
  os.precision(15);
  std::visit(overloaded{[&os](const InverseGaussian& d) { os << "IG(" << d.mu << "," << d.nu << ")"; },
                        [&os](const ShiftedPareto& d) { os << "Pareto(" << d.alpha << ")"; }},
             family_);
  return os.str();
}

double MinSquaredMargin::cdf(double x) const {
  const double c = base_.cdf(x);
  return c * (2.0 - c);
}

double MinSquaredMargin::sf(double x) const {
  const double s = base_.sf(x);
  return s * s;
}

double MinSquaredMargin::density(double x) const { return 2.0 * base_.density(x) * base_.sf(x); }

double MinSquaredMargin::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile: q must lie in (0, 1)");
  // sf_min(x) = 1 - q  <=>  sf(x) = sqrt(1 - q)
  return base_.quantile(-std::expm1(0.5 * std::log1p(-q)));
}

double MinSquaredMargin::mgf_hat(double gamma) const {
  check_gamma(gamma);
  if (gamma == 0.0) return 1.0;
  const auto* ig = std::get_if<InverseGaussian>(&base_.family());
  if (ig == nullptr) throw DomainError("mgf_hat: regularly varying tails have no exponential moment");
  const double limit = ig->nu / (2.0 * ig->mu * ig->mu);
  if (gamma > limit * (1.0 + 1e-12)) throw DomainError("mgf_hat: gamma exceeds the abscissa of convergence");

  const InverseGaussian d = *ig;
  auto integrand = [&d, gamma](double x) {
    const double s = ig_sf(d, x);
    if (!(s > 0.0)) return 0.0;
    return std::exp(gamma * x + std::log(2.0 * s) + ig_log_density(d, x));
  };
  // sf decays like exp(-limit x); beyond limit * x = 800 the integrand underflows.
  const double upper = 800.0 / limit + 20.0 * d.mu;
  const double breaks[] = {0.0, d.mu, 10.0 * d.mu, upper};
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  for (int i = 0; i + 1 < 4; ++i) {
    total += Integrator::integrate(integrand, breaks[i], breaks[i + 1], 20, 1e-14);
  }
  return total;
}

double MinSquaredMargin::sample(RngStream& rng) const {
  const double a = base_.sample(rng);
  const double b = base_.sample(rng);
  return std::min(a, b);
}

std::string MinSquaredMargin::label() const { return "Min2[" + base_.label() + "]"; }

}  // namespace fgmtail
