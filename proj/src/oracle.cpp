#include "fgmtail/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fgmtail/errors.hpp"

namespace fgmtail::oracle {

GridSpec GridSpec::uniform(double x_min, double x_max, double step) {
  if (!(step > 0.0) || !(x_max > x_min)) throw DomainError("uniform grid needs step > 0 and x_max > x_min");
  const auto cells = static_cast<std::size_t>(std::llround((x_max - x_min) / step));
  return {Kind::kUniform, x_min, step, cells + 1, 1.0};
}

GridSpec GridSpec::log_warped(double x_min, double x_max, std::size_t points, double scale) {
  if (points < 2 || !(scale > 0.0) || !(x_max > x_min)) throw DomainError("invalid log-warped grid");
  const double s_max = std::log1p((x_max - x_min) / scale);
  return {Kind::kLogWarped, x_min, s_max / static_cast<double>(points - 1), points, scale};
}

double GridSpec::node(std::size_t i) const {
  const double s = step * static_cast<double>(i);
  return kind == Kind::kUniform ? x_min + s : x_min + scale * std::expm1(s);
}

double GridSpec::locate(double x) const {
  if (kind == Kind::kUniform) return (x - x_min) / step;
  const double d = (x - x_min) / scale;
  return d > -1.0 ? std::log1p(d) / step : -std::numeric_limits<double>::infinity();
}

GridSpec GridSpec::refined() const {
  GridSpec r = *this;
  r.step = step / 2.0;
  r.points = 2 * (points - 1) + 1;
  return r;
}

TailGrid::TailGrid(GridSpec spec, std::vector<double> values, double truncation_error)
    : spec_(spec), values_(std::move(values)), truncation_error_(truncation_error) {
  if (values_.size() != spec_.points || values_.size() < 2) throw DomainError("tail grid size mismatch");
}

TailGrid TailGrid::tabulate(const std::function<double(double)>& sf, const GridSpec& spec) {
  std::vector<double> v(spec.points);
  for (std::size_t i = 0; i < spec.points; ++i) v[i] = std::clamp(sf(spec.node(i)), 0.0, 1.0);
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::min(v[i], v[i - 1]);
  // mass strictly below the first node
  const double below = 1.0 - sf(std::nextafter(spec.x_min, -std::numeric_limits<double>::infinity()));
  return TailGrid(spec, std::move(v), std::max(0.0, below));
}

TailGrid TailGrid::tabulate(const Margin& m, const GridSpec& spec) {
  return tabulate([&m](double x) { return m.sf(x); }, spec);
}

TailGrid TailGrid::tabulate(const MinSquaredMargin& m, const GridSpec& spec) {
  return tabulate([&m](double x) { return m.sf(x); }, spec);
}

TailGrid TailGrid::point_mass_at_zero(const GridSpec& spec) {
  return tabulate([](double x) { return x < 0.0 ? 1.0 : 0.0; }, spec);
}

double TailGrid::sf_at(double x) const {
  const double r = spec_.locate(x);
  if (!(r > 0.0)) return values_.front();
  const std::size_t last = values_.size() - 1;
  std::size_t i;
  if (r >= static_cast<double>(last)) {
    i = last - 1;
  } else {
    i = static_cast<std::size_t>(r);
  }
  const double w = r - static_cast<double>(i);
  const double v0 = values_[i];
  const double v1 = values_[i + 1];
  if (w == 0.0) return v0;
  if (v0 > 0.0 && v1 > 0.0) return std::min(1.0, v0 * std::exp(w * std::log(v1 / v0)));
  return std::max(0.0, v0 + w * (v1 - v0));
}

GridSpec default_grid(const Margin& m) {
  if (m.is_inverse_gaussian()) return GridSpec::uniform(-10.0, 200.0, 0.01);
  return GridSpec::log_warped(0.0, 1e4, 4001, 1.0);
}

namespace {

// int_{y <= half} sf_other(x - y) dF_this(y) by trapezoidal Stieltjes sums.
// Mass of `self` below its first node is placed at x_min. `lost` collects
// the mass of cells whose partner argument falls beyond the grid.
template <class OtherAt>
double half_integral(const TailGrid& self, const OtherAt& other_at, double x, std::size_t i_out, double& lost) {
  const auto& spec = self.spec();
  const auto& v = self.values();
  const double half = 0.5 * x;
  const std::size_t last = v.size() - 1;

  double acc = (1.0 - v[0]) * other_at(x - spec.x_min, i_out, 0, lost, 1.0 - v[0]);
  if (half <= spec.x_min) return acc;

  const double r = spec.locate(half);
  const std::size_t full = r >= static_cast<double>(last) ? last : static_cast<std::size_t>(r);
  double left = other_at(x - spec.node(0), i_out, 0, lost, 0.0);
  for (std::size_t j = 0; j < full; ++j) {
    const double mass = v[j] - v[j + 1];
    const double right = other_at(x - spec.node(j + 1), i_out, j + 1, lost, mass);
    acc += 0.5 * (left + right) * mass;
    left = right;
  }
  if (full < last) {
    const double mass = v[full] - self.sf_at(half);
    if (mass > 0.0) acc += 0.5 * (left + other_at(x - half, i_out, std::size_t(-1), lost, mass)) * mass;
  }
  return acc;
}

}  // namespace

TailGrid convolve_tail(const TailGrid& a, const TailGrid& b) {
  if (!(a.spec() == b.spec())) throw DomainError("convolve_tail: grids must share the same nodes");
  const auto& spec = a.spec();
  const std::size_t m = spec.points;

  // On a uniform grid whose origin is a whole number of steps from 0, x_i - y_j
  // is itself a node and needs no interpolation.
  const double origin = -spec.x_min / spec.step;
  const bool aligned = spec.kind == GridSpec::Kind::kUniform && std::abs(origin - std::round(origin)) < 1e-9;
  const auto offset = static_cast<std::ptrdiff_t>(std::llround(origin));

  auto make_at = [&](const TailGrid& g) {
    return [&g, aligned, offset, m, &spec](double t, std::size_t i_out, std::size_t j, double& lost, double mass) {
      if (t > spec.x_max()) lost += mass;
      if (aligned && j != std::size_t(-1)) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i_out) - static_cast<std::ptrdiff_t>(j) + offset;
        if (idx >= 0 && static_cast<std::size_t>(idx) < m) return g.values()[static_cast<std::size_t>(idx)];
      }
      return g.sf_at(t);
    };
  };
  const auto a_at = make_at(a);
  const auto b_at = make_at(b);

  std::vector<double> out(m);
  double lost_max = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = spec.node(i);
    double lost = 0.0;
    const double from_b = half_integral(b, a_at, x, i, lost);
    const double from_a = half_integral(a, b_at, x, i, lost);
    const double both = a.sf_at(0.5 * x) * b.sf_at(0.5 * x);
    out[i] = std::clamp(from_b + from_a + both, 0.0, 1.0);
    lost_max = std::max(lost_max, lost);
  }
  for (std::size_t i = 1; i < m; ++i) out[i] = std::min(out[i], out[i - 1]);

  // mass beyond x_max is known only through extrapolation, so it counts as untracked
  const double truncation =
      a.truncation_error() + b.truncation_error() + lost_max + a.values().back() + b.values().back();
  if (truncation > kTruncationBudget) {
    std::ostringstream os;
    os << "convolve_tail: untracked mass " << truncation << " exceeds budget " << kTruncationBudget;
    throw GridCoverageError(os.str());
  }
  return TailGrid(spec, std::move(out), truncation);
}

TailGrid nfold(const TailGrid& base, int n) {
  if (n < 1) throw DomainError("nfold requires n >= 1");
  TailGrid acc = base;
  for (int i = 1; i < n; ++i) acc = convolve_tail(acc, base);
  return acc;
}

double nfold_ratio_check(const Margin& m, int n, double x_probe, const GridSpec& spec) {
  if (n < 1 || n > 4) throw DomainError("nfold_ratio_check supports 1 <= n <= 4");
  if (n == 1) return 1.0;
  const TailGrid conv = nfold(TailGrid::tabulate(m, spec), n);
  return conv.sf_at(x_probe) / m.sf(x_probe);
}

double nfold_ratio_check(const Margin& m, int n, double x_probe) {
  return nfold_ratio_check(m, n, x_probe, default_grid(m));
}

double tail_equivalence_check(const TailGrid& f1, const TailGrid& f2, const Margin& ref, double l1, double l2,
                              double x_probe) {
  if (!(l1 >= 0.0) || !(l2 >= 0.0)) throw DomainError("tail equivalence limits must be nonnegative");
  return convolve_tail(f1, f2).sf_at(x_probe) / ref.sf(x_probe);
}

ConvergenceReport nfold_convergence(const Margin& m, int n, double target, const GridSpec& spec) {
  if (n < 2 || n > 4) throw DomainError("nfold_convergence supports 2 <= n <= 4");
  const TailGrid coarse = nfold(TailGrid::tabulate(m, spec), n);
  const TailGrid fine = nfold(TailGrid::tabulate(m, spec.refined()), n);
  auto ratio = [&m](const TailGrid& g, double x) { return g.sf_at(x) / m.sf(x); };

  ConvergenceReport rep;
  rep.target = target;
  for (double x = 0.9 * spec.x_max(); x / 4.0 > 1.0; x /= std::sqrt(2.0)) {
    const double rc = ratio(coarse, x);
    const double rf = ratio(fine, x);
    if (!(rc > 0.0) || !(rf > 0.0)) continue;
    const double change = std::abs(rf / rc - 1.0);
    if (change < 0.01) {
      rep.probe = {x, rc};
      rep.refined_ratio = rf;
      rep.refinement_change = change;
      break;
    }
  }
  if (rep.probe.x == 0.0) throw GridCoverageError("nfold_convergence: no probe passes the refinement gate");
  const double px = rep.probe.x;
  rep.trend = {ProbePoint{px / 4.0, ratio(coarse, px / 4.0)}, ProbePoint{px / 2.0, ratio(coarse, px / 2.0)},
               rep.probe};
  const double d0 = std::abs(rep.trend[0].ratio - target);
  const double d1 = std::abs(rep.trend[1].ratio - target);
  const double d2 = std::abs(rep.trend[2].ratio - target);
  rep.monotone_toward_target = d0 > d1 && d1 > d2;
  return rep;
}

ConvergenceReport nfold_convergence(const Margin& m, int n, double target) {
  return nfold_convergence(m, n, target, default_grid(m));
}

std::array<ProbePoint, 3> domination_trend(const TailGrid& dominated, const Margin& ref, int n,
                                           const std::array<double, 3>& probes) {
  const TailGrid conv = nfold(dominated, n);
  std::array<ProbePoint, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = {probes[i], conv.sf_at(probes[i]) / ref.sf(probes[i])};
  return out;
}

MixedTailCheck mixed_tail_bound_check(int n, int m, double theta, const Margin& f, const Margin& g, double x,
                                      double y, double mc, double bound) {
  if (!((n >= 1 && m >= 2) || (n >= 2 && m >= 1))) {
    throw DomainError("mixed tail bound needs n >= 1, m >= 2 or n >= 2, m >= 1");
  }
  if (!(bound > 1.0)) throw DomainError("bound constant must exceed 1");
  MixedTailCheck out;
  out.bound = bound;
  out.ratio = mc / (f.sf(x) * g.sf(y));
  out.pass = out.ratio >= 1.0 / bound && out.ratio <= bound;

  const double gf = f.convolution_gamma();
  const double gg = g.convolution_gamma();
  if (std::abs(gf - gg) <= 1e-12 * std::max({1.0, gf, gg})) {
    const auto hats = HatValues::from_margins(f, g, gf);
    if (n == m) {
      out.reference_constant = k_coefficient_iterative(n, theta, hats);
    } else if (n == 1) {
      // one x-loss against m y-losses
      out.reference_constant = (1.0 + theta) * m * std::pow(hats.hat_g, m - 1) -
                               theta * (m - 1) * std::pow(hats.hat_g, m - 2) * hats.hat_g_min;
    } else if (m == 1) {
      out.reference_constant = (1.0 + theta) * n * std::pow(hats.hat_f, n - 1) -
                               theta * (n - 1) * std::pow(hats.hat_f, n - 2) * hats.hat_f_min;
    }
  }
  return out;
}

}  // namespace fgmtail::oracle
