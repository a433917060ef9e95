#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "fgmtail/distributions.hpp"
#include "fgmtail/tail_math.hpp"

namespace fgmtail::oracle {

/// Node placement. Uniform: x_i = x_min + i h. Log-warped: x_i = x_min + c (e^{i h} - 1),
/// which keeps relative resolution constant far into a heavy tail.
struct GridSpec {
  enum class Kind { kUniform, kLogWarped };

  Kind kind = Kind::kUniform;
  double x_min = 0.0;
  double step = 0.01;  // in the warped coordinate for kLogWarped
  std::size_t points = 0;
  double scale = 1.0;  // c, log-warped only

  static GridSpec uniform(double x_min, double x_max, double step);
  static GridSpec log_warped(double x_min, double x_max, std::size_t points, double scale);

  double node(std::size_t i) const;
  double x_max() const { return node(points - 1); }
  /// Fractional node index of x (not clamped).
  double locate(double x) const;
  /// Same nodes at twice the resolution.
  GridSpec refined() const;

  bool operator==(const GridSpec&) const = default;
};

/// Tail probabilities sf(x_i) on a grid.
class TailGrid {
 public:
  TailGrid(GridSpec spec, std::vector<double> values, double truncation_error);

  /// Tabulates sf on `spec`; truncation error is the mass below x_min.
  static TailGrid tabulate(const std::function<double(double)>& sf, const GridSpec& spec);
  static TailGrid tabulate(const Margin& m, const GridSpec& spec);
  static TailGrid tabulate(const MinSquaredMargin& m, const GridSpec& spec);
  /// Unit point mass at 0 (requires 0 to be a node or below the grid). The
  /// trapezoidal sums treat it exactly only when 0 is the first node; at an
  /// interior node the atom is spread over the cell below it.
  static TailGrid point_mass_at_zero(const GridSpec& spec);

  /// Tail at any x: log-linear between nodes, 1 - (mass below grid) to the
  /// left, log-linear extrapolation of the last cell to the right.
  double sf_at(double x) const;

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& values() const { return values_; }
  double x_min() const { return spec_.x_min; }
  double x_max() const { return spec_.x_max(); }
  double step() const { return spec_.step; }
  /// Upper bound on probability mass the grid failed to account for.
  double truncation_error() const { return truncation_error_; }

 private:
  GridSpec spec_;
  std::vector<double> values_;
  double truncation_error_;
};

/// Budget for untracked probability mass in any convolution.
inline constexpr double kTruncationBudget = 1e-6;

/// Default grids: uniform step 0.01 on [-10, 200] for inverse Gaussian laws,
/// log-warped on [0, 1e4] for shifted Pareto laws.
GridSpec default_grid(const Margin& m);

/// Tail of A + B for independent A, B tabulated on the same grid, from
///   P(A+B > x) = int_{y<=x/2} sfA(x-y) dF_B(y) + int_{z<=x/2} sfB(x-z) dF_A(z) + sfA(x/2) sfB(x/2)
/// with trapezoidal Stieltjes sums over tail differences.
/// Throws GridCoverageError if the untracked mass exceeds kTruncationBudget.
TailGrid convolve_tail(const TailGrid& a, const TailGrid& b);

/// n-fold self convolution of the tabulated tail.
TailGrid nfold(const TailGrid& base, int n);

/// sf^{*n}(x_probe) / sf(x_probe) on the default grid; 1 for n = 1.
double nfold_ratio_check(const Margin& m, int n, double x_probe);
double nfold_ratio_check(const Margin& m, int n, double x_probe, const GridSpec& spec);

/// sf_{f1*f2}(x_probe) / ref.sf(x_probe). Callers compare against
/// l1 * hat(f2) + l2 * hat(f1) where l_i = lim sf_i / sf_ref.
double tail_equivalence_check(const TailGrid& f1, const TailGrid& f2, const Margin& ref, double l1, double l2,
                              double x_probe);

struct ProbePoint {
  double x = 0.0;
  double ratio = 0.0;
};

/// Finite-x view of a limit sf^{*n}(x)/sf(x) -> target.
struct ConvergenceReport {
  double target = 0.0;
  ProbePoint probe;
  double refined_ratio = 0.0;
  double refinement_change = 0.0;  // |refined / ratio - 1| at the probe
  std::array<ProbePoint, 3> trend;  // probe/4, probe/2, probe
  bool monotone_toward_target = false;

  double relative_error() const { return std::abs(probe.ratio / target - 1.0); }
};

/// Evaluates the n-fold ratio on `spec` and on its refinement; the probe is
/// the largest candidate x at which the two agree to 1%.
ConvergenceReport nfold_convergence(const Margin& m, int n, double target, const GridSpec& spec);
ConvergenceReport nfold_convergence(const Margin& m, int n, double target);

/// n-fold tail of a dominated law relative to a reference tail at three probes.
/// Under domination the ratios should decrease; no rate is asserted.
std::array<ProbePoint, 3> domination_trend(const TailGrid& dominated, const Margin& ref, int n,
                                           const std::array<double, 3>& probes);

struct MixedTailCheck {
  double ratio = 0.0;  // mc / (sfF(x) sfG(y))
  double bound = 0.0;  // C
  std::optional<double> reference_constant;
  bool pass = false;
};

/// Two-sided order bound C^{-1} <= mc / (sfF(x) sfG(y)) <= C for P(S_n > x, T_m > y).
/// Requires n >= 1, m >= 2 or n >= 2, m >= 1.
MixedTailCheck mixed_tail_bound_check(int n, int m, double theta, const Margin& f, const Margin& g, double x,
                                      double y, double mc, double bound = 50.0);

}  // namespace fgmtail::oracle
