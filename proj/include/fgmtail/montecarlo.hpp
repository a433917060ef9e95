#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fgmtail/copula.hpp"
#include "fgmtail/tail_math.hpp"

namespace fgmtail {

/// Stream domains; each purpose draws from its own family of Philox streams.
enum class StreamDomain : std::uint32_t {
  kPortfolio = 1,
  kStarSumX = 2,
  kStarSumY = 3,
  kMixedPortfolio = 4,
};

/// Samples per chunk. Fixed so that results do not depend on the worker count.
inline constexpr std::int64_t kChunkSize = 1 << 15;

struct SimulationPlan {
  int n = 3;
  int k = 1;
  FgmModel model;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  /// Force y = x for every query.
  bool link_thresholds = true;
  std::vector<TailMomentQuery> queries;
  /// Worker threads; 0 picks the hardware concurrency. Never changes results.
  int workers = 0;
};

struct EstimateReport {
  /// Empty when the conditioning event was never hit.
  std::optional<double> estimate;
  double numerator_sum = 0.0;
  std::int64_t denominator_hits = 0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;

  bool no_hits() const { return !estimate.has_value(); }
};

/// First and second sample moments for the ratio sum(a) / sum(b).
struct RatioMoments {
  double sum_a = 0.0;
  double sum_a2 = 0.0;
  double sum_b = 0.0;
  double sum_b2 = 0.0;
  double sum_ab = 0.0;
  std::int64_t n = 0;
};

/// Delta-method standard error of sum(a)/sum(b):
///   sqrt(sum_a2 - 2 R sum_ab + R^2 sum_b2) / sum_b,  R = sum_a / sum_b.
/// Returns 0 when sum_b is 0.
double stderr_ratio(const RatioMoments& m);

/// One simulated portfolio: n losses per line and their totals.
struct PortfolioRow {
  std::span<const double> x;
  std::span<const double> y;
  double s;
  double t;
};

/// Sums for a batch of tail-moment queries. Merging is exact for the integer
/// hit counts; real sums depend only on the merge order.
class MomentAccumulator {
 public:
  MomentAccumulator(std::span<const TailMomentQuery> queries, int k);

  void add(const PortfolioRow& row);
  void merge(const MomentAccumulator& other);

  struct Cell {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t hits = 0;
  };
  const std::vector<Cell>& cells() const { return cells_; }
  std::int64_t rows() const { return rows_; }

  std::vector<EstimateReport> reports(std::uint64_t seed) const;

 private:
  std::vector<TailMomentQuery> queries_;
  int k_;
  std::vector<Cell> cells_;
  std::int64_t rows_ = 0;
};

/// Throws ConfigError on an inconsistent plan.
void validate_plan(const SimulationPlan& plan);

/// Ratio-of-sums estimates of E[X_k^beta | X_k > zeta x, S_n > x, T_n > y] for
/// every query, all from one pass over `plan.samples` portfolios.
std::vector<EstimateReport> run_plan(const SimulationPlan& plan);

/// Applies the same estimator to explicit rows (rows[j] = {x_1..x_n, y_1..y_n}).
std::vector<EstimateReport> run_queries_on_rows(std::span<const TailMomentQuery> queries, int k,
                                                std::span<const std::vector<double>> rows);

/// Frequency of {S_n > x, T_n > y} with binomial standard error.
EstimateReport estimate_joint_tail(const SimulationPlan& plan, double x, double y);

/// P(X_k > u x, S_n > x, T_n > y) / P(S_n > x, T_n > y), shared sample pass.
EstimateReport estimate_component_ratio(const SimulationPlan& plan, double u, double x, double y);

/// Frequency of {S_n > x, T_m > y} for line sizes n != m (first n x-losses,
/// first m y-losses of max(n, m) FGM pairs).
EstimateReport estimate_mixed_joint_tail(const FgmModel& model, int n, int m, double x, double y,
                                         std::int64_t samples, std::uint64_t seed, int workers = 0);

/// Frequency of {sum of num_full draws of `base` + num_min draws of min(base, base') > threshold}.
EstimateReport estimate_star_sum_tail(const Margin& base, int num_full, int num_min, double threshold,
                                      std::int64_t samples, std::uint64_t seed, StreamDomain domain,
                                      int workers = 0);

struct ExpansionEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// P(S_n > x, T_n > y) through the A-weighted star expansion, each composite
/// tail estimated from independent star-sum simulations of `samples` draws.
ExpansionEstimate estimate_joint_tail_by_expansion(const FgmModel& model, int n, double x, double y,
                                                   std::int64_t samples, std::uint64_t seed, int workers = 0);

}  // namespace fgmtail
