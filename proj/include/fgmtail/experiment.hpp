#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fgmtail/distributions.hpp"

namespace fgmtail {

enum class ExperimentKind { kTable1, kTable2, kTable3, kTable4, kTable5, kTable6, kFigIg, kFigPareto, kCustom };

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for unknown names.
ExperimentKind parse_experiment_kind(const std::string& name);

enum class MarginFamily { kInverseGaussian, kPareto };

/// Everything needed to reproduce one table or figure.
///
/// Inverse Gaussian runs use F = IG(mu, nu) and one G per entry of
/// `g_params`; Pareto runs use F = G = Pareto(alpha) for each alpha.
/// Thresholds are absolute (`xs`) or quantile levels (`qs`, x = y = F^{-1}(q)).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kCustom;
  MarginFamily family = MarginFamily::kInverseGaussian;
  double mu = 1.0;
  double nu = 1.0;
  std::vector<std::pair<double, double>> g_params{{1.0, 1.0}};
  std::vector<double> alphas{2.8};
  std::vector<double> thetas{0.5};
  std::vector<double> betas{1.0};
  double zeta = 0.0;
  std::vector<double> xs;
  std::vector<double> qs;
  int n = 3;
  int k = 1;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 20240917;
  int workers = 0;
  std::string out = "results.csv";
};

/// Parameter grid of a named table or figure.
ExperimentConfig preset(ExperimentKind kind);

/// Flat `key = value` text, one entry per line, `#` starts a comment. Lists
/// are comma separated; `a:b:step` expands to an inclusive range and `p/q`
/// is accepted wherever a number is. A preset `experiment` admits only the
/// run keys samples, seed, workers and out.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Throws ConfigError with an actionable message.
void validate_config(const ExperimentConfig& cfg);

struct ResultRow {
  std::string variant;
  double x = 0.0;
  std::optional<double> q;
  double beta = 0.0;
  double theta = 0.0;
  double zeta = 0.0;
  double alpha_or_gamma = 0.0;
  std::optional<double> empirical;
  /// Empty when no asymptote applies (beta = 0).
  std::optional<double> asymptotic;
  std::optional<double> ratio;  // asymptotic / empirical
  std::optional<double> std_error;
  std::int64_t hits = 0;
  bool no_hits = false;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  int plans = 0;
  double wall_seconds = 0.0;
};

/// One simulation per (margin variant, theta); every beta and threshold of a
/// variant is read from that one sample pool. All plans use the configured seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kCsvHeader =
    "variant,x,q,beta,theta,zeta,alpha_or_gamma,empirical,asymptotic,ratio,std_error,hits,no_hits_flag";

/// CSV with LF endings and 17 significant digits; no-hits cells are empty.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string format_csv(const std::vector<ResultRow>& rows);

/// JSON run metadata: seed, N, versions, wall time, pooling policy.
std::string format_metadata(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace fgmtail
