#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fgmtail {

enum class ValidationSuite { kCoefficients, kExpansion, kLemmas, kSamplers, kAll };

std::string to_string(ValidationSuite suite);
/// Throws ConfigError for unknown names.
ValidationSuite parse_validation_suite(const std::string& name);

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the named suite. Each finished check is handed to `on_result` as soon
/// as it completes, so long suites report progress.
std::vector<CheckResult> run_validation(ValidationSuite suite,
                                        const std::function<void(const CheckResult&)>& on_result = {});

/// `PASS suite/name detail` or `FAIL suite/name detail`.
std::string format_check(const CheckResult& r);

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and `cdf`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic KS critical value at level 0.01 for sample size n.
double ks_critical_01(std::size_t n);

}  // namespace fgmtail
