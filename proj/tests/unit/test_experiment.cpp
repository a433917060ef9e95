#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fgmtail/errors.hpp"
#include "fgmtail/experiment.hpp"

using namespace fgmtail;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

void check_list(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("table presets pin the published grids") {
    const auto t1 = preset(ExperimentKind::kTable1);
    CHECK(t1.family == MarginFamily::kInverseGaussian);
    CHECK(t1.mu == 1.0);
    CHECK(t1.nu == 1.0);
    check_list(t1.thetas, {0.5});
    check_list(t1.betas, {1.0, 1.5, 2.0});
    CHECK(t1.zeta == doctest::Approx(1.0 / 3));
    check_list(t1.xs, {2.0, 2.1, 2.2, 2.3, 2.4});
    CHECK(t1.n == 3);
    CHECK(t1.k == 1);

    const auto t2 = preset(ExperimentKind::kTable2);
    check_list(t2.thetas, {-1.0, -0.5, 0.0, 0.5, 1.0});
    check_list(t2.betas, {2.0});

    const auto t3 = preset(ExperimentKind::kTable3);
    REQUIRE(t3.g_params.size() == 3);
    CHECK(t3.g_params[1] == std::pair{1.2, 1.44});
    CHECK(t3.g_params[2] == std::pair{1.4, 1.96});

    const auto t4 = preset(ExperimentKind::kTable4);
    CHECK(t4.family == MarginFamily::kPareto);
    check_list(t4.alphas, {2.8});
    CHECK(t4.zeta == 0.0);
    check_list(t4.qs, {0.985, 0.987, 0.989, 0.991, 0.993});
    CHECK(t4.xs.empty());

    check_list(preset(ExperimentKind::kTable5).thetas, {-1.0, -0.5, 0.0, 0.5, 1.0});
    check_list(preset(ExperimentKind::kTable6).alphas, {2.5, 3.0, 3.5});

    const auto fig = preset(ExperimentKind::kFigIg);
    CHECK(fig.xs.size() == 21);
    CHECK(fig.xs.back() == doctest::Approx(6.0));
    const auto figp = preset(ExperimentKind::kFigPareto);
    CHECK(figp.qs.size() == 16);
    CHECK(figp.zeta == doctest::Approx(1.0 / 3));
    for (auto k : {ExperimentKind::kTable1, ExperimentKind::kTable2, ExperimentKind::kTable3, ExperimentKind::kTable4,
                   ExperimentKind::kTable5, ExperimentKind::kTable6, ExperimentKind::kFigIg, ExperimentKind::kFigPareto})
      CHECK_NOTHROW(validate_config(preset(k)));
  }

  TEST_CASE("parser") {
    const auto c = parse(
        "# comment\nexperiment = custom\nfamily = pareto\nalpha = 2.8, 3\ntheta = -1:1:0.5\nbeta = 1/2, 2\n"
        "zeta = 1/3\nq = 0.98, 0.99\nn = 4\nk = 2\nsamples = 1000\nseed = 7\nout = a.csv\n");
    CHECK(c.family == MarginFamily::kPareto);
    check_list(c.alphas, {2.8, 3.0});
    check_list(c.thetas, {-1.0, -0.5, 0.0, 0.5, 1.0});
    check_list(c.betas, {0.5, 2.0});
    CHECK(c.zeta == doctest::Approx(1.0 / 3));
    CHECK(c.xs.empty());
    CHECK(c.n == 4);
    CHECK(c.k == 2);
    CHECK(c.seed == 7);
    CHECK(c.out == "a.csv");

    const auto p = parse("experiment = table1\nsamples = 5000\nseed = 3\n");
    CHECK(p.kind == ExperimentKind::kTable1);
    CHECK(p.samples == 5000);
    check_list(p.xs, {2.0, 2.1, 2.2, 2.3, 2.4});
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse("experiment = table9\n"), ConfigError);
    CHECK_THROWS_AS(parse("experiment = table1\ntheta = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse("bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("theta = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("x = 1\nq = 0.9\n"), ConfigError);
    CHECK_THROWS_AS(parse("samples = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(validate_config(parse("theta = 1.5\n")), ConfigError);
    CHECK_THROWS_AS(validate_config(parse("family = pareto\nalpha = 2\nbeta = 2\n")), ConfigError);
    CHECK_THROWS_AS(validate_config(parse("zeta = 1\nbeta = 1\n")), ConfigError);
    CHECK_THROWS_AS(validate_config(parse("k = 4\n")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
    auto bad = preset(ExperimentKind::kTable1);
    bad.nu = 2.0;
    CHECK_THROWS_AS(validate_config(bad), ConfigError);
  }

  TEST_CASE("beta zero gives an empirical column of ones") {
    auto c = parse("beta = 0, 1\nx = 2.0, 2.4\nsamples = 50000\nseed = 5\n");
    const auto res = run_experiment(c);
    REQUIRE(res.rows.size() == 4);
    for (const auto& r : res.rows) {
      REQUIRE_FALSE(r.no_hits);
      if (r.beta == 0.0) {
        CHECK(*r.empirical == 1.0);
        CHECK_FALSE(r.asymptotic.has_value());
      } else {
        CHECK(*r.ratio == doctest::Approx(*r.asymptotic / *r.empirical));
      }
    }
  }

  TEST_CASE("csv format and no hits rendering") {
    auto c = parse("family = pareto\nbeta = 1\nq = 0.5, 0.9999999\nsamples = 100\n");
    const auto res = run_experiment(c);
    const std::string csv = format_csv(res.rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    std::getline(in, line);
    CHECK(line.rfind("F=G=Pareto(2.8),", 0) == 0);
    CHECK(line.substr(line.size() - 2) == ",0");
    std::getline(in, line);
    CHECK(line.substr(line.size() - 4) == ",0,1");
    CHECK(line.find(",,,") != std::string::npos);
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(format_metadata(c, res).find("\"no_hits_cells\": 1") != std::string::npos);
  }

  TEST_CASE("variant labels with commas are quoted") {
    auto c = parse("beta = 1\nx = 2.0\nsamples = 1000\n");
    const std::string csv = format_csv(run_experiment(c).rows);
    CHECK(csv.find("\n\"F=IG(1,1);G=IG(1,1)\",2,,1,") != std::string::npos);
  }

  TEST_CASE("same seed gives identical csv") {
    auto c = parse("experiment = table1\nsamples = 40000\nseed = 11\nworkers = 1\n");
    const auto a = format_csv(run_experiment(c).rows);
    c.workers = 2;
    CHECK(format_csv(run_experiment(c).rows) == a);
  }
}
