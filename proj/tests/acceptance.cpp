// Acceptance checks, one PASS/FAIL line per criterion. Runs all by default, one with --criterion N.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgmtail/copula.hpp"
#include "fgmtail/errors.hpp"
#include "fgmtail/experiment.hpp"
#include "fgmtail/montecarlo.hpp"
#include "fgmtail/oracle.hpp"
#include "fgmtail/tail_math.hpp"

using namespace fgmtail;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> notes;  // printed under the verdict line

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("violated: " + what);
    }
  }
  void note(std::string s) { notes.push_back(std::move(s)); }
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::uint64_t kSeed = 20240917;
const std::array<double, 5> kThetas{-1.0, -0.5, 0.0, 0.5, 1.0};

void coefficient_identities(Outcome& o) {
  const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
  const std::array<HatValues, 2> hats{HatValues::ones(), HatValues::from_margins(ig, ig, 0.5)};
  double worst = 0.0;
  for (const auto& h : hats)
    for (int n = 1; n <= 6; ++n)
      for (double t : kThetas) {
        const double a = k_coefficient_iterative(n, t, h), b = k_coefficient_sum(n, t, h);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
  o.require(worst <= 1e-10, "sum and iterative routes agree to 1e-10 relative");
  bool closed = true;
  for (int n = 1; n <= 8; ++n)
    for (double t : kThetas) closed = closed && k_coefficient_iterative(n, t, HatValues::ones()) == n * (n + t);
  o.require(closed, "K(n,theta,0) = n(n+theta) exactly for n <= 8");
  const double degenerate = k_coefficient_iterative(1, -1.0, HatValues::ones());
  o.require(degenerate == 0.0 && k_coefficient_sum(1, -1.0, HatValues::ones()) == 0.0, "K(1,-1,0) = 0");
  o.summary = fmt("dual-route max rel diff %.2e; K(n,theta,0)=n(n+theta) %s; K(1,-1,0)=%g", worst,
                  closed ? "exact" : "inexact", degenerate);
}

void polynomial_identity(Outcome& o) {
  // Random points can land near a root of f, where |f^n| is far below the size
  // of the individual terms and any floating-point sum cancels. The error is
  // therefore measured against the sum of absolute terms; the plain relative
  // error against f^n is reported alongside.
  std::mt19937_64 gen(kSeed);
  std::uniform_real_distribution<double> point(0.5, 2.0), theta(-1.0, 1.0);
  double worst = 0.0, worst_plain = 0.0, min_abs_f = 1e300;
  for (int i = 0; i < 100; ++i) {
    const double u = point(gen), v = point(gen), s = point(gen), t = point(gen), th = theta(gen);
    min_abs_f = std::min(min_abs_f, std::abs(f_poly(u, v, s, t, th)));
    for (int n = 1; n <= 6; ++n) {
      std::vector<double> parts;
      double scale = 0.0;
      for (const auto& term : expansion_terms(n, th)) {
        const auto& c = term.parts;
        parts.push_back(term.coeff_a * std::pow(u, c.x_full()) * std::pow(s, c.x_min()) * std::pow(v, c.y_full()) *
                        std::pow(t, c.y_min()));
        scale += std::abs(parts.back());
      }
      const double rhs = std::pow(f_poly(u, v, s, t, th), n);
      const double err = std::abs(ordered_sum(parts) - rhs);
      worst = std::max(worst, err / scale);
      worst_plain = std::max(worst_plain, err / std::abs(rhs));
    }
  }
  o.require(worst <= 1e-9, "error relative to the term scale <= 1e-9");
  o.summary = fmt("100 points, n<=6, max err/sum|terms| %.2e (max err/|f^n| %.2e, min |f| %.1e)", worst, worst_plain,
                  min_abs_f);
}

void expansion_n1(Outcome& o) {
  const Margin f = Margin::inverse_gaussian(1.0, 1.0);
  const Margin g = Margin::shifted_pareto(2.8);
  auto composite = [](const Margin& m) {
    return [m](int full, int, double x) { return full == 1 ? m.sf(x) : m.sf(x) * m.sf(x); };
  };
  double worst = 0.0;
  for (double theta : {-1.0, 0.0, 1.0}) {
    const FgmModel model(f, g, theta);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        const double x = f.quantile((i + 0.5) / 50.0), y = g.quantile((j + 0.5) / 50.0);
        const double got = joint_tail_expansion(1, theta, x, y, composite(f), composite(g));
        worst = std::max(worst, std::abs(got - model.joint_sf(x, y)));
      }
  }
  o.require(worst <= 1e-12, "|expansion - joint_sf| <= 1e-12");
  o.summary = fmt("50x50 grid, theta in {-1,0,1}, max abs err %.2e", worst);
}

void two_route(Outcome& o) {
  const Margin p = Margin::shifted_pareto(2.8);
  const FgmModel model(p, p, 0.5);
  const double x = p.quantile(0.99);
  constexpr std::int64_t kN = 10'000'000;
  const SimulationPlan plan{.n = 3, .k = 1, .model = model, .samples = kN, .seed = kSeed};
  const auto direct = estimate_joint_tail(plan, x, x);
  const auto expansion = estimate_joint_tail_by_expansion(model, 3, x, x, kN, kSeed);
  const double se = std::hypot(direct.std_error, expansion.std_error);
  const double z = std::abs(*direct.estimate - expansion.value) / se;
  o.require(z <= 4.0, "routes within 4 combined standard errors");
  o.summary = fmt("direct %.6e (se %.2e), expansion %.6e (se %.2e), |diff|/se = %.2f", *direct.estimate,
                  direct.std_error, expansion.value, expansion.std_error, z);
}

void ratio_band(Outcome& o, const ExperimentResult& res, double beta, double lo, double hi, int& inside, int& total) {
  for (const auto& r : res.rows) {
    if (r.beta != beta) continue;
    ++total;
    const bool ok = r.ratio && *r.ratio >= lo && *r.ratio <= hi;
    inside += ok ? 1 : 0;
    const std::string where = r.q ? fmt("q=%.3f", *r.q) : fmt("x=%.1f", r.x);
    o.note(fmt("beta=%.1f %s ratio=%s %s", beta, where.c_str(), r.ratio ? fmt("%.4f", *r.ratio).c_str() : "none",
               ok ? "in band" : "OUT of band"));
    o.require(ok, fmt("beta=%.1f %s ratio in [%.2f, %.2f]", beta, where.c_str(), lo, hi));
  }
}

void table1(Outcome& o) {
  auto cfg = preset(ExperimentKind::kTable1);
  cfg.samples = 1'000'000;
  cfg.seed = kSeed;
  const auto res = run_experiment(cfg);
  int inside = 0, total = 0;
  for (double b : {1.0, 1.5, 2.0}) ratio_band(o, res, b, 0.90, 1.10, inside, total);
  o.summary = fmt("%d/%d cells with asymptotic/empirical in [0.90, 1.10]", inside, total);
}

void table4(Outcome& o) {
  auto cfg = preset(ExperimentKind::kTable4);
  cfg.samples = 1'000'000;
  cfg.seed = kSeed;
  const auto res = run_experiment(cfg);
  int in1 = 0, n1 = 0, in2 = 0, n2 = 0;
  ratio_band(o, res, 1.0, 0.80, 1.20, in1, n1);
  ratio_band(o, res, 2.0, 0.70, 1.30, in2, n2);
  o.summary = fmt("beta=1: %d/%d in [0.80, 1.20]; beta=2: %d/%d in [0.70, 1.30]", in1, n1, in2, n2);
}

void lemma_joint_tail(Outcome& o) {
  const Margin p = Margin::shifted_pareto(2.8);
  const double x = p.quantile(0.995);
  const SimulationPlan plan{.n = 3, .k = 1, .model = FgmModel(p, p, 0.5), .samples = 10'000'000, .seed = kSeed};
  const auto est = estimate_joint_tail(plan, x, x);
  const double k = k_coefficient_iterative(3, 0.5, HatValues::ones());
  const double ratio = *est.estimate / (p.sf(x) * p.sf(x));
  o.require(ratio >= 0.7 * k && ratio <= 1.3 * k, "P(S3>x,T3>y)/(sfF sfG) in [0.7, 1.3] K");
  o.summary = fmt("P/(sfF sfG) = %.3f (se %.3f), K = %.1f, band [%.2f, %.2f]", ratio,
                  est.std_error / (p.sf(x) * p.sf(x)), k, 0.7 * k, 1.3 * k);
}

void lemma_component(Outcome& o) {
  const Margin p = Margin::shifted_pareto(2.8);
  const double x = p.quantile(0.995);
  const SimulationPlan plan{.n = 3, .k = 1, .model = FgmModel(p, p, 0.5), .samples = 10'000'000, .seed = kSeed};
  const auto third = estimate_component_ratio(plan, 1.0 / 3.0, x, x);
  const auto two_thirds = estimate_component_ratio(plan, 2.0 / 3.0, x, x);
  const double r1 = *third.estimate, r2 = *two_thirds.estimate;
  const double z = std::abs(r1 - r2) / std::hypot(third.std_error, two_thirds.std_error);
  o.require(r1 >= 0.25 && r1 <= 0.42, "ratio at u=1/3 in [0.25, 0.42]");
  o.require(z <= 4.0, "u=1/3 and u=2/3 within 4 combined standard errors");
  o.summary = fmt("u=1/3: %.4f (se %.4f); u=2/3: %.4f (se %.4f); |diff|/se = %.1f", r1, third.std_error, r2,
                  two_thirds.std_error, z);
}

void convolution_oracle(Outcome& o) {
  const auto pareto = oracle::nfold_convergence(Margin::shifted_pareto(2.8), 2, 2.0);
  o.require(pareto.relative_error() <= 0.10, "Pareto two-fold ratio within 10% of 2");
  o.require(pareto.refinement_change < 0.02, "Pareto refinement change < 2%");
  const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
  const double target = 2.0 * ig.mgf_hat(0.5);
  const auto igr = oracle::nfold_convergence(ig, 2, target);
  o.require(igr.relative_error() <= 0.15, "IG two-fold ratio within 15% of 2e");
  o.require(igr.monotone_toward_target, "IG ratio moves monotonically toward 2e over three probes");
  o.require(igr.refinement_change < 0.02, "IG refinement change < 2%");
  o.summary = fmt("Pareto x=%.0f ratio %.5f (target 2, refine %.1e); IG x=%.1f ratio %.5f (target %.5f, refine %.1e)",
                  pareto.probe.x, pareto.probe.ratio, pareto.refinement_change, igr.probe.x, igr.probe.ratio, target,
                  igr.refinement_change);
  o.note(fmt("IG trend: x=%.1f %.5f, x=%.1f %.5f, x=%.1f %.5f", igr.trend[0].x, igr.trend[0].ratio, igr.trend[1].x,
             igr.trend[1].ratio, igr.trend[2].x, igr.trend[2].ratio));
}

void theorem_constants(Outcome& o) {
  const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
  const double a = 2.8;
  const Margin p = Margin::shifted_pareto(a);
  const double x = 7.3, beta = 1.7;
  const int n = 3;
  const double xb = std::pow(x, beta);
  o.require(asym_rho({x, x, beta, 0.4, 1, n}, ig, ig, 0.5) == xb, "S(gamma), 0<zeta<1: x^beta");
  o.require(asym_rho({x, x, beta, 0.0, 1, n}, ig, ig, 0.5) == xb / n, "S(gamma), zeta=0: x^beta/n");
  o.require(asym_rho({x, x, beta, 1.0, 1, n}, p, p, 0.5) == a / (a - beta) * xb, "RV, 0<zeta<=1: a/(a-b) x^beta");
  o.require(asym_rho({x, x, beta, 0.0, 1, n}, p, p, 0.5) == a / (a - beta) * xb / n, "RV, zeta=0: a/(a-b) x^beta/n");
  bool invariant = true;
  for (int i = -10; i <= 10; ++i) {
    const double th = 0.1 * i;
    invariant = invariant && asym_rho({x, x, beta, 0.4, 1, n}, ig, ig, th) == xb &&
                asym_rho({x, x, beta, 0.0, 1, n}, p, p, th) == asym_rho({x, x, beta, 0.0, 1, n}, p, p, 0.0);
  }
  o.require(invariant, "value identical for every theta in [-1, 1]");
  bool rejected = false;
  try {
    asym_rho({x, x, a, 0.5, 1, n}, p, p, 0.5);
  } catch (const DomainError&) {
    rejected = true;
  }
  o.require(rejected, "beta >= alpha rejected");
  o.summary = "four branches exact, theta-invariant, beta >= alpha rejected";
}

void determinism(Outcome& o) {
  auto cfg = preset(ExperimentKind::kTable1);
  cfg.samples = 1'000'000;
  cfg.seed = kSeed;
  cfg.workers = 1;
  const std::string a = format_csv(run_experiment(cfg).rows);
  cfg.workers = 2;
  const std::string b = format_csv(run_experiment(cfg).rows);
  o.require(a == b, "byte-identical CSV for workers=1 and workers=2");
  o.summary = fmt("%zu-byte CSV, identical across worker counts: %s", a.size(), a == b ? "yes" : "no");
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "coefficient identities", 1.0, coefficient_identities},
      {2, "polynomial identity", 1.0, polynomial_identity},
      {3, "expansion exactness at n=1", 1.0, expansion_n1},
      {4, "two-route Monte Carlo equivalence at n=3", 120.0, two_route},
      {5, "table1 reproduction", 60.0, table1},
      {6, "table4 regime reproduction", 60.0, table4},
      {7, "joint tail constant at desk scale", 60.0, lemma_joint_tail},
      {8, "component ratio at desk scale", 120.0, lemma_component},
      {9, "convolution oracle", 60.0, convolution_oracle},
      {10, "theorem constants", 1.0, theorem_constants},
      {11, "determinism", 120.0, determinism},
  };
  return all;
}

bool run_one(const Criterion& c) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.summary = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < c.budget_seconds, fmt("runtime under %.0f s", c.budget_seconds));
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.summary
            << fmt(" [%.2f s]", secs) << std::endl;
  for (const auto& n : o.notes) std::cout << "    " << n << '\n';
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  bool all_pass = true;
  for (const auto& c : criteria())
    if (only == 0 || c.id == only) all_pass = run_one(c) && all_pass;
  return all_pass ? 0 : 1;
}
