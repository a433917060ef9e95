#include <doctest.h>

#include <cmath>

#include "fgmtail/errors.hpp"
#include "fgmtail/tail_math.hpp"

using namespace fgmtail;

TEST_SUITE("tail_math") {
  TEST_CASE("f_poly") {
    for (double t : {-1.0, 0.3, 1.0}) CHECK(f_poly(1, 1, 1, 1, t) == 1.0);
    CHECK(f_poly(2, 3, 0.4, 0.7, 0.0) == 6.0);
    CHECK(f_poly(2, 3, 1, 1, 1.0) == 8.0);
  }

  TEST_CASE("compositions and coefficients") {
    CHECK(compositions(1).size() == 4);
    CHECK(compositions(3).size() == 20);
    const auto first = compositions(2).front();
    CHECK(first.n1 == 0);
    CHECK(first.n4 == 2);
    for (const auto& term : expansion_terms(2, 0.0)) {
      if (term.parts.n1 == 2) {
        CHECK(term.coeff_a == 1.0);
      } else {
        CHECK(term.coeff_a == 0.0);
      }
    }
    // 3!/(1!1!1!0!) (-1)^2 1.5^1 0.5^2
    for (const auto& term : expansion_terms(3, 0.5))
      if (term.parts.n1 == 1 && term.parts.n2 == 1 && term.parts.n3 == 1) CHECK(term.coeff_a == doctest::Approx(2.25));
  }

  TEST_CASE("K examples") {
    CHECK(k_coefficient_iterative(1, -1.0, HatValues::ones()) == 0.0);
    CHECK(k_coefficient_sum(1, -1.0, HatValues::ones()) == 0.0);
    CHECK(k_coefficient_iterative(3, 0.5, HatValues::ones()) == 10.5);
    CHECK(k_coefficient_sum(3, 0.5, HatValues::ones()) == doctest::Approx(10.5).epsilon(1e-14));
    for (int n = 1; n <= 8; ++n)
      for (double t : {-1.0, -0.5, 0.0, 0.5, 1.0}) CHECK(k_coefficient_iterative(n, t, HatValues::ones()) == n * (n + t));
  }

  TEST_CASE("K two routes agree with inverse Gaussian hats") {
    const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
    const auto hats = HatValues::from_margins(ig, ig, 0.5);
    CHECK(hats.hat_f == doctest::Approx(std::exp(1.0)));
    CHECK(hats.hat_f > hats.hat_f_min);
    CHECK(hats.hat_f_min > 0.0);
    for (int n = 1; n <= 6; ++n)
      for (double t : {-1.0, -0.7, -0.5, 0.0, 0.5, 1.0}) {
        const double a = k_coefficient_iterative(n, t, hats), b = k_coefficient_sum(n, t, hats);
        CHECK(std::abs(a - b) / std::max(1.0, std::abs(a)) <= 1e-10);
      }
    for (int n = 2; n <= 6; ++n)
      for (int i = -10; i <= 10; ++i) {
        CHECK(k_coefficient_iterative(n, 0.1 * i, hats) > 0.0);
        CHECK(k_coefficient_iterative(n, 0.1 * i, HatValues::ones()) > 0.0);
      }
  }

  TEST_CASE("asym_joint_tail") {
    const Margin p = Margin::shifted_pareto(2.8);
    const double x = p.quantile(0.99);
    const auto a = asym_joint_tail(3, 0.5, p, p, x, x);
    CHECK(a.value == doctest::Approx(10.5 * p.sf(x) * p.sf(x)));
    CHECK_FALSE(a.degenerate);
    const auto d = asym_joint_tail(1, -1.0, p, p, x, x);
    CHECK(d.value == 0.0);
    CHECK(d.degenerate);
    CHECK(asym_joint_tail(2, 0.0, p, p, 2.0, 3.0).value == doctest::Approx(4 * p.sf(2.0) * p.sf(3.0)));
    CHECK_THROWS_AS(asym_joint_tail(2, 0.5, p, Margin::inverse_gaussian(1, 1), x, x), ClassMismatchError);
  }

  TEST_CASE("asym_rho branches") {
    const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
    const Margin p = Margin::shifted_pareto(2.8);
    CHECK(asym_rho({2.2, 2.2, 2.0, 1.0 / 3, 1, 3}, ig, ig, 0.5) == std::pow(2.2, 2.0));
    CHECK(asym_rho({2.2, 2.2, 2.0, 1.0 / 3, 1, 3}, ig, ig, 0.5) == doctest::Approx(4.84));
    CHECK(asym_rho({5.0, 5.0, 1.5, 0.0, 1, 3}, ig, ig, 0.5) == std::pow(5.0, 1.5) / 3);
    CHECK(asym_rho({10.0, 10.0, 2.0, 0.0, 1, 3}, p, p, 0.5) == doctest::Approx(116.6666666667));
    CHECK(asym_rho({10.0, 10.0, 2.0, 0.5, 1, 3}, p, p, 0.5) == doctest::Approx(350.0));
    CHECK(asym_rho({10.0, 10.0, 1e-9, 0.5, 1, 3}, p, p, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
    for (int i = -10; i <= 10; ++i)
      CHECK(asym_rho({3.0, 3.0, 1.0, 0.0, 1, 3}, p, p, 0.1 * i) == asym_rho({3.0, 3.0, 1.0, 0.0, 1, 3}, p, p, 0.0));
    CHECK_THROWS_AS(asym_rho({10.0, 10.0, 2.8, 0.0, 1, 3}, p, p, 0.5), DomainError);
    CHECK_THROWS_AS(asym_rho({10.0, 10.0, 1.0, 1.0, 1, 3}, ig, ig, 0.5), UnsupportedBranchError);
    CHECK_THROWS_AS(asym_rho({10.0, 10.0, 1.0, 0.5, 1, 3}, ig, p, 0.5), ClassMismatchError);
  }

  TEST_CASE("asym_component_tail") {
    const Margin ig = Margin::inverse_gaussian(1.0, 1.0);
    const Margin p = Margin::shifted_pareto(2.8);
    CHECK(asym_component_tail(3, 0.5, ig, ig, 0.5, 5.0, 5.0) == asym_component_tail(3, 0.5, ig, ig, 0.9, 5.0, 5.0));
    const double x = 20.0;
    CHECK(asym_component_tail(3, 0.5, p, p, 1.0, x, x) == doctest::Approx(3.5 * p.sf(x) * p.sf(x)));
    const double r = asym_component_tail(3, 0.5, p, p, 2.0, x, x) / asym_component_tail(3, 0.5, p, p, 1.0, x, x);
    CHECK(r == doctest::Approx(p.sf(2 * x) / p.sf(x)));
    CHECK(p.sf(2e6) / p.sf(1e6) == doctest::Approx(std::pow(2.0, -2.8)).epsilon(1e-5));
    CHECK_THROWS_AS(asym_component_tail(1, 0.5, p, p, 0.5, x, x), UnsupportedBranchError);
  }

  TEST_CASE("ordered sum") {
    CHECK(ordered_sum({1e16, 1.0, -1e16, 1.0}) == 2.0);
    CHECK(ordered_sum({}) == 0.0);
  }
}
