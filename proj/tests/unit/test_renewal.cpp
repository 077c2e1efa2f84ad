#include <doctest.h>

#include <cmath>

#include "natclock/error.hpp"
#include "natclock/renewal.hpp"

using namespace natclock;

namespace {

std::vector<double> draws(const NonnegDist& d, std::size_t n, std::uint64_t seed) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    Stream s({seed, i, 0});
    v.push_back(d.sample(s));
  }
  return v;
}

// P(T_r > t) = erf(r / sqrt(2t)) for Brownian first passage; solve = 1/2 by bisection.
double bisect_median(double r) {
  double lo = 1e-6, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erf(r / std::sqrt(2.0 * mid)) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("renewal") {
  TEST_CASE("empirical survival") {
    const std::vector<double> s{1, 1, 3};
    const auto c = empirical_survival(s);
    CHECK(c(0.5) == 1.0);
    CHECK(c(1.0) == doctest::Approx(1.0 / 3.0));
    CHECK(c(2.9) == doctest::Approx(1.0 / 3.0));
    CHECK(c(3.0) == 0.0);
    const std::vector<double> same{2, 2, 2, 2};
    const auto one = empirical_survival(same);
    CHECK(one.x.size() == 1);
    CHECK(one(1.9) == 1.0);
    CHECK(one(2.0) == 0.0);
    const std::vector<double> neg{1, -1};
    CHECK_THROWS_AS(empirical_survival(neg), Error);
  }

  TEST_CASE("exponential empirical survival at 1") {
    const std::size_t n = 100000;
    const auto c = empirical_survival(draws(NonnegDist::exponential(1.0), n, 3));
    const double p = std::exp(-1.0);
    CHECK(std::fabs(c(1.0) - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
  }

  TEST_CASE("kaplan meier without censoring is the empirical curve") {
    const auto x = draws(NonnegDist::weibull(2.0), 500, 4);
    const std::vector<char> none(x.size(), 0);
    const auto km = kaplan_meier(x, none);
    const auto emp = empirical_survival(x);
    for (double t : {0.1, 0.5, 1.0, 1.5, 2.5}) CHECK(km(t) == doctest::Approx(emp(t)).epsilon(1e-12));
  }

  TEST_CASE("nbu check") {
    CHECK(nbu_check(empirical_survival(draws(NonnegDist::exponential(1.0), 20000, 5))).holds);
    CHECK(nbu_check(empirical_survival(draws(NonnegDist::uniform(0.0, 1.0), 20000, 6))).holds);
    CHECK_FALSE(nbu_check(empirical_survival(draws(NonnegDist::pareto(2.0), 20000, 7))).holds);

    const std::vector<double> pts{0, 0.5, 1, 1.5, 2, 3};
    const auto tab = tabulate_survival(NonnegDist::pareto(2.0), pts);
    const auto at_one = nbu_check(tab, std::vector<std::pair<double, double>>{{1.0, 1.0}}, 0.0);
    CHECK_FALSE(at_one.holds);
    CHECK(at_one.worst_excess == doctest::Approx(1.0 / 9.0 - 1.0 / 16.0));
  }

  TEST_CASE("stationary renewal") {
    std::vector<double> pts;
    for (int i = 0; i <= 4000; ++i) pts.push_back(i * 0.01);
    const auto f = tabulate_survival(NonnegDist::exponential(1.0), pts);
    const auto g = stationary_renewal(f, 1.0);
    for (double t : {0.0, 0.5, 1.0, 3.0, 10.0}) CHECK(std::fabs(g(t) - f(t)) < 1e-3);

    const std::vector<double> ones{1, 1};
    const auto d = stationary_renewal(empirical_survival(ones), 1.0);
    for (double t : {0.0, 0.25, 0.5, 0.9}) CHECK(d(t) == doctest::Approx(1.0 - t));

    CHECK_THROWS_AS(stationary_renewal(f, std::numeric_limits<double>::infinity()), Error);
  }

  TEST_CASE("survival curves stay monotone in [0, 1]") {
    const auto c = stationary_renewal(empirical_survival(draws(NonnegDist::weibull(0.7), 3000, 8)), 1.2);
    for (std::size_t i = 0; i < c.sbar.size(); ++i) {
      CHECK(c.sbar[i] >= 0.0);
      CHECK(c.sbar[i] <= 1.0);
      if (i) CHECK(c.sbar[i] <= c.sbar[i - 1]);
    }
  }

  TEST_CASE("abs BM passage times are NBU and dominate their stationary law") {
    const auto grid = std::make_shared<const TimeGrid>(make_uniform_grid(20.0, 20001));
    const auto hits = sample_hitting_times(Process{zoo::AbsBM{}}, grid, 1.0, 20000, 9);
    const auto taus = hits.taus();
    const auto f = empirical_survival(taus);
    CHECK(nbu_check(f).holds);
    const auto mu = mean_se(taus).mean;
    const auto g = stationary_renewal(f, mu);
    const double band = 3.0 * dkw_epsilon(taus.size());
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) CHECK(g(t) <= f(t) + band);
  }

  TEST_CASE("renewal function") {
    const auto e = renewal_function({NonnegDist::exponential(1.0), 10.0}, 5.0, 20000, 1);
    CHECK(std::fabs(e.mean - 5.0) <= 4.0 * e.se);
    CHECK(e.report.verdict == Verdict::pass);
    const auto d = renewal_function({NonnegDist::deterministic(1.0), 10.0}, 2.5, 100, 2);
    CHECK(d.mean == 2.0);
    CHECK(d.bound == 2.5);
    const auto p = renewal_function({NonnegDist::pareto(1.0), 10.0}, 5.0, 100, 3);
    CHECK(p.report.verdict == Verdict::not_applicable);
    double last = 0.0;
    for (double t : {1.0, 2.0, 4.0, 8.0}) {
      const auto m = renewal_function({NonnegDist::weibull(1.5), 10.0}, t, 2000, 4);
      CHECK(m.mean >= last);
      last = m.mean;
    }
  }

  TEST_CASE("reflection median") {
    CHECK(reflection_median(1.0) == doctest::Approx(bisect_median(1.0)).epsilon(1e-9));
    CHECK(reflection_median(2.0) == doctest::Approx(bisect_median(2.0)).epsilon(1e-9));
    CHECK(reflection_median(1.0) == doctest::Approx(2.198).epsilon(1e-3));
  }
}
