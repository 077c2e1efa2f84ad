#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "natclock/bounds.hpp"
#include "natclock/error.hpp"

using namespace natclock;

namespace {

CheckConfig config_for(std::shared_ptr<const TimeGrid> grid, std::size_t n) {
  CheckConfig c;
  c.grid = grid;
  c.envelope_grid = grid;
  c.n_paths = n;
  c.envelope_seed = 11;
  c.hitting_seed = 12;
  return c;
}

BoundReport with(double lhs, double rhs, double se, Relation rel = Relation::le) {
  BoundReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.rhs_se = se;
  r.relation = rel;
  decide(r, 4.0);
  return r;
}

bool has_note(const BoundReport& r, const std::string& needle) {
  return std::any_of(r.notes.begin(), r.notes.end(),
                     [&](const std::string& n) { return n.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("verdict rules") {
    CHECK(with(1.0, 1.5, 0.1).verdict == Verdict::pass);
    CHECK(with(1.0, 1.0, 0.0).verdict == Verdict::pass);
    CHECK(with(1.0, 0.9, 0.1).verdict == Verdict::inconclusive);
    CHECK(with(1.0, 0.5, 0.1).verdict == Verdict::fail);
    CHECK(with(1.0, 0.9, 0.0).verdict == Verdict::fail);
    const auto z = with(1.0, 0.5, 0.1);
    CHECK(z.margin == doctest::Approx(-0.5));
    CHECK(z.z == doctest::Approx(-5.0));
    CHECK(with(1.0, 1.2, 0.1, Relation::eq).verdict == Verdict::pass);
    CHECK(with(1.0, 1.5, 0.1, Relation::eq).verdict == Verdict::fail);
    CHECK(with(1.0, std::nan(""), 0.1).verdict == Verdict::inconclusive);
  }

  TEST_CASE("workbench refuses shared seeds") {
    auto c = config_for(std::make_shared<const TimeGrid>(make_uniform_grid(2.0, 21)), 10);
    c.hitting_seed = c.envelope_seed;
    try {
      Workbench wb(c);
      FAIL("expected decoupling violation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::decoupling_violation);
    }
  }

  TEST_CASE("ramp passes every applicable check") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(4.0, 401));
    Workbench wb(config_for(g, 50));
    const Process ramp{zoo::Ramp{1.0}};
    const double r = 1.0;
    const auto lower = check_lower_EaT(wb, ramp, r);
    CHECK(lower.verdict == Verdict::pass);
    CHECK(lower.rhs == doctest::Approx(1.0));
    const auto concave = check_concave_lower_ET(wb, ramp, r);
    CHECK(concave.verdict == Verdict::pass);
    CHECK(concave.lhs == doctest::Approx(0.5));
    CHECK(check_upper_EaT(wb, ramp, r).verdict == Verdict::pass);
    const auto upper_t = check_upper_ET(wb, ramp, r);
    CHECK(upper_t.verdict == Verdict::pass);
    CHECK(upper_t.rhs == doctest::Approx(2.0));
    for (const auto& s : check_sandwich(wb, ramp, r)) CHECK(s.verdict == Verdict::pass);
    CHECK(check_eta_lower(wb, ramp, r).verdict == Verdict::pass);
    CHECK(check_kappa_upper(wb, ramp, r).verdict == Verdict::pass);
    const double levels[] = {0.5, 1.0, 2.0};
    for (const auto& s : stability_ratio(wb, ramp, levels)) {
      CHECK(s.verdict == Verdict::pass);
      if (s.name == "stability_ratio.upper") CHECK(s.lhs == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  TEST_CASE("sharp indicator sits on the lower bound") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(1.0, 201));
    Workbench wb(config_for(g, 40000));
    const auto rep = check_lower_EaT(wb, Process{zoo::SharpIndicator{1.0}}, 1.0);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(std::fabs(rep.margin) <= 4.0 * rep.rhs_se + 0.005);
    CHECK(has_note(rep, "sharpness"));
    CHECK(rep.relation == Relation::eq);
    // Below its own level the jump overshoots: E[a(T_r)] = 1/2 > r/2, one-sided claim only.
    const auto below = check_lower_EaT(wb, Process{zoo::SharpIndicator{1.0}}, 0.5);
    CHECK(below.relation == Relation::le);
    CHECK(below.verdict == Verdict::pass);
    CHECK(below.rhs == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("positive part BM is never a PASS for the upper bounds") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(50.0, 5001));
    Workbench wb(config_for(g, 500));
    const Process wplus = parse_process("positivepartbm");
    CHECK(check_upper_EaT(wb, wplus, 1.0).verdict == Verdict::not_applicable);
    CHECK(check_upper_ET(wb, wplus, 1.0).verdict == Verdict::not_applicable);
    CHECK(check_kappa_upper(wb, wplus, 1.0).verdict == Verdict::not_applicable);
    CHECK(check_lower_EaT(wb, wplus, 1.0).verdict != Verdict::fail);
  }

  TEST_CASE("linear random slope lower bound with divergence note") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(50.0, 5001));
    Workbench wb(config_for(g, 4000));
    const auto rep = check_lower_EaT(wb, parse_process("linslope(exp,rate=1)"), 1.0);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.rhs > 0.5);
  }

  TEST_CASE("eta bound for squared BM") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(20.0, 4001));
    Workbench wb(config_for(g, 4000));
    const auto rep = check_eta_lower(wb, Process{zoo::SquaredBM{}}, 1.0);
    CHECK(rep.verdict == Verdict::pass);
    CHECK(rep.lhs == doctest::Approx(0.5));
    CHECK(std::fabs(rep.rhs - 1.0) < 0.05 + 4.0 * rep.rhs_se);
    // W is a martingale, so eta(t) = E[W_t^+] applies as well
    CHECK(check_eta_lower(wb, Process{zoo::BrownianMotion{}}, 1.0).verdict == Verdict::pass);
  }

  TEST_CASE("hypothesis violation is noted, not hidden") {
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(20.0, 2001));
    Workbench wb(config_for(g, 500));
    const auto rep = check_lower_EaT(wb, Process{zoo::BrownianMotion{}}, 1.0);
    CHECK(has_note(rep, "hypothesis-violation"));
    CHECK_FALSE(rep.hypotheses.empty());
  }
}

TEST_SUITE("wald") {
  TEST_CASE("gambler's ruin on a +-1 walk") {
    const auto w = wald_decoupling_demo({WalkSpec::Step::rademacher, 1.0}, StoppingRule::barriers(3, 3), 40000, 5);
    // E[T] = a b for symmetric barriers a, b
    CHECK(std::fabs(w.T.mean - 9.0) <= 4.0 * w.T.se);
    CHECK(w.support == std::vector<double>{-3.0, 3.0});
    CHECK(w.support_ok);
    for (const auto& r : w.reports) {
      CAPTURE(r.name);
      CHECK(r.verdict == Verdict::pass);
    }
  }

  TEST_CASE("deterministic steps") {
    const auto w = wald_decoupling_demo({WalkSpec::Step::constant, 1.0}, StoppingRule::fixed(5), 10, 1);
    CHECK(w.T.mean == 5.0);
    CHECK(w.S_T.mean == 5.0);
    CHECK(w.S_T2.mean == 25.0);
    CHECK(w.S_tilde2.mean == 25.0);
  }

  TEST_CASE("non-terminating rules are rejected") {
    StoppingRule never = StoppingRule::barriers(1e9, 1e9);
    never.max_steps = 100;
    try {
      wald_decoupling_demo({WalkSpec::Step::rademacher, 1.0}, never, 100, 1);
      FAIL("expected infinite-mean");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infinite_mean);
    }
  }
}
