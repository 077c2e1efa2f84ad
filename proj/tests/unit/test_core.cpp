#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "natclock/error.hpp"
#include "natclock/format.hpp"
#include "natclock/grid.hpp"
#include "natclock/parallel.hpp"
#include "natclock/path.hpp"
#include "natclock/rng.hpp"

using namespace natclock;

namespace {

std::shared_ptr<const TimeGrid> grid_of(std::vector<double> t) {
  return std::make_shared<const TimeGrid>(std::move(t), GridKind::custom);
}

SamplePath path_of(std::vector<double> t, std::vector<double> v) { return SamplePath(grid_of(std::move(t)), std::move(v)); }

bool throws_code(Errc code, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("philox4x64-10 known answers") {
    // Reference values from numpy.random.Philox(key=0) advancing the counter.
    auto a = philox4x64({1, 0, 0, 0}, {0, 0});
    CHECK(a[0] == 0x02f4ba6408e4d89bULL);
    CHECK(a[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(a[2] == 0x1c8667a55d902e79ULL);
    CHECK(a[3] == 0x907d7a052fd5b4dcULL);
    auto b = philox4x64({2, 0, 0, 0}, {0, 0});
    CHECK(b[0] == 0x809bf322883987c3ULL);
    CHECK(b[1] == 0x471128b9e807f7ddULL);
    CHECK(b[2] == 0xf250ba0dbec065b7ULL);
    CHECK(b[3] == 0xfc6ed66767a457bcULL);
  }

  TEST_CASE("a key replays its sequence") {
    Stream s1({42, 7, 3}), s2({42, 7, 3});
    for (int i = 0; i < 100; ++i) CHECK(s1() == s2());
    Stream n1({42, 7, 3}), n2({42, 7, 3});
    for (int i = 0; i < 50; ++i) CHECK(n1.normal() == n2.normal());
  }

  TEST_CASE("distinct keys give distinct streams") {
    std::set<std::uint64_t> first;
    for (std::uint64_t p = 0; p < 20; ++p)
      for (std::uint64_t s = 0; s < 5; ++s) first.insert(Stream({1, p, s})());
    CHECK(first.size() == 100);
  }

  TEST_CASE("uniform is open and normal has unit moments") {
    Stream s({9, 0, 0});
    Moments u, z;
    for (int i = 0; i < 200000; ++i) {
      const double x = s.uniform();
      REQUIRE(x > 0.0);
      REQUIRE(x < 1.0);
      u.add(x);
      z.add(s.normal());
    }
    CHECK(std::fabs(u.mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 200000));
    CHECK(std::fabs(z.mean) < 4.0 / std::sqrt(200000.0));
    // var of the sample variance of N(0,1) is about 2/n
    CHECK(std::fabs(z.variance() - 1.0) < 4.0 * std::sqrt(2.0 / 200000));
  }

  TEST_CASE("derived seeds are deterministic and spread") {
    CHECK(derive_seed(5, 1, 2) == derive_seed(5, 1, 2));
    CHECK(derive_seed(5, 1, 2) != derive_seed(5, 2, 1));
    CHECK(derive_seed(5, 0) != derive_seed(6, 0));
  }
}

TEST_SUITE("grid") {
  TEST_CASE("uniform grids") {
    auto g = make_uniform_grid(1.0, 5);
    std::vector<double> want{0, 0.25, 0.5, 0.75, 1.0};
    CHECK(std::vector<double>(g.times().begin(), g.times().end()) == want);
    auto m = make_uniform_grid(2.0, 2);
    CHECK(m.size() == 2);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 2.0);
  }

  TEST_CASE("geometric grid prepends zero") {
    auto g = make_geometric_grid(0.01, 1.0, 4);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(0.01));
    CHECK(g[2] == doctest::Approx(0.1));
    CHECK(g[3] == 1.0);
  }

  TEST_CASE("invalid grids") {
    CHECK(throws_code(Errc::invalid_argument, [] { make_uniform_grid(0.0, 5); }));
    CHECK(throws_code(Errc::invalid_argument, [] { make_uniform_grid(1.0, 1); }));
    CHECK(throws_code(Errc::invalid_argument, [] { make_geometric_grid(1.0, 1.0, 4); }));
    CHECK(throws_code(Errc::invalid_argument, [] { TimeGrid({0.0, 1.0, 1.0}, GridKind::custom); }));
    CHECK(throws_code(Errc::invalid_argument, [] { TimeGrid({-1.0, 1.0}, GridKind::custom); }));
  }

  TEST_CASE("parse and describe round trip") {
    for (const char* text : {"uniform:20:40001", "geom:0.001:100:1000", "uniform:1:5"}) {
      const auto g = parse_grid(text);
      CHECK(parse_grid(g.describe()) == g);
    }
    CHECK_THROWS(parse_grid("uniform:1"));
    CHECK_THROWS(parse_grid("spiral:1:2"));
  }
}

TEST_SUITE("path") {
  TEST_CASE("running max") {
    auto p = path_of({0, 1, 2, 3}, {0, 3, 1, 2});
    auto m = running_max(p);
    CHECK(std::vector<double>(m.values().begin(), m.values().end()) == std::vector<double>{0, 3, 3, 3});
    auto inc = path_of({0, 1, 2}, {1, 2, 2});
    auto mi = running_max(inc);
    CHECK(std::vector<double>(mi.values().begin(), mi.values().end()) == std::vector<double>{1, 2, 2});
    const std::vector<double> one{5.0};
    CHECK(running_max(one) == one);
  }

  TEST_CASE("running max is idempotent and dominates") {
    Stream s({3, 0, 0});
    std::vector<double> v(200);
    for (auto& x : v) x = s.normal();
    const auto m = running_max(v);
    CHECK(running_max(m) == m);
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(m[i] >= v[i]);
      if (i) CHECK(m[i] >= m[i - 1]);
    }
  }

  TEST_CASE("first crossing") {
    auto p = path_of({0, 1, 2}, {0, 1, 3});
    auto h = first_crossing(p, 2.0);
    CHECK_FALSE(h.censored);
    CHECK(h.tau == 2.0);
    auto c = first_crossing(p, 5.0);
    CHECK(c.censored);
    CHECK(c.tau == 2.0);
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(1.0, 5));
    auto ramp = SamplePath(g, {0, 0.25, 0.5, 0.75, 1.0});
    CHECK(first_crossing(ramp, 0.5).tau == 0.5);
  }

  TEST_CASE("first crossing ignores running-max preprocessing") {
    Stream s({4, 0, 0});
    auto g = std::make_shared<const TimeGrid>(make_uniform_grid(1.0, 300));
    std::vector<double> v(300);
    double x = 0;
    for (auto& y : v) y = (x += 0.1 * s.normal());
    const SamplePath p(g, v);
    for (double r : {0.1, 0.3, 0.7, 2.0}) {
      const auto a = first_crossing(p, r), b = first_crossing(running_max(p), r);
      CHECK(a.tau == b.tau);
      CHECK(a.censored == b.censored);
    }
  }

  TEST_CASE("asymmetric transform") {
    auto p = path_of({0, 1, 2}, {-1, 0, 2});
    auto t = transform_asymmetric(p, -2, 4);
    CHECK(std::vector<double>(t.values().begin(), t.values().end()) == std::vector<double>{0.5, 0, 0.5});
    auto flat = transform_asymmetric(path_of({0, 1}, {4, 4}), -2, 4);
    CHECK(flat[0] == 1.0);
    CHECK(flat[1] == 1.0);
    auto sym = transform_asymmetric(path_of({0, 1, 2}, {-3, 1.5, 3}), -3, 3);
    CHECK(sym[0] == 1.0);
    CHECK(sym[1] == 0.5);
    CHECK(sym[2] == 1.0);
    CHECK(throws_code(Errc::invalid_argument, [&] { transform_asymmetric(p, 0, 1); }));
    CHECK(throws_code(Errc::invalid_argument, [&] { transform_asymmetric(p, -1, 0); }));
  }

  TEST_CASE("asymmetric transform crossing is the exit time") {
    auto p = path_of({0, 1, 2, 3, 4}, {0, -1, 1.5, -2.5, 0});
    auto h = first_crossing(transform_asymmetric(p, -2, 3), 1.0);
    CHECK(h.tau == 3.0);
  }

  TEST_CASE("moving boundary transform") {
    auto x = path_of({0, 1, 2}, {0, 2, 4});
    auto g = SamplePath(x.grid_ptr(), {1, 2, 4});
    auto y = transform_moving_boundary(x, g);
    CHECK(std::vector<double>(y.values().begin(), y.values().end()) == std::vector<double>{0, 1, 1});
    auto ones = SamplePath(x.grid_ptr(), {1, 1, 1});
    auto id = transform_moving_boundary(x, ones);
    CHECK(std::vector<double>(id.values().begin(), id.values().end()) == std::vector<double>{0, 2, 4});
    auto gx = SamplePath(x.grid_ptr(), {3, 2, 4});
    auto self = transform_moving_boundary(gx, gx);
    for (double v : self.values()) CHECK(v == 1.0);
    auto bad = SamplePath(x.grid_ptr(), {1, 0, 1});
    CHECK(throws_code(Errc::invalid_argument, [&] { transform_moving_boundary(x, bad); }));
    auto other = path_of({0, 1, 3}, {1, 1, 1});
    CHECK(throws_code(Errc::invalid_argument, [&] { transform_moving_boundary(x, other); }));
  }
}

TEST_SUITE("parallel") {
  TEST_CASE("merged moments equal two-pass moments") {
    std::vector<double> xs;
    Stream s({11, 0, 0});
    for (int i = 0; i < 1000; ++i) xs.push_back(3.0 + s.normal());
    std::vector<Moments> parts;
    for (const auto& b : make_blocks(xs.size())) {
      Moments m;
      for (std::size_t i = b.begin; i < b.end; ++i) m.add(xs[i]);
      parts.push_back(m);
    }
    const auto merged = merge_pairwise(parts);
    const auto direct = mean_se(xs);
    CHECK(merged.n == 1000);
    CHECK(merged.mean == doctest::Approx(direct.mean).epsilon(1e-12));
    CHECK(merged.se() == doctest::Approx(direct.se).epsilon(1e-10));
  }

  TEST_CASE("blocks cover the range") {
    for (std::size_t n : {1u, 63u, 64u, 65u, 1000u}) {
      const auto blocks = make_blocks(n);
      CHECK(blocks.size() <= kReductionBlocks);
      std::size_t next = 0;
      for (const auto& b : blocks) {
        CHECK(b.begin == next);
        next = b.end;
      }
      CHECK(next == n);
    }
  }

  TEST_CASE("parallel_for visits each task once and rethrows") {
    std::vector<int> hits(500, 0);
    parallel_for(hits.size(), Exec{4}, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS(parallel_for(10, Exec{3}, [](std::size_t i) {
      if (i == 7) fail(Errc::invalid_argument, "boom");
    }));
  }
}

TEST_SUITE("format") {
  TEST_CASE("shortest round-trip doubles") {
    for (double x : {0.1, 1.0 / 3.0, 2.0, 1e-300, 6.02214076e23})
      CHECK(parse_double(format_double(x), "x") == x);
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  }
}
