// SPDX-License-Identifier: Apache-2.0
#include "natclock/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "natclock/error.hpp"
#include "natclock/format.hpp"

namespace natclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ProcessFlags flags_for(const ProcessSpec& spec) {
  ProcessFlags f;
  std::visit(overloaded{
                 [&](const zoo::Ramp&) {
                   f = {true, true, true, true, true, false, false, "deterministic clock, T_r = r/slope"};
                 },
                 [&](const zoo::SharpIndicator&) {
                   f = {true, false, false, true, false, true, false,
                        "sharpness witness: E[a(T_r)] = r/2 exactly"};
                 },
                 [&](const zoo::LinearRandomSlope&) {
                   f = {true, true, false, true, false, false, false,
                        "no control after T_r; E[a(T_r)] may be unbounded"};
                 },
                 [&](const zoo::BrownianMotion&) {
                   f = {false, true, true, true, false, false, true, "signed; use a path transform for crossings"};
                 },
                 [&](const zoo::AbsBM&) {
                   f = {true, true, true, true, true, false, true, "E[T_r] = r^2; kappa(t) = sqrt(2t/pi)"};
                 },
                 [&](const zoo::SquaredBM&) {
                   f = {true, true, true, true, true, false, true, "eta(t) = t; E[T_{r^2}] = r^2"};
                 },
                 [&](const zoo::AbsW2MinusT&) {
                   f = {true, true, false, true, false, false, true,
                        "time-inhomogeneous submartingale; eta(t) = sqrt(8/(pi e)) t"};
                 },
                 [&](const zoo::PositivePartBM&) {
                   f = {true, true, false, true, false, false, true,
                        "markov=false: not a Markov process; T_r has infinite mean, upper bounds do not apply"};
                 },
                 [&](const zoo::BesselMax3D& b) {
                   f = {true, true, b.d == 1, true, true, false, true,
                        b.d == 1 ? "3-d Bessel radius" : "max of radii is not Markov; increment condition still holds"};
                 },
                 [&](const zoo::RenewalCount& rc) {
                   const bool poisson = rc.interarrival.family() == NonnegDist::Family::exponential;
                   f = {true, false, poisson, true, false, false, false, "counting process, jumps of size 1"};
                 },
             },
             spec);
  return f;
}

void validate(const ProcessSpec& spec) {
  std::visit(overloaded{
                 [](const zoo::Ramp& p) { require(p.slope > 0.0 && std::isfinite(p.slope), "ramp slope must be positive"); },
                 [](const zoo::SharpIndicator& p) { require(p.r > 0.0 && std::isfinite(p.r), "sharpindicator r must be positive"); },
                 [](const zoo::BesselMax3D& p) { require(p.d >= 1, "besselmax3d needs d >= 1"); },
                 [](const auto&) {},
             },
             spec);
}

// Brownian-driven variants share one coordinate stream.
template <class Transform>
std::size_t brownian(const TimeGrid& grid, StreamKey key, std::span<double> out, std::optional<double> stop,
                     Transform f) {
  Stream s(key);
  double w = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t > prev_t) w += std::sqrt(t - prev_t) * s.normal();
    prev_t = t;
    out[i] = f(w, t);
    if (stop && out[i] >= *stop) return i + 1;
  }
  return grid.size();
}

std::size_t bessel_max(int d, const TimeGrid& grid, StreamKey key, std::span<double> out,
                       std::optional<double> stop) {
  const std::size_t n_coord = 3 * static_cast<std::size_t>(d);
  std::vector<Stream> streams;
  streams.reserve(n_coord);
  for (std::size_t c = 0; c < n_coord; ++c) streams.emplace_back(StreamKey{key.master_seed, key.path_index, c});
  std::vector<double> x(n_coord, 0.0);
  double prev_t = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    double best = 0.0;
    if (t > prev_t) {
      const double sd = std::sqrt(t - prev_t);
      for (std::size_t c = 0; c < n_coord; ++c) x[c] += sd * streams[c].normal();
    }
    for (std::size_t j = 0; j < n_coord; j += 3) best = std::max(best, x[j] * x[j] + x[j + 1] * x[j + 1] + x[j + 2] * x[j + 2]);
    prev_t = t;
    out[i] = std::sqrt(best);
    if (stop && out[i] >= *stop) return i + 1;
  }
  return grid.size();
}

// ---- parser ----

struct Args {
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;

  double num(const std::string& key, double fallback) const {
    auto it = named.find(key);
    return it == named.end() ? fallback : parse_double(it->second, key);
  }
  void only(std::initializer_list<const char*> allowed, const std::string& ctx) const {
    for (const auto& [k, v] : named) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
        fail(Errc::invalid_argument, "unknown parameter '" + k + "' for " + ctx);
    }
  }
};

NonnegDist parse_dist(const Args& args, const std::string& ctx) {
  const std::string family = args.positional.empty() ? "exp" : args.positional[0];
  require(args.positional.size() <= 1, "too many positional arguments for " + ctx);
  if (family == "exp" || family == "exponential") {
    args.only({"rate"}, ctx);
    return NonnegDist::exponential(args.num("rate", 1.0));
  }
  if (family == "det" || family == "deterministic") {
    args.only({"value"}, ctx);
    return NonnegDist::deterministic(args.num("value", 1.0));
  }
  if (family == "uniform") {
    args.only({"lo", "hi"}, ctx);
    return NonnegDist::uniform(args.num("lo", 0.0), args.num("hi", 1.0));
  }
  if (family == "pareto") {
    args.only({"alpha", "scale"}, ctx);
    return NonnegDist::pareto(args.num("alpha", 2.0), args.num("scale", 1.0));
  }
  if (family == "weibull") {
    args.only({"shape", "scale"}, ctx);
    return NonnegDist::weibull(args.num("shape", 1.0), args.num("scale", 1.0));
  }
  fail(Errc::unsupported, "unknown distribution family '" + family + "' in " + ctx);
}

}  // namespace

Process::Process(ProcessSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  flags_ = flags_for(spec_);
}

std::string Process::name() const {
  static const char* const names[] = {"ramp",      "sharpindicator", "linslope",       "bm",          "absbm",
                                      "squaredbm", "absw2minust",    "positivepartbm", "besselmax3d", "renewal"};
  return names[spec_.index()];
}

std::string Process::describe() const {
  return std::visit(overloaded{
                        [&](const zoo::Ramp& p) { return name() + "(slope=" + format_double(p.slope) + ")"; },
                        [&](const zoo::SharpIndicator& p) { return name() + "(r=" + format_double(p.r) + ")"; },
                        [&](const zoo::LinearRandomSlope& p) { return name() + "(" + p.y.describe() + ")"; },
                        [&](const zoo::BesselMax3D& p) { return name() + "(d=" + std::to_string(p.d) + ")"; },
                        [&](const zoo::RenewalCount& p) { return name() + "(" + p.interarrival.describe() + ")"; },
                        [&](const auto&) { return name(); },
                    },
                    spec_);
}

std::size_t Process::substreams() const noexcept {
  if (const auto* b = as<zoo::BesselMax3D>()) return 3 * static_cast<std::size_t>(b->d);
  return 1;
}

Process parse_process(const std::string& text) {
  const std::string s = to_lower(trim(text));
  const auto open = s.find('(');
  const std::string name = trim(s.substr(0, open));
  Args args;
  if (open != std::string::npos) {
    if (s.back() != ')') fail(Errc::invalid_argument, "missing ')' in process spec '" + text + "'");
    const std::string body = s.substr(open + 1, s.size() - open - 2);
    if (!trim(body).empty()) {
      for (const auto& tok : split(body, ',')) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
          if (!args.named.empty()) fail(Errc::invalid_argument, "positional argument after key=value in '" + text + "'");
          args.positional.push_back(trim(tok));
        } else {
          args.named[trim(tok.substr(0, eq))] = trim(tok.substr(eq + 1));
        }
      }
    }
  }
  const auto no_args = [&](ProcessSpec spec) {
    if (!args.positional.empty() || !args.named.empty())
      fail(Errc::invalid_argument, "process '" + name + "' takes no parameters");
    return Process(std::move(spec));
  };
  if (name == "ramp") {
    args.only({"slope"}, name);
    return Process(zoo::Ramp{args.num("slope", 1.0)});
  }
  if (name == "sharpindicator" || name == "sharp") {
    args.only({"r"}, name);
    return Process(zoo::SharpIndicator{args.num("r", 1.0)});
  }
  if (name == "linslope" || name == "linearrandomslope") return Process(zoo::LinearRandomSlope{parse_dist(args, name)});
  if (name == "bm" || name == "brownianmotion") return no_args(zoo::BrownianMotion{});
  if (name == "absbm") return no_args(zoo::AbsBM{});
  if (name == "squaredbm") return no_args(zoo::SquaredBM{});
  if (name == "absw2minust") return no_args(zoo::AbsW2MinusT{});
  if (name == "positivepartbm" || name == "wplus") return no_args(zoo::PositivePartBM{});
  if (name == "besselmax3d") {
    args.only({"d"}, name);
    const long long d = args.named.count("d") ? parse_int(args.named.at("d"), "d") : 1;
    require(d >= 1 && d <= 100000, "besselmax3d needs d >= 1");
    return Process(zoo::BesselMax3D{static_cast<int>(d)});
  }
  if (name == "renewal" || name == "renewalcount") return Process(zoo::RenewalCount{parse_dist(args, name)});
  fail(Errc::unsupported, "unknown process '" + name + "'");
}

std::vector<Process> zoo_catalog() {
  return {Process(zoo::Ramp{1.0}),       Process(zoo::SharpIndicator{1.0}), Process(zoo::LinearRandomSlope{}),
          Process(zoo::BrownianMotion{}), Process(zoo::AbsBM{}),             Process(zoo::SquaredBM{}),
          Process(zoo::AbsW2MinusT{}),    Process(zoo::PositivePartBM{}),    Process(zoo::BesselMax3D{1}),
          Process(zoo::RenewalCount{})};
}

std::size_t generate_path(const Process& process, const TimeGrid& grid, StreamKey key, std::span<double> out,
                          std::optional<double> stop) {
  require(out.size() == grid.size(), "output buffer must match the grid");
  const auto times = grid.times();
  const auto deterministic_fill = [&](auto value_at) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      out[i] = value_at(times[i]);
      if (stop && out[i] >= *stop) return i + 1;
    }
    return times.size();
  };
  return std::visit(
      overloaded{
          [&](const zoo::Ramp& p) { return deterministic_fill([&](double t) { return p.slope * t; }); },
          [&](const zoo::SharpIndicator& p) {
            Stream s(key);
            const double u = s.uniform();
            return deterministic_fill([&](double t) { return t >= u ? p.r : 0.0; });
          },
          [&](const zoo::LinearRandomSlope& p) {
            Stream s(key);
            const double y = p.y.sample(s);
            return deterministic_fill([&](double t) { return t * y; });
          },
          [&](const zoo::BrownianMotion&) { return brownian(grid, key, out, stop, [](double w, double) { return w; }); },
          [&](const zoo::AbsBM&) { return brownian(grid, key, out, stop, [](double w, double) { return std::fabs(w); }); },
          [&](const zoo::SquaredBM&) { return brownian(grid, key, out, stop, [](double w, double) { return w * w; }); },
          [&](const zoo::AbsW2MinusT&) {
            return brownian(grid, key, out, stop, [](double w, double t) { return std::fabs(w * w - t); });
          },
          [&](const zoo::PositivePartBM&) {
            return brownian(grid, key, out, stop, [](double w, double) { return std::max(0.0, w); });
          },
          [&](const zoo::BesselMax3D& p) { return bessel_max(p.d, grid, key, out, stop); },
          [&](const zoo::RenewalCount& p) {
            Stream s(key);
            double next = p.interarrival.sample(s);
            double count = 0.0;
            return deterministic_fill([&](double t) {
              while (next <= t) {
                count += 1.0;
                next += p.interarrival.sample(s);
              }
              return count;
            });
          },
      },
      process.spec());
}

SamplePath sample_path(const Process& process, std::shared_ptr<const TimeGrid> grid, StreamKey key) {
  require(grid != nullptr, "sample_path needs a grid");
  std::vector<double> values(grid->size());
  generate_path(process, *grid, key, values);
  return SamplePath(std::move(grid), std::move(values));
}

const char* curve_kind_name(CurveKind kind) noexcept {
  switch (kind) {
    case CurveKind::a: return "a";
    case CurveKind::kappa: return "kappa";
    case CurveKind::eta: return "eta";
    case CurveKind::mean_T: return "mean_T";
  }
  return "?";
}

std::optional<ClosedForm> exact_curve(const Process& process, CurveKind kind) {
  using std::numbers::pi;
  const bool mean_t = kind == CurveKind::mean_T;
  const bool envelope = kind == CurveKind::a;
  const auto make = [&](std::function<double(double)> fn, std::string note) {
    return std::optional<ClosedForm>(ClosedForm{kind, std::move(fn), std::move(note)});
  };
  return std::visit(
      overloaded{
          [&](const zoo::Ramp& p) -> std::optional<ClosedForm> {
            const double s = p.slope;
            if (mean_t) return make([s](double r) { return r / s; }, "T_r = r/slope");
            return make([s](double t) { return s * t; }, "deterministic path");
          },
          [&](const zoo::SharpIndicator& p) -> std::optional<ClosedForm> {
            const double r0 = p.r;
            if (mean_t) return make([r0](double r) { return r > 0 && r <= r0 ? 0.5 : kInf; }, "T_r = U");
            return make([r0](double t) { return r0 * std::clamp(t, 0.0, 1.0); }, "r P(U <= t)");
          },
          [&](const zoo::LinearRandomSlope& p) -> std::optional<ClosedForm> {
            if (mean_t) {
              if (p.y.family() != NonnegDist::Family::exponential && p.y.family() != NonnegDist::Family::deterministic)
                return std::nullopt;
              const double inv = p.y.mean_inverse();
              return make([inv](double r) { return r * inv; }, "E[T_r] = r E[1/Y]");
            }
            if (!p.y.has_finite_mean()) return std::nullopt;
            const double m = p.y.mean();
            return make([m](double t) { return t * m; }, "a(t) = t E[Y]");
          },
          [&](const zoo::BrownianMotion&) -> std::optional<ClosedForm> {
            if (kind == CurveKind::kappa) return make([](double) { return 0.0; }, "E[W_t] = 0");
            if (kind == CurveKind::eta) return make([](double t) { return std::sqrt(t / (2 * pi)); }, "E[W_t^+]");
            if (mean_t) return make([](double) { return kInf; }, "one-sided Brownian passage has infinite mean");
            return std::nullopt;
          },
          [&](const zoo::AbsBM&) -> std::optional<ClosedForm> {
            if (envelope) return std::nullopt;  // a(t) = c sqrt(2t/pi) with c unknown here
            if (mean_t) return make([](double r) { return r * r; }, "E[T_r] = r^2");
            return make([](double t) { return std::sqrt(2 * t / pi); }, "E|W_t| = sqrt(2t/pi)");
          },
          [&](const zoo::SquaredBM&) -> std::optional<ClosedForm> {
            if (envelope) return std::nullopt;
            if (mean_t) return make([](double level) { return level; }, "E[T_{r^2}] = r^2");
            return make([](double t) { return t; }, "E[W_t^2] = t");
          },
          [&](const zoo::AbsW2MinusT&) -> std::optional<ClosedForm> {
            if (envelope || mean_t) return std::nullopt;
            const double c = std::sqrt(8.0 / (pi * std::numbers::e));
            return make([c](double t) { return c * t; }, "E|W_t^2 - t| = sqrt(8/(pi e)) t");
          },
          [&](const zoo::PositivePartBM&) -> std::optional<ClosedForm> {
            if (mean_t) return make([](double) { return kInf; }, "T_r of B_t has infinite mean");
            if (envelope) return std::nullopt;
            return make([](double t) { return std::sqrt(t / (2 * pi)); }, "E[max(0,B_t)] = sqrt(t/(2pi))");
          },
          [&](const zoo::BesselMax3D& p) -> std::optional<ClosedForm> {
            if (p.d != 1 || envelope) return std::nullopt;
            if (mean_t) return make([](double r) { return r * r / 3.0; }, "E[T_r] = r^2/3 for 3-d Brownian motion");
            return make([](double t) { return 2.0 * std::sqrt(2.0 * t / pi); }, "E||B_t|| = 2 sqrt(2t/pi)");
          },
          [&](const zoo::RenewalCount& p) -> std::optional<ClosedForm> {
            const auto& d = p.interarrival;
            if (d.family() == NonnegDist::Family::exponential) {
              const double rate = d.param(0);
              if (mean_t) return make([rate](double level) { return std::ceil(level) / rate; }, "ceil(level) arrivals");
              return make([rate](double t) { return rate * t; }, "Poisson mean");
            }
            if (d.family() == NonnegDist::Family::deterministic) {
              const double v = d.param(0);
              if (mean_t) return make([v](double level) { return std::ceil(level) * v; }, "ceil(level) arrivals");
              return make([v](double t) { return std::floor(t / v); }, "floor(t/v)");
            }
            return std::nullopt;
          },
      },
      process.spec());
}

}  // namespace natclock
