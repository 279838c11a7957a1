#include <doctest.h>

#include <cmath>

#include "pdd/sde.hpp"

using namespace pdd;

namespace {

Point p1(double x) {
  Point p(1);
  p << x;
  return p;
}

struct ExitStats {
  double lower_fraction = 0.0;
  double mean_time = 0.0;
  double time_se = 0.0;
};

ExitStats exit_stats(const BoxDomain& domain, double start, double dt, int n, std::uint64_t seed) {
  const auto coeffs = DiffusionCoefficients::brownian(1);
  const RngStream base(seed, {0, 0, 0});
  ExitStats s;
  double sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const auto out = simulate_path(p1(start), kEllipticHorizon, domain, coeffs, {}, dt, base.substream(r, 0));
    if (out.exit.face_id == 0) s.lower_fraction += 1.0;
    s.mean_time += out.exit_time;
    sq += out.exit_time * out.exit_time;
  }
  s.lower_fraction /= n;
  s.mean_time /= n;
  s.time_se = std::sqrt((sq / n - s.mean_time * s.mean_time) / n);
  return s;
}

}  // namespace

TEST_CASE("advance_state applies one Euler step to every component") {
  DiffusionCoefficients coeffs = DiffusionCoefficients::brownian(1, 2.0);
  coeffs.drift = [](const Point&, double) { return p1(0.5); };
  ScalarCoefficients scalars;
  scalars.c = [](const Point& x, double) { return -x[0]; };
  scalars.f = [](const Point&, double t) { return 1.0 + t; };
  PathState s = PathState::at(p1(2.0));
  s.y = 0.5;
  s.t = 1.0;
  const PathState next = advance_state(s, coeffs, scalars, 0.1, p1(0.3));
  CHECK(next.x[0] == doctest::Approx(2.0 + 0.05 + 0.6));
  CHECK(next.y == doctest::Approx(0.5 + (-2.0) * 0.5 * 0.1));
  CHECK(next.z == doctest::Approx(2.0 * 0.5 * 0.1));
  CHECK(next.t == doctest::Approx(1.1));
  CHECK(next.xi == 0.0);
}

TEST_CASE("reflect_state mirrors the overshoot and accounts local time") {
  const BoxDomain domain = BoxDomain::interval(0.0, 1.0, FaceKind::Reflecting, FaceKind::Absorbing);
  ScalarCoefficients scalars;
  scalars.phi_reflect = [](const Point&, double) { return -2.0; };
  scalars.psi_reflect = [](const Point&, double) { return 3.0; };
  PathState s = PathState::at(p1(-0.1));
  const auto event = classify_point(domain, s.x);
  REQUIRE(event.kind == EventKind::Reflecting);
  reflect_state(s, domain, event, scalars);
  CHECK(s.x[0] == doctest::Approx(0.1));
  CHECK(s.xi == doctest::Approx(0.2));
  CHECK(s.z == doctest::Approx(3.0 * 0.2));
  CHECK(s.y == doctest::Approx(1.0 - 2.0 * 0.2));
}

TEST_CASE("elliptic paths need an absorbing face") {
  const BoxDomain domain = BoxDomain::interval(0.0, 1.0, FaceKind::Reflecting, FaceKind::Reflecting);
  const RngStream s(1, {0, 0, 0});
  CHECK_THROWS_AS(
      simulate_path(p1(0.5), kEllipticHorizon, domain, DiffusionCoefficients::brownian(1), {}, 1e-3, s), Error);
  CHECK_THROWS_AS(simulate_path(p1(0.5), 1.0, BoxDomain::interval(0, 1), DiffusionCoefficients::brownian(1), {},
                                -1e-3, s),
                  Error);
}

TEST_CASE("paths are reproducible from their stream") {
  const BoxDomain domain = BoxDomain::interval(0.0, 1.0);
  const auto coeffs = DiffusionCoefficients::brownian(1);
  const RngStream s(3, {1, 2, 3});
  const auto a = simulate_path(p1(0.4), kEllipticHorizon, domain, coeffs, {}, 1e-3, s);
  const auto b = simulate_path(p1(0.4), kEllipticHorizon, domain, coeffs, {}, 1e-3, s);
  CHECK(a.exit_time == b.exit_time);
  CHECK(a.exit.hit_point[0] == b.exit.hit_point[0]);
}

TEST_CASE("survivors stop at the horizon and exits never exceed it") {
  const BoxDomain domain = BoxDomain::interval(-1.0, 1.0);
  const auto coeffs = DiffusionCoefficients::brownian(1);
  const RngStream base(4, {0, 0, 0});
  int survivors = 0;
  for (int r = 0; r < 2000; ++r) {
    const auto out = simulate_path(p1(0.0), 0.3, domain, coeffs, {}, 0.01, base.substream(r, 0));
    CHECK(out.exit_time <= 0.3);
    if (out.exit.kind == EventKind::None) {
      ++survivors;
      CHECK(out.terminal.t == doctest::Approx(0.3));
      CHECK(domain.contains_strictly(out.terminal.x));
    } else {
      CHECK(out.exit.kind == EventKind::Absorbing);
      CHECK(std::abs(out.exit.hit_point[0]) == 1.0);
    }
  }
  CHECK(survivors > 1000);
}

TEST_CASE("gambler's ruin exit probabilities") {
  // P(exit at 0 | start 0.3) = 0.7 for Brownian motion on [0, 1].
  const int n = 20000;
  const auto s = exit_stats(BoxDomain::interval(0.0, 1.0), 0.3, 1e-4, n, 17);
  const double se = std::sqrt(0.7 * 0.3 / n);
  CHECK(std::abs(s.lower_fraction - 0.7) < 4.0 * se + 0.005);
}

TEST_CASE("exit-time bias shrinks like sqrt(dt)") {
  // E[tau] = x (1 - x) for Brownian motion on [0, 1]; discrete monitoring
  // overestimates it by O(sqrt(dt)).
  const double exact = 0.3 * 0.7;
  const auto coarse = exit_stats(BoxDomain::interval(0.0, 1.0), 0.3, 4e-2, 20000, 23);
  const auto fine = exit_stats(BoxDomain::interval(0.0, 1.0), 0.3, 1e-2, 20000, 23);
  const double bias_coarse = coarse.mean_time - exact;
  const double bias_fine = fine.mean_time - exact;
  CHECK(bias_coarse > 0.0);
  CHECK(bias_fine > 0.0);
  const double ratio = bias_coarse / bias_fine;
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.8);
}

TEST_CASE("local time is nondecreasing and paths stay inside") {
  const BoxDomain domain = BoxDomain::interval(0.0, 1.0, FaceKind::Reflecting, FaceKind::Absorbing);
  const auto coeffs = DiffusionCoefficients::brownian(1);
  const RngStream base(29, {0, 0, 0});
  for (int r = 0; r < 200; ++r) {
    double last_xi = 0.0;
    bool monotone = true;
    bool inside = true;
    const auto out = simulate_path(p1(0.2), 2.0, domain, coeffs, {}, 1e-3, base.substream(r, 0),
                                   [&](const PathState& s) {
                                     monotone = monotone && s.xi >= last_xi;
                                     inside = inside && s.x[0] >= 0.0;
                                     last_xi = s.xi;
                                   });
    CHECK(monotone);
    CHECK(inside);
    CHECK(out.terminal.xi >= 0.0);
  }
}

TEST_CASE("reflected exit time matches 1 - x^2") {
  // u'' / 2 = -1, u'(0) = 0, u(1) = 0 gives E[tau] = 1 - x^2.
  const BoxDomain domain = BoxDomain::interval(0.0, 1.0, FaceKind::Reflecting, FaceKind::Absorbing);
  const auto s = exit_stats(domain, 0.5, 1e-4, 10000, 31);
  CHECK(std::abs(s.mean_time - 0.75) < 4.0 * s.time_se + 0.02);
}
