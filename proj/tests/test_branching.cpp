#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pdd/branching.hpp"
#include "pdd/problems.hpp"

using namespace pdd;

namespace {

Point p1(double x) {
  Point p(1);
  p << x;
  return p;
}

BranchingSpec classical(std::vector<double> law, double horizon) {
  BranchingSpec spec;
  spec.mode = BranchingMode::Classical;
  for (double a : law) spec.alpha.push_back(BoundedField::constant(a));
  spec.offspring_law = law;
  spec.terminal = BoundedPayoff{[](const Point&) { return 1.0; }, 1.0};
  spec.coeffs = DiffusionCoefficients::brownian(1);
  spec.horizon = horizon;
  return spec;
}

BranchingSpec with_polynomial(const std::vector<double>& coeffs, double horizon) {
  CvaSpec cva;
  cva.polynomial = coeffs;
  cva.horizon = horizon;
  return make_cva_branching(cva, 1000, 0.05);
}

// Independent check of the integral bound: composite Simpson on
// s = 1 + v / (1 - v), v in [0, 1).
double integral_bound_oracle(const std::vector<double>& l) {
  auto l_at = [&](double s) {
    double acc = 0.0;
    for (std::size_t k = l.size(); k-- > 0;) acc = acc * s + l[k];
    return acc;
  };
  auto integrand = [&](double v) {
    if (v >= 1.0) return 0.0;
    const double s = 1.0 + v / (1.0 - v);
    return 1.0 / (l_at(s) * (1.0 - v) * (1.0 - v));
  };
  const int n = 400000;
  const double h = 1.0 / n;
  double sum = integrand(0.0) + integrand(1.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("classical specs need a probability law equal to alpha") {
  CHECK_NOTHROW(classical({0.0, 0.0, 1.0}, 1.0).validate());
  CHECK_THROWS_AS(classical({0.2, 0.2, 0.2}, 1.0).validate(), Error);
  BranchingSpec spec = classical({0.5, 0.0, 0.5}, 1.0);
  spec.offspring_law = {0.25, 0.25, 0.5};
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("reflecting faces are rejected") {
  BranchingSpec spec = classical({0.0, 0.0, 1.0}, 1.0);
  spec.domain = BoxDomain::interval(-1.0, 1.0, FaceKind::Reflecting, FaceKind::Absorbing);
  spec.dirichlet = [](const Point&, double) { return 1.0; };
  try {
    spec.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
}

TEST_CASE("uniform offspring law over the support of alpha") {
  const BranchingSpec spec = make_cva_branching(CvaSpec{}, 1000, 0.05);
  REQUIRE(spec.offspring_law.size() == 5);
  CHECK(spec.offspring_law[0] == doctest::Approx(0.25));
  CHECK(spec.offspring_law[1] == doctest::Approx(0.25));
  CHECK(spec.offspring_law[2] == doctest::Approx(0.25));
  CHECK(spec.offspring_law[3] == 0.0);
  CHECK(spec.offspring_law[4] == doctest::Approx(0.25));
}

TEST_CASE("population bookkeeping N = 1 + sum (I - 1)") {
  const BranchingSpec spec = classical({0.2, 0.3, 0.3, 0.0, 0.2}, 1.0);
  const RngStream base(101, {0, 0, 0});
  for (std::uint64_t r = 0; r < 10000; ++r) {
    const ParticleTree tree = simulate_tree(p1(0.0), spec, {1.0}, base.substream(r, 0));
    long long expected = 1;
    long long born = 0;
    for (const auto& e : tree.events) {
      expected += e.offspring - 1;
      born += e.offspring;
    }
    REQUIRE(static_cast<long long>(tree.alive_count()) == expected);
    REQUIRE(static_cast<long long>(tree.particles.size()) == 1 + born);
    REQUIRE(tree.snapshots.size() == 1);
    REQUIRE(static_cast<long long>(tree.snapshots[0].alive.size()) == expected);
  }
}

TEST_CASE("branch events are ordered and children start at the parent position") {
  const BranchingSpec spec = classical({0.0, 0.0, 0.5, 0.5}, 1.5);
  const RngStream base(102, {0, 0, 0});
  for (std::uint64_t r = 0; r < 500; ++r) {
    const ParticleTree tree = simulate_tree(p1(0.3), spec, {1.5}, base.substream(r, 0));
    for (std::size_t n = 1; n < tree.events.size(); ++n) CHECK(tree.events[n].time >= tree.events[n - 1].time);
    for (const auto& p : tree.particles) {
      if (p.parent == Particle::kNoParent) continue;
      const Particle& parent = tree.particles[p.parent];
      CHECK(parent.status == ParticleStatus::Branched);
      CHECK(p.birth_time == parent.end_time);
      CHECK((p.birth_position - parent.end_position).norm() == 0.0);
    }
  }
}

TEST_CASE("binary splitting: mean population is exp(c T)") {
  BranchingSpec spec = classical({0.0, 0.0, 1.0}, 1.0);
  spec.intensity = 1.0;
  const RngStream base(103, {0, 0, 0});
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const double count = static_cast<double>(simulate_tree(p1(0.0), spec, {1.0}, base.substream(r, 0)).alive_count());
    sum += count;
    sq += count * count;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - std::exp(1.0)) < 4.0 * se);
}

TEST_CASE("unit payoff with probability-law alpha gives score 1 with zero variance") {
  const BranchingSpec spec = classical({0.1, 0.4, 0.5}, 1.0);
  BranchingOptions options;
  options.samples = 2000;
  const auto e = estimate_branching(p1(0.0), spec, {0.5, 1.0}, options, RngStream(104, {0, 0, 0}));
  for (const auto& p : e.per_checkpoint) {
    CHECK(p.value == 1.0);
    CHECK(p.std_error == 0.0);
  }
}

TEST_CASE("marked branching with q = alpha matches classical tree by tree") {
  BranchingSpec cl = classical({0.2, 0.3, 0.5}, 1.0);
  cl.terminal = BoundedPayoff{[](const Point& x) { return 0.5 + 0.4 * std::tanh(x[0]); }, 0.9};
  BranchingSpec marked = cl;
  marked.mode = BranchingMode::Marked;
  const RngStream base(105, {0, 0, 0});
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const ParticleTree tree = simulate_tree(p1(0.2), cl, {1.0}, base.substream(r, 0));
    REQUIRE(score_tree(tree, cl, 0) == score_tree(tree, marked, 0));
  }
}

TEST_CASE("KPP estimator on the whole line") {
  const BranchingSpec spec = make_kpp_branching(KppSpec{}, 1000, 1.0);
  BranchingOptions options;
  options.samples = 20000;
  const auto e = estimate_branching(p1(1.0), spec, {0.5, 1.0}, options, RngStream(106, {0, 0, 0}));
  CHECK(std::abs(e.per_checkpoint[0].value - kpp_exact(1.0, 0.5)) < 4.0 * e.per_checkpoint[0].std_error);
  CHECK(std::abs(e.per_checkpoint[1].value - kpp_exact(1.0, 1.0)) < 4.0 * e.per_checkpoint[1].std_error);
}

TEST_CASE("KPP estimator with absorbing boundary data") {
  KppSpec kpp;
  kpp.lo = -1.0;
  kpp.hi = 1.5;
  const BranchingSpec spec = make_kpp_branching(kpp, 1000, 1e-3);
  BranchingOptions options;
  options.samples = 20000;
  const auto e = estimate_branching(p1(0.2), spec, {1.0}, options, RngStream(107, {0, 0, 0}));
  const auto& p = e.per_checkpoint[0];
  CHECK(std::abs(p.value - kpp_exact(0.2, 1.0)) < 4.0 * p.std_error + 0.01);
}

TEST_CASE("branching estimates do not depend on the worker count") {
  const BranchingSpec spec = make_cva_branching(CvaSpec{}, 1000, 0.05);
  BranchingOptions options;
  options.samples = 3000;
  options.workers = 1;
  const RngStream base(108, {2, 0, 0});
  const auto one = estimate_branching(p1(0.1), spec, {0.1, 0.25}, options, base);
  options.workers = 8;
  const auto eight = estimate_branching(p1(0.1), spec, {0.1, 0.25}, options, base);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(one.per_checkpoint[c].value == eight.per_checkpoint[c].value);
    CHECK(one.per_checkpoint[c].std_error == eight.per_checkpoint[c].std_error);
  }
  CHECK(one.restarts == eight.restarts);
}

TEST_CASE("pruning restarts oversized trees") {
  BranchingSpec spec = classical({0.0, 0.0, 1.0}, 1.0);
  spec.prune_limit = 2;
  const RngStream base(109, {0, 0, 0});
  long long restarts = 0;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const ParticleTree tree = simulate_tree(p1(0.0), spec, {1.0}, base.substream(r, 0));
    CHECK(tree.alive_count() <= 2);
    restarts += tree.restarts;
  }
  CHECK(restarts > 0);

  spec.prune_limit = 1;
  spec.horizon = 8.0;
  spec.max_restarts = 3;
  try {
    for (std::uint64_t r = 0; r < 100; ++r) simulate_tree(p1(0.0), spec, {8.0}, base.substream(r, 0));
    FAIL("expected the restart budget to run out");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
}

TEST_CASE("positive-part fit") {
  const PolynomialFit fit = fit_positive_part(4);
  const double exact[] = {0.05859375, 0.5, 0.8203125, 0.0, -0.41015625};
  const double published[] = {0.0586, 0.5, 0.8199, 0.0, -0.4095};
  REQUIRE(fit.coefficients.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(fit.coefficients[k] == doctest::Approx(exact[k]).epsilon(1e-10));
    CHECK(std::abs(fit.coefficients[k] - published[k]) <= 2e-2);
  }
  CHECK(fit(0.5) == doctest::Approx(0.05859375 + 0.25 + 0.8203125 * 0.25 - 0.41015625 * 0.0625));
  CHECK(fit.max_abs_residual < 0.06);
  CHECK(fit_positive_part(0).coefficients[0] == doctest::Approx(0.25));
  CHECK_THROWS_AS(fit_positive_part(-1), Error);
}

TEST_CASE("assumption case (i): l(1) <= 0") {
  const auto report = check_marked_assumptions(with_polynomial({0.5, 0.0, 0.5}, 5.0));
  CHECK(report.assumption_case == AssumptionCase::NonPositiveAtOne);
  CHECK(report.l_at_1 == doctest::Approx(0.0));
  CHECK(report.admissible());
  CHECK(to_string(report.assumption_case) == "i");
}

TEST_CASE("assumption case (ii): a root beyond 1") {
  // l(s) = 0.1 s^2 - s + 1.05 has l(1) = 0.15 and a root at (1 - sqrt(0.58)) / 0.2.
  const auto report = check_marked_assumptions(with_polynomial({1.05, 0.0, 0.1}, 5.0));
  CHECK(report.assumption_case == AssumptionCase::FiniteRoot);
  CHECK(report.root == doctest::Approx((1.0 - std::sqrt(0.58)) / 0.2).epsilon(1e-9));
  CHECK(to_string(report.assumption_case) == "ii");
}

TEST_CASE("assumption case (iii) for the CVA polynomial") {
  const BranchingSpec spec = make_cva_branching(CvaSpec{}, 1000, 0.05);
  const auto report = check_marked_assumptions(spec);
  CHECK(report.assumption_case == AssumptionCase::IntegralBound);
  CHECK(report.l_at_1 == doctest::Approx(0.788));
  const double oracle = integral_bound_oracle({0.0586, 0.5 - 1.0, 0.8199, 0.0, 0.4095});
  CHECK(std::abs(report.horizon_bound - oracle) < 1e-6);
  CHECK(std::abs(report.horizon_bound - 0.5028634251258669) < 1e-9);
  CHECK(report.warning.empty());
}

TEST_CASE("horizons beyond the integral bound are rejected") {
  CvaSpec cva;
  cva.horizon = 0.6;
  const BranchingSpec spec = make_cva_branching(cva, 1000, 0.05);
  const auto report = check_marked_assumptions(spec);
  CHECK(report.assumption_case == AssumptionCase::Violated);
  CHECK_FALSE(report.reason.empty());

  const ParticleTree tree = simulate_tree(p1(0.0), spec, {0.6}, RngStream(110, {0, 0, 0}));
  try {
    score_tree(tree, spec, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
  }

  cva.horizon = report.horizon_bound;
  const auto edge = check_marked_assumptions(make_cva_branching(cva, 1000, 0.05));
  CHECK(edge.assumption_case == AssumptionCase::IntegralBound);
  CHECK_FALSE(edge.warning.empty());
}
