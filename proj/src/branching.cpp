#include "pdd/branching.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pdd/worker_pool.hpp"

namespace pdd {
namespace {

void check_checkpoints(const std::vector<double>& checkpoints, double horizon) {
  require(!checkpoints.empty(), ErrorKind::InvalidArgument, "no checkpoints");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    require(checkpoints[i] > 0.0 && checkpoints[i] <= horizon, ErrorKind::InvalidArgument,
            "checkpoints must lie in (0, horizon]");
    if (i > 0) {
      require(checkpoints[i] > checkpoints[i - 1], ErrorKind::InvalidArgument,
              "checkpoints must be strictly increasing");
    }
  }
}

int sample_offspring(RngStream& stream, const std::vector<double>& law) {
  const double u = stream.uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (law[i] <= 0.0) continue;
    acc += law[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

// Coefficients of l(s) as a polynomial in s.
Eigen::VectorXd l_polynomial(const BranchingSpec& spec, double psi_norm) {
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(std::max<Eigen::Index>(2, static_cast<Eigen::Index>(spec.alpha.size())));
  for (std::size_t k = 0; k < spec.alpha.size(); ++k) {
    coef[static_cast<Eigen::Index>(k)] = spec.alpha[k].sup_norm * std::pow(psi_norm, static_cast<double>(k) - 1.0);
  }
  coef[1] -= 1.0;
  return spec.intensity * coef;
}

double horner(const Eigen::VectorXd& coef, double s) {
  double acc = 0.0;
  for (Eigen::Index k = coef.size() - 1; k >= 0; --k) acc = acc * s + coef[k];
  return acc;
}

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& fn, double a, double b, double tol) {
  const double fa = fn(a);
  const double fb = fn(b);
  const double fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(fn, a, b, fa, fm, fb, whole, tol, 60);
}

double bisect(const std::function<double(double)>& fn, double lo, double hi) {
  double flo = fn(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = fn(mid);
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double score_unchecked(const ParticleTree& tree, const BranchingSpec& spec, std::size_t checkpoint) {
  require(checkpoint < tree.snapshots.size(), ErrorKind::InvalidArgument, "checkpoint was not recorded");
  const CheckpointSnapshot& snap = tree.snapshots[checkpoint];
  double product = 1.0;
  for (const auto& [id, position] : snap.alive) product *= spec.terminal.fn(position);
  for (const Particle& p : tree.particles) {
    if (p.status != ParticleStatus::HitBoundary || p.end_time > snap.time) continue;
    require(static_cast<bool>(spec.dirichlet), ErrorKind::MissingDatum,
            "particle reached the boundary but no Dirichlet datum is configured");
    product *= spec.dirichlet(p.end_position, snap.time - p.end_time);
  }
  for (const BranchEvent& e : tree.events) {
    if (e.time > snap.time) break;
    const auto i = static_cast<std::size_t>(e.offspring);
    product *= spec.alpha[i].fn(e.position, snap.time - e.time) / spec.offspring_law[i];
  }
  return product;
}

}  // namespace

BoundedField BoundedField::constant(double value) {
  return BoundedField{[value](const Point&, double) { return value; }, std::abs(value)};
}

std::vector<double> uniform_offspring_law(const std::vector<BoundedField>& alpha) {
  std::vector<double> law(alpha.size(), 0.0);
  const auto support = std::count_if(alpha.begin(), alpha.end(), [](const BoundedField& a) { return !a.vanishes(); });
  require(support > 0, ErrorKind::InvalidArgument, "all branching coefficients vanish");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!alpha[i].vanishes()) law[i] = 1.0 / static_cast<double>(support);
  }
  return law;
}

void BranchingSpec::validate() const {
  require(intensity > 0.0, ErrorKind::InvalidArgument, "branching intensity must be positive");
  require(alpha.size() >= 2, ErrorKind::InvalidArgument, "need coefficients alpha_0..alpha_L with L >= 1");
  require(offspring_law.size() == alpha.size(), ErrorKind::InvalidArgument, "offspring law size mismatch");
  require(static_cast<bool>(terminal.fn), ErrorKind::MissingDatum, "terminal payoff missing");
  require(static_cast<bool>(coeffs.sigma), ErrorKind::InvalidArgument, "driver diffusion missing");
  require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be positive");
  require(prune_limit >= 1, ErrorKind::InvalidArgument, "prune limit must be >= 1");
  require(step > 0.0, ErrorKind::InvalidArgument, "driver step must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    require(static_cast<bool>(alpha[i].fn), ErrorKind::InvalidArgument, "alpha function missing");
    require(offspring_law[i] >= 0.0, ErrorKind::InvalidArgument, "negative offspring probability");
    if (!alpha[i].vanishes()) {
      require(offspring_law[i] > 0.0, ErrorKind::InvalidArgument, "q_i must be positive where alpha_i != 0");
    }
    total += offspring_law[i];
  }
  require(std::abs(total - 1.0) < 1e-12, ErrorKind::InvalidArgument, "offspring law must sum to 1");
  if (domain) {
    require(domain->dim() == coeffs.dim, ErrorKind::InvalidArgument, "domain/driver dimension mismatch");
    for (FaceKind kind : domain->face_kinds()) {
      require(kind == FaceKind::Absorbing, ErrorKind::Unsupported,
              "branching estimators support Dirichlet boundaries only");
    }
  }
  if (mode == BranchingMode::Classical) {
    const Point probe = domain ? Point((domain->lo() + domain->hi()) / 2.0) : Point(Point::Zero(coeffs.dim));
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double a = alpha[i].fn(probe, 0.0);
      require(a >= 0.0 && a == alpha[i].sup_norm, ErrorKind::InvalidArgument,
              "classical branching needs nonnegative constant coefficients");
      require(offspring_law[i] == a, ErrorKind::InvalidArgument, "classical branching uses q = alpha");
      sum += a;
    }
    require(std::abs(sum - 1.0) < 1e-12, ErrorKind::InvalidArgument,
            "classical branching coefficients must sum to 1");
  }
}

std::size_t ParticleTree::alive_count() const {
  return static_cast<std::size_t>(std::count_if(particles.begin(), particles.end(), [](const Particle& p) {
    return p.status == ParticleStatus::Alive || p.status == ParticleStatus::HitBoundary;
  }));
}

ParticleTree simulate_tree(const Point& start, const BranchingSpec& spec, const std::vector<double>& checkpoints,
                           const RngStream& replicate_stream) {
  check_checkpoints(checkpoints, spec.horizon);
  require(start.size() == spec.coeffs.dim, ErrorKind::InvalidArgument, "start dimension mismatch");
  if (spec.domain) {
    require(spec.domain->contains_strictly(start), ErrorKind::InvalidArgument, "start must be interior");
  }
  const std::uint64_t replicate = replicate_stream.key().replicate;
  const int dim = spec.coeffs.dim;

  ParticleTree tree;
  std::vector<RngStream> streams;
  std::vector<std::size_t> moving;
  std::vector<std::size_t> still_moving;
  std::uint64_t next_stream = 0;

  auto spawn = [&](std::size_t parent, double time, const Point& position) {
    Particle p;
    p.id = tree.particles.size();
    p.parent = parent;
    p.stream_id = next_stream++;
    p.birth_time = time;
    p.birth_position = position;
    p.end_time = spec.horizon;
    p.end_position = position;
    streams.push_back(replicate_stream.substream(replicate, p.stream_id));
    tree.particles.push_back(p);
    moving.push_back(p.id);
  };

  while (true) {
    tree.particles.clear();
    tree.events.clear();
    tree.snapshots.clear();
    streams.clear();
    moving.clear();
    RngStream system = replicate_stream.substream(replicate, next_stream++);
    spawn(Particle::kNoParent, 0.0, start);
    std::size_t population = 1;
    bool pruned = false;

    double t = 0.0;
    std::size_t next_checkpoint = 0;
    while (next_checkpoint < checkpoints.size()) {
      const double target = checkpoints[next_checkpoint];
      if (moving.empty()) {
        tree.snapshots.push_back(CheckpointSnapshot{target, {}});
        ++next_checkpoint;
        t = target;
        continue;
      }
      const double clock = system.exponential(spec.intensity * static_cast<double>(moving.size()));
      const bool branches = t + clock < target;
      const double stop = branches ? t + clock : target;

      // Lockstep Euler substeps; a boundary hit ends the interval early and
      // the (memoryless) clock is redrawn for the smaller population.
      const double span = stop - t;
      const int substeps = std::max(1, static_cast<int>(std::ceil(span / spec.step)));
      bool hit = false;
      double reached = stop;
      for (int j = 1; j <= substeps && !hit; ++j) {
        const double s0 = t + span * (j - 1) / substeps;
        const double s1 = (j == substeps) ? stop : t + span * j / substeps;
        const double h = s1 - s0;
        still_moving.clear();
        for (std::size_t id : moving) {
          Particle& p = tree.particles[id];
          const double when = spec.horizon - s0;
          const Point dW = sample_gaussian_increment(streams[id], h, dim);
          p.end_position = p.end_position + spec.coeffs.drift_at(p.end_position, when) * h +
                           spec.coeffs.sigma_at(p.end_position, when) * dW;
          if (spec.domain) {
            const BoundaryEvent event = classify_point(*spec.domain, p.end_position);
            if (event.kind != EventKind::None) {
              p.status = ParticleStatus::HitBoundary;
              p.end_time = s1;
              p.end_position = event.hit_point;
              hit = true;
              continue;
            }
          }
          still_moving.push_back(id);
        }
        moving.swap(still_moving);
        if (hit) reached = s1;
      }
      t = reached;

      auto take_snapshot = [&] {
        CheckpointSnapshot snap{target, {}};
        snap.alive.reserve(moving.size());
        for (std::size_t id : moving) snap.alive.emplace_back(id, tree.particles[id].end_position);
        tree.snapshots.push_back(std::move(snap));
        ++next_checkpoint;
        t = target;
      };

      if (hit) {
        // A boundary hit takes precedence over a clock firing in the same
        // substep; the clock is redrawn for the reduced population.
        if (!branches && t == target) take_snapshot();
        continue;
      }
      if (!branches) {
        take_snapshot();
        continue;
      }

      const std::size_t pick = moving[system.below(moving.size())];
      const int offspring = sample_offspring(system, spec.offspring_law);
      Particle& parent = tree.particles[pick];
      parent.status = offspring == 0 ? ParticleStatus::Dead : ParticleStatus::Branched;
      parent.end_time = t;
      const Point where = parent.end_position;
      tree.events.push_back(BranchEvent{t, pick, offspring, where});
      moving.erase(std::find(moving.begin(), moving.end(), pick));
      for (int k = 0; k < offspring; ++k) spawn(pick, t, where);
      population = population + static_cast<std::size_t>(offspring) - 1;
      if (population > static_cast<std::size_t>(spec.prune_limit)) {
        pruned = true;
        break;
      }
    }
    if (!pruned) break;
    ++tree.restarts;
    require(tree.restarts <= spec.max_restarts, ErrorKind::Configuration,
            "prune limit too small: replicate restarted " + std::to_string(tree.restarts) + " times");
  }
  return tree;
}

double score_tree(const ParticleTree& tree, const BranchingSpec& spec, std::size_t checkpoint) {
  if (spec.mode == BranchingMode::Marked) {
    const AssumptionReport report = check_marked_assumptions(spec);
    require(report.admissible(), ErrorKind::AssumptionViolated, report.reason);
  }
  return score_unchecked(tree, spec, checkpoint);
}

std::string_view to_string(AssumptionCase c) {
  switch (c) {
    case AssumptionCase::NonPositiveAtOne: return "i";
    case AssumptionCase::FiniteRoot: return "ii";
    case AssumptionCase::IntegralBound: return "iii";
    case AssumptionCase::Violated: return "violated";
  }
  return "violated";
}

AssumptionReport check_marked_assumptions(const BranchingSpec& spec) {
  AssumptionReport report;
  report.psi_norm = spec.terminal.sup_norm;
  require(report.psi_norm > 0.0, ErrorKind::InvalidArgument, "terminal payoff sup-norm must be positive");
  require(spec.alpha.size() >= 2, ErrorKind::InvalidArgument, "need coefficients alpha_0..alpha_L with L >= 1");
  // l0 is a polynomial, so its radius of convergence is infinite.
  report.radius = std::numeric_limits<double>::infinity();
  if (!(report.psi_norm < report.radius)) {
    report.reason = "terminal sup-norm is not below the radius of convergence";
    return report;
  }

  const Eigen::VectorXd l = l_polynomial(spec, report.psi_norm);
  auto l_at = [&l](double s) { return horner(l, s); };
  report.l_at_1 = l_at(1.0);
  if (report.l_at_1 <= 0.0) {
    report.assumption_case = AssumptionCase::NonPositiveAtOne;
    return report;
  }

  Eigen::Index top = l.size() - 1;
  while (top > 0 && l[top] == 0.0) --top;

  // Terms of degree >= 2 have nonnegative coefficients, so l is convex on
  // [0, inf): a root beyond 1 exists iff l dips to zero after its minimum.
  Eigen::VectorXd dl = Eigen::VectorXd::Zero(std::max<Eigen::Index>(1, l.size() - 1));
  for (Eigen::Index k = 1; k < l.size(); ++k) dl[k - 1] = static_cast<double>(k) * l[k];
  auto dl_at = [&dl](double s) { return horner(dl, s); };
  if (dl_at(1.0) < 0.0) {
    double hi = 2.0;
    if (top >= 2) {
      while (dl_at(hi) < 0.0) hi *= 2.0;
      const double s_min = bisect(dl_at, 1.0, hi);
      if (l_at(s_min) <= 0.0) {
        report.root = bisect(l_at, 1.0, s_min);
        report.assumption_case = AssumptionCase::FiniteRoot;
        return report;
      }
    } else {
      // l is linear and decreasing.
      while (l_at(hi) > 0.0) hi *= 2.0;
      report.root = bisect(l_at, 1.0, hi);
      report.assumption_case = AssumptionCase::FiniteRoot;
      return report;
    }
  }

  if (top < 2) {
    report.horizon_bound = std::numeric_limits<double>::infinity();
  } else {
    // s = 1/u maps [1, inf) onto (0, 1]; the integrand 1 / (u^2 l(1/u)) has
    // the limit 1 / l_2 at u = 0 when l has degree 2 and 0 above.
    auto integrand = [&](double u) {
      if (u == 0.0) return top == 2 ? 1.0 / l[2] : 0.0;
      return 1.0 / (u * u * l_at(1.0 / u));
    };
    report.horizon_bound = integrate(integrand, 0.0, 1.0, 1e-13);
  }
  if (spec.horizon > report.horizon_bound) {
    report.reason = "horizon " + std::to_string(spec.horizon) + " exceeds the admissible bound " +
                    std::to_string(report.horizon_bound);
    return report;
  }
  if (std::abs(spec.horizon - report.horizon_bound) <= 1e-12 * report.horizon_bound) {
    report.warning = "horizon equals the integral bound; admitted at the boundary of case (iii)";
  }
  report.assumption_case = AssumptionCase::IntegralBound;
  return report;
}

double PolynomialFit::operator()(double v) const { return horner(coefficients, v); }

PolynomialFit fit_positive_part(int degree) {
  require(degree >= 0, ErrorKind::InvalidArgument, "degree must be nonnegative");
  const int n = degree + 1;
  // Normal equations of the continuous L2 fit: int_{-1}^{1} v^(i+j) dv and
  // int_0^1 v^(i+1) dv.
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int p = i + j;
      gram(i, j) = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
    }
    rhs[i] = 1.0 / (i + 2);
  }
  PolynomialFit fit;
  fit.coefficients = gram.ldlt().solve(rhs);
  constexpr int kProbe = 4000;
  for (int k = 0; k <= kProbe; ++k) {
    const double v = -1.0 + 2.0 * k / kProbe;
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(fit(v) - std::max(v, 0.0)));
  }
  return fit;
}

NodeEstimates estimate_branching(const Point& x, const BranchingSpec& spec, const std::vector<double>& checkpoints,
                                 const BranchingOptions& options, const RngStream& base) {
  require(options.samples >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  spec.validate();
  check_checkpoints(checkpoints, spec.horizon);
  if (spec.mode == BranchingMode::Marked) {
    const AssumptionReport report = check_marked_assumptions(spec);
    require(report.admissible(), ErrorKind::AssumptionViolated, report.reason);
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t columns = checkpoints.size();

  std::vector<std::vector<double>> scores(columns);
  std::vector<long long> restarts;
  auto run = [&](std::size_t begin, std::size_t end) {
    for (auto& column : scores) column.resize(end);
    restarts.resize(end);
    const std::size_t count = end - begin;
    const std::size_t blocks = std::clamp<std::size_t>(options.workers, 1, count);
    run_round_robin(blocks, blocks, [&](std::size_t block) {
      const std::size_t lo = begin + count * block / blocks;
      const std::size_t hi = begin + count * (block + 1) / blocks;
      for (std::size_t r = lo; r < hi; ++r) {
        const ParticleTree tree = simulate_tree(x, spec, checkpoints, base.substream(r, 0));
        restarts[r] = tree.restarts;
        for (std::size_t c = 0; c < columns; ++c) scores[c][r] = score_unchecked(tree, spec, c);
      }
    });
  };

  auto summarize_all = [&] {
    NodeEstimates out;
    for (const auto& column : scores) out.per_checkpoint.push_back(summarize(column));
    out.restarts = std::accumulate(restarts.begin(), restarts.end(), 0LL);
    return out;
  };
  auto worst_error = [](const NodeEstimates& e) {
    double worst = 0.0;
    for (const auto& p : e.per_checkpoint) worst = std::max(worst, p.std_error);
    return worst;
  };

  run(0, static_cast<std::size_t>(options.samples));
  NodeEstimates result = summarize_all();
  if (options.target_std_error > 0.0) {
    const auto batch = static_cast<std::size_t>(std::max<long long>(options.batch, 1));
    while (worst_error(result) > options.target_std_error &&
           static_cast<long long>(scores.front().size()) < options.max_samples) {
      const std::size_t begin = scores.front().size();
      run(begin, std::min(begin + batch, static_cast<std::size_t>(options.max_samples)));
      result = summarize_all();
    }
  }
  result.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace pdd
