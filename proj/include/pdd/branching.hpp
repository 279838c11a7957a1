#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pdd/feynman_kac.hpp"
#include "pdd/geometry.hpp"
#include "pdd/rng.hpp"
#include "pdd/sde.hpp"

namespace pdd {

/// A coefficient function together with its sup-norm over the domain.
struct BoundedField {
  ScalarField fn;
  double sup_norm = 0.0;

  static BoundedField constant(double value);
  bool vanishes() const { return sup_norm == 0.0; }
};

struct BoundedPayoff {
  std::function<double(const Point&)> fn;
  double sup_norm = 0.0;
};

enum class BranchingMode {
  Classical,  ///< alpha is a probability law and q = alpha
  Marked,     ///< arbitrary alpha, branch weights alpha_i / q_i
};

/// Semilinear problem
///
///   u_t = L u + c (sum_i alpha_i(x, t) u^i - u),   u(x, 0) = psi(x),
///
/// optionally with Dirichlet data g on the absorbing faces of `domain`.
/// Terminal-value problems are stated here in time-to-go. Driver
/// coefficients are read at (x, horizon - s); drivers whose coefficients
/// depend on time are therefore only consistent at the horizon checkpoint.
struct BranchingSpec {
  BranchingMode mode = BranchingMode::Classical;
  double intensity = 1.0;
  std::vector<BoundedField> alpha;
  std::vector<double> offspring_law;
  BoundedPayoff terminal;
  ScalarField dirichlet;
  std::optional<BoxDomain> domain;
  DiffusionCoefficients coeffs;
  double horizon = 1.0;
  int prune_limit = 1000;
  /// Largest internal step of the particle driver.
  double step = 0.05;
  /// Restarts allowed per replicate before the configuration is rejected.
  int max_restarts = 100000;

  int max_offspring() const { return static_cast<int>(alpha.size()) - 1; }
  void validate() const;
};

/// Uniform law over the indices where alpha does not vanish.
std::vector<double> uniform_offspring_law(const std::vector<BoundedField>& alpha);

enum class ParticleStatus { Alive, Branched, Dead, HitBoundary };

struct Particle {
  static constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

  std::size_t id = 0;
  std::size_t parent = kNoParent;
  std::uint64_t stream_id = 0;
  double birth_time = 0.0;
  Point birth_position;
  ParticleStatus status = ParticleStatus::Alive;
  /// Branching, death or boundary-hit time; the horizon for survivors.
  double end_time = 0.0;
  Point end_position;
};

/// T_n, K_n, I_n of one branching event.
struct BranchEvent {
  double time = 0.0;
  std::size_t particle = 0;
  int offspring = 0;
  Point position;
};

struct CheckpointSnapshot {
  double time = 0.0;
  std::vector<std::pair<std::size_t, Point>> alive;
};

struct ParticleTree {
  std::vector<Particle> particles;
  std::vector<BranchEvent> events;
  std::vector<CheckpointSnapshot> snapshots;
  int restarts = 0;

  /// N_t at the end of the simulation: particles still alive or frozen on
  /// the boundary.
  std::size_t alive_count() const;
  std::size_t branch_count() const { return events.size(); }
};

/// One replicate of the branching system: a system-level exponential clock with rate
/// intensity * (moving particles), a uniformly chosen particle branching into
/// I ~ q offspring at its current position, and snapshots at every
/// checkpoint. Whenever the population exceeds prune_limit the replicate is
/// thrown away and restarted on fresh particle streams.
ParticleTree simulate_tree(const Point& start, const BranchingSpec& spec, const std::vector<double>& checkpoints,
                           const RngStream& replicate_stream);

/// Product of psi over particles alive at the checkpoint, g over particles
/// frozen on the boundary before it, and alpha_I / q_I over branch events
/// before it. Marked specs are checked against the marked-branching
/// assumption first.
double score_tree(const ParticleTree& tree, const BranchingSpec& spec, std::size_t checkpoint);

enum class AssumptionCase {
  NonPositiveAtOne,  ///< (i)   l(1) <= 0
  FiniteRoot,        ///< (ii)  l has a root s_hat > 1
  IntegralBound,     ///< (iii) l > 0 on [1, inf), horizon <= integral of 1/l
  Violated,
};

std::string_view to_string(AssumptionCase c);

struct AssumptionReport {
  double radius = std::numeric_limits<double>::infinity();
  double l_at_1 = 0.0;
  AssumptionCase assumption_case = AssumptionCase::Violated;
  double horizon_bound = std::numeric_limits<double>::infinity();
  double root = std::numeric_limits<double>::quiet_NaN();
  double psi_norm = 0.0;
  std::string warning;
  std::string reason;

  bool admissible() const { return assumption_case != AssumptionCase::Violated; }
};

/// Evaluates l0(s) = sum ||alpha_k|| s^k and l(s) = c (l0(s |psi|) / |psi| - s)
/// and classifies the spec into the three admissible cases.
AssumptionReport check_marked_assumptions(const BranchingSpec& spec);

/// Least-squares approximation of max(v, 0) on [-1, 1] in the monomials
/// 1, v, ..., v^degree.
struct PolynomialFit {
  Eigen::VectorXd coefficients;
  double fit_lo = -1.0;
  double fit_hi = 1.0;
  double max_abs_residual = 0.0;

  double operator()(double v) const;
};

PolynomialFit fit_positive_part(int degree = 4);

struct NodeEstimates {
  std::vector<PointEstimate> per_checkpoint;
  long long restarts = 0;
  double elapsed = 0.0;
};

struct BranchingOptions {
  long long samples = 10000;
  double target_std_error = 0.0;
  long long max_samples = 10'000'000;
  long long batch = 10000;
  std::size_t workers = 1;
};

/// Monte Carlo estimates of u(x, t) for every checkpoint t from one family of
/// trees. Replicate r uses base.substream(r, .) particle streams.
NodeEstimates estimate_branching(const Point& x, const BranchingSpec& spec, const std::vector<double>& checkpoints,
                                 const BranchingOptions& options, const RngStream& base);

}  // namespace pdd
