#include "pdd/feynman_kac.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pdd/worker_pool.hpp"

namespace pdd {
namespace {

// Evaluates score(r) for r in [begin, end) into scores[r], split into one
// contiguous block per worker.
void fill_scores(std::vector<double>& scores, std::size_t begin, std::size_t end, std::size_t workers,
                 const std::function<double(std::size_t)>& score) {
  const std::size_t count = end - begin;
  if (count == 0) return;
  const std::size_t blocks = std::clamp<std::size_t>(workers, 1, count);
  run_round_robin(blocks, blocks, [&](std::size_t block) {
    const std::size_t lo = begin + count * block / blocks;
    const std::size_t hi = begin + count * (block + 1) / blocks;
    for (std::size_t r = lo; r < hi; ++r) scores[r] = score(r);
  });
}

template <typename Fn>
void sample_lattice(const BoxDomain& domain, Fn&& fn) {
  constexpr int kPerAxis = 9;
  const int dim = domain.dim();
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= kPerAxis;
  Point x(dim);
  for (int index = 0; index < total; ++index) {
    int rest = index;
    for (int axis = 0; axis < dim; ++axis) {
      const int k = rest % kPerAxis;
      rest /= kPerAxis;
      x[axis] = domain.lo(axis) + domain.width(axis) * k / (kPerAxis - 1);
    }
    fn(x);
  }
}

}  // namespace

void LinearBvpSpec::validate() const {
  require(coeffs.dim == domain.dim(), ErrorKind::InvalidArgument, "coefficient dimension mismatch");
  require(static_cast<bool>(coeffs.sigma), ErrorKind::InvalidArgument, "diffusion matrix missing");
  if (domain.has_absorbing_face()) {
    require(static_cast<bool>(dirichlet), ErrorKind::MissingDatum, "absorbing faces need a Dirichlet datum");
  }
  if (elliptic()) {
    require(domain.has_absorbing_face(), ErrorKind::Unsupported,
            "purely reflecting elliptic problems need a compatibility condition");
  } else {
    require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be positive");
    require(static_cast<bool>(initial), ErrorKind::MissingDatum, "parabolic problems need an initial datum");
  }
  const double t_probe = elliptic() ? 0.0 : horizon;
  sample_lattice(domain, [&](const Point& x) {
    if (phi_reflect) {
      for (int face = 0; face < 2 * domain.dim(); ++face) {
        if (domain.face_kind(face) != FaceKind::Reflecting) continue;
        Point on_face = x;
        on_face[face_axis(face)] = domain.face_value(face);
        for (double t : {0.0, t_probe}) {
          require(phi_reflect(on_face, t) <= 0.0, ErrorKind::InvalidArgument, "phi_R must be <= 0");
        }
      }
    }
    if (elliptic() && c) {
      require(c(x, 0.0) <= 0.0, ErrorKind::InvalidArgument, "elliptic problems need c <= 0");
    }
  });
}

PointEstimate summarize(const std::vector<double>& scores) {
  PointEstimate est;
  est.n_samples = static_cast<long long>(scores.size());
  if (scores.empty()) return est;
  double sum = 0.0;
  for (double s : scores) sum += s;
  est.value = sum / static_cast<double>(scores.size());
  if (scores.size() > 1) {
    double ss = 0.0;
    for (double s : scores) ss += (s - est.value) * (s - est.value);
    const double n = static_cast<double>(scores.size());
    est.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

double score_path(const PathOutcome& outcome, const LinearBvpSpec& spec) {
  const PathState& s = outcome.terminal;
  switch (outcome.exit.kind) {
    case EventKind::Absorbing: {
      require(static_cast<bool>(spec.dirichlet), ErrorKind::MissingDatum, "no Dirichlet datum for absorbed path");
      const double t_g = spec.elliptic() ? 0.0 : std::max(0.0, spec.horizon - outcome.exit_time);
      return spec.dirichlet(outcome.exit.hit_point, t_g) * s.y + s.z;
    }
    case EventKind::None:
      require(!spec.elliptic(), ErrorKind::HorizonExhausted, "exit-time path ended without leaving the domain");
      require(static_cast<bool>(spec.initial), ErrorKind::MissingDatum, "no initial datum");
      return spec.initial(s.x) * s.y + s.z;
    case EventKind::Reflecting:
      break;
  }
  fail(ErrorKind::InvalidArgument, "path outcome cannot end on a reflecting face");
}

DiffusionCoefficients reversed_coefficients(const LinearBvpSpec& spec, double horizon) {
  const DiffusionCoefficients& base = spec.coeffs;
  const bool elliptic = is_elliptic(horizon);
  auto when = [horizon, elliptic](double s) { return elliptic ? 0.0 : horizon - s; };
  DiffusionCoefficients out;
  out.dim = base.dim;
  if (base.drift) {
    out.drift = [drift = base.drift, when](const Point& x, double s) { return drift(x, when(s)); };
  }
  out.sigma = [sigma = base.sigma, when](const Point& x, double s) { return sigma(x, when(s)); };
  return out;
}

ScalarCoefficients reversed_scalars(const LinearBvpSpec& spec, double horizon) {
  const bool elliptic = is_elliptic(horizon);
  auto wrap = [horizon, elliptic](const ScalarField& field) -> ScalarField {
    if (!field) return {};
    return [field, horizon, elliptic](const Point& x, double s) {
      return field(x, elliptic ? 0.0 : horizon - s);
    };
  };
  return ScalarCoefficients{wrap(spec.c), wrap(spec.f), wrap(spec.phi_reflect), wrap(spec.psi_reflect)};
}

PointEstimate estimate_point(const Point& x, double t, const LinearBvpSpec& spec,
                             const EstimatorOptions& options, const RngStream& base) {
  require(options.samples >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  require(options.dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  require(spec.domain.contains_strictly(x), ErrorKind::InvalidArgument, "estimate point must be interior");
  const auto start = std::chrono::steady_clock::now();

  LinearBvpSpec at_t = spec;
  if (!spec.elliptic()) {
    require(t > 0.0, ErrorKind::InvalidArgument, "estimate time must be positive");
    at_t.horizon = t;
  } else {
    require(spec.domain.has_absorbing_face(), ErrorKind::Configuration,
            "exit-time problem on a purely reflecting domain");
  }
  const DiffusionCoefficients coeffs = reversed_coefficients(at_t, at_t.horizon);
  const ScalarCoefficients scalars = reversed_scalars(at_t, at_t.horizon);

  auto score = [&](std::size_t r) {
    const PathOutcome outcome = simulate_path(x, at_t.horizon, at_t.domain, coeffs, scalars, options.dt,
                                              base.substream(r, 0));
    return score_path(outcome, at_t);
  };

  std::vector<double> scores(static_cast<std::size_t>(options.samples));
  fill_scores(scores, 0, scores.size(), options.workers, score);
  PointEstimate est = summarize(scores);
  if (options.target_std_error > 0.0) {
    const auto batch = static_cast<std::size_t>(std::max<long long>(options.batch, 1));
    while (est.std_error > options.target_std_error && est.n_samples < options.max_samples) {
      const std::size_t begin = scores.size();
      const std::size_t end = std::min(begin + batch, static_cast<std::size_t>(options.max_samples));
      scores.resize(end);
      fill_scores(scores, begin, end, options.workers, score);
      est = summarize(scores);
    }
  }
  est.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

double default_wos_shell(const BoxDomain& domain) { return 1e-3 * domain.diameter(); }

PointEstimate walk_on_spheres(const Point& x, const BoxDomain& domain, const ScalarField& g, long long n,
                              std::optional<double> eps, const RngStream& base, std::size_t workers) {
  require(domain.all_absorbing(), ErrorKind::Unsupported, "walk on spheres needs all faces absorbing");
  require(n >= 2, ErrorKind::InvalidArgument, "need at least two samples");
  require(domain.contains_strictly(x), ErrorKind::InvalidArgument, "start must be interior");
  const double shell = eps.value_or(default_wos_shell(domain));
  require(shell > 0.0, ErrorKind::InvalidArgument, "shell width must be positive");
  const auto start = std::chrono::steady_clock::now();

  auto score = [&](std::size_t r) {
    RngStream stream = base.substream(r, 0);
    Point y = x;
    while (true) {
      const double radius = domain.distance_to_boundary(y);
      if (radius < shell) {
        const int face = domain.nearest_face(y);
        y[face_axis(face)] = domain.face_value(face);
        return g(y, 0.0);
      }
      Point direction(domain.dim());
      double norm = 0.0;
      do {
        for (int i = 0; i < domain.dim(); ++i) direction[i] = stream.gaussian();
        norm = direction.norm();
      } while (norm == 0.0);
      y += (radius / norm) * direction;
    }
  };

  std::vector<double> scores(static_cast<std::size_t>(n));
  fill_scores(scores, 0, scores.size(), workers, score);
  PointEstimate est = summarize(scores);
  est.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

}  // namespace pdd
