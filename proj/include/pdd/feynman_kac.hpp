#pragma once

#include <functional>
#include <optional>

#include "pdd/geometry.hpp"
#include "pdd/rng.hpp"
#include "pdd/sde.hpp"

namespace pdd {

/// Linear parabolic BVP with mixed boundary conditions,
///
///   u_t = L u + c u + f           in the domain, t > 0
///   u   = p(x)                    at t = 0
///   u   = g(x, t)                 on absorbing faces
///   du/dN = phi_R u + psi_R       on reflecting faces,
///
/// with L the generator of `coeffs`. With horizon = kEllipticHorizon the
/// problem is the elliptic one L u + c u + f = 0 (coefficients evaluated at
/// t = 0, p unused).
struct LinearBvpSpec {
  BoxDomain domain;
  DiffusionCoefficients coeffs;
  ScalarField c;
  ScalarField f;
  std::function<double(const Point&)> initial;
  ScalarField dirichlet;
  ScalarField phi_reflect;
  ScalarField psi_reflect;
  double horizon = kEllipticHorizon;

  bool elliptic() const { return is_elliptic(horizon); }

  /// Checks the structural requirements and samples the sign conditions
  /// (phi_R <= 0 on reflecting faces, c <= 0 for elliptic problems) on a
  /// lattice of the closed domain.
  void validate() const;
};

struct PointEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long n_samples = 0;
  double elapsed = 0.0;
};

/// Mean and standard error (sample standard deviation / sqrt(n)) of scores.
PointEstimate summarize(const std::vector<double>& scores);

struct EstimatorOptions {
  long long samples = 10000;
  double dt = 1e-3;
  /// When positive, keep adding batches until std_error <= target or
  /// max_samples is reached.
  double target_std_error = 0.0;
  long long max_samples = 10'000'000;
  long long batch = 10000;
  std::size_t workers = 1;
};

/// Path functional q(X_tau) Y_tau + Z_tau with q = g(X_tau, T - tau) after an
/// absorbing exit and q = p(X_T) otherwise.
double score_path(const PathOutcome& outcome, const LinearBvpSpec& spec);

/// Coefficients of the forward path for the solution at time `horizon`:
/// every (x, s) argument becomes (x, horizon - s); elliptic problems use t = 0.
DiffusionCoefficients reversed_coefficients(const LinearBvpSpec& spec, double horizon);
ScalarCoefficients reversed_scalars(const LinearBvpSpec& spec, double horizon);

/// Monte Carlo estimate of u(x, t). Replicate r draws from
/// base.substream(r, 0), so the value does not depend on `workers`.
PointEstimate estimate_point(const Point& x, double t, const LinearBvpSpec& spec,
                             const EstimatorOptions& options, const RngStream& base);

/// Shell width used when none is given: 1e-3 of the domain diameter.
double default_wos_shell(const BoxDomain& domain);

/// Walk on Spheres for the Laplace equation with Dirichlet data g (evaluated
/// at t = 0). The absorption shell introduces an O(eps) bias.
PointEstimate walk_on_spheres(const Point& x, const BoxDomain& domain, const ScalarField& g,
                              long long n, std::optional<double> eps, const RngStream& base,
                              std::size_t workers = 1);

}  // namespace pdd
