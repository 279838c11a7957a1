#pragma once

#include <functional>
#include <limits>

#include "pdd/geometry.hpp"
#include "pdd/rng.hpp"

namespace pdd {

using ScalarField = std::function<double(const Point&, double)>;
using VectorField = std::function<Point(const Point&, double)>;
using MatrixField = std::function<Square(const Point&, double)>;

/// Sentinel horizon for elliptic (time-independent) problems.
inline constexpr double kEllipticHorizon = std::numeric_limits<double>::infinity();

inline bool is_elliptic(double horizon) { return horizon == kEllipticHorizon; }

/// Drift b(x,t) and diffusion matrix sigma(x,t) of dX = b dt + sigma dW, so
/// that the generator is 1/2 sum A_ij d_ij + b.grad with A = sigma sigma^T.
/// An empty drift means b = 0.
struct DiffusionCoefficients {
  int dim = 1;
  VectorField drift;
  MatrixField sigma;

  Point drift_at(const Point& x, double t) const { return drift ? drift(x, t) : Point::Zero(dim); }
  Square sigma_at(const Point& x, double t) const { return sigma(x, t); }

  /// sigma = scale * I, b = 0. scale = sqrt(2) gives the generator Laplacian.
  static DiffusionCoefficients brownian(int dim, double scale = 1.0);
  static DiffusionCoefficients constant(const Point& drift, const Square& sigma);
};

/// The zeroth-order term c, the source f, and the reflecting-face data of
/// the Milstein representation. Empty fields read as zero.
struct ScalarCoefficients {
  ScalarField c;
  ScalarField f;
  ScalarField phi_reflect;
  ScalarField psi_reflect;
};

/// The coupled (X, Y, Z, xi) state and the elapsed path time.
struct PathState {
  Point x;
  double y = 1.0;
  double z = 0.0;
  double xi = 0.0;
  double t = 0.0;

  static PathState at(const Point& start) { return PathState{start, 1.0, 0.0, 0.0, 0.0}; }
};

struct PathOutcome {
  PathState terminal;
  BoundaryEvent exit;
  /// First-exit time, or the horizon when the path survived. An exit detected
  /// on the final step reports exit_time equal to the horizon.
  double exit_time = 0.0;
};

using PathObserver = std::function<void(const PathState&)>;

/// One explicit Euler-Maruyama step of the interior dynamics:
///   X += b dt + sigma dW,  Y += c Y dt,  Z += f Y dt,  t += dt,
/// with all coefficients evaluated at the pre-step state.
PathState advance_state(const PathState& state, const DiffusionCoefficients& coeffs,
                        const ScalarCoefficients& scalars, double dt, const Point& dW);

/// Mirrors the overshoot of `state.x` across the reflecting face in `event`
/// and accounts the contact: dxi = 2 * overshoot, Y += phi Y dxi, Z += psi Y dxi
/// (data evaluated at the hit point).
void reflect_state(PathState& state, const BoxDomain& domain, const BoundaryEvent& event,
                   const ScalarCoefficients& scalars);

/// Steps the system from `start` until the first absorbing crossing or the
/// horizon. Use kEllipticHorizon for exit-time problems; those need at least
/// one absorbing face.
PathOutcome simulate_path(const Point& start, double horizon, const BoxDomain& domain,
                          const DiffusionCoefficients& coeffs, const ScalarCoefficients& scalars,
                          double dt, RngStream stream, const PathObserver& observer = {});

}  // namespace pdd
