#include "pdd/sde.hpp"

#include <cmath>

namespace pdd {

DiffusionCoefficients DiffusionCoefficients::brownian(int dim, double scale) {
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "dimension out of range");
  Square s = Square::Identity(dim, dim) * scale;
  return DiffusionCoefficients{dim, {}, [s](const Point&, double) { return s; }};
}

DiffusionCoefficients DiffusionCoefficients::constant(const Point& drift, const Square& sigma) {
  require(drift.size() == sigma.rows() && sigma.rows() == sigma.cols(), ErrorKind::InvalidArgument,
          "drift/sigma shape mismatch");
  return DiffusionCoefficients{static_cast<int>(drift.size()),
                               [drift](const Point&, double) { return drift; },
                               [sigma](const Point&, double) { return sigma; }};
}

PathState advance_state(const PathState& state, const DiffusionCoefficients& coeffs,
                        const ScalarCoefficients& scalars, double dt, const Point& dW) {
  PathState next = state;
  next.x = state.x + coeffs.drift_at(state.x, state.t) * dt + coeffs.sigma_at(state.x, state.t) * dW;
  const double c = scalars.c ? scalars.c(state.x, state.t) : 0.0;
  const double f = scalars.f ? scalars.f(state.x, state.t) : 0.0;
  next.y = state.y + c * state.y * dt;
  next.z = state.z + f * state.y * dt;
  next.t = state.t + dt;
  return next;
}

void reflect_state(PathState& state, const BoxDomain& domain, const BoundaryEvent& event,
                   const ScalarCoefficients& scalars) {
  const int axis = face_axis(event.face_id);
  const double face = domain.face_value(event.face_id);
  // The mirror image moves the point by twice the overshoot; that
  // displacement is the increment of the regulator xi.
  const double dxi = 2.0 * std::abs(state.x[axis] - face);
  const double phi = scalars.phi_reflect ? scalars.phi_reflect(event.hit_point, state.t) : 0.0;
  const double psi = scalars.psi_reflect ? scalars.psi_reflect(event.hit_point, state.t) : 0.0;
  state.z += psi * state.y * dxi;
  state.y += phi * state.y * dxi;
  state.xi += dxi;
  state.x[axis] = 2.0 * face - state.x[axis];
}

PathOutcome simulate_path(const Point& start, double horizon, const BoxDomain& domain,
                          const DiffusionCoefficients& coeffs, const ScalarCoefficients& scalars,
                          double dt, RngStream stream, const PathObserver& observer) {
  require(dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
  require(horizon > 0.0, ErrorKind::InvalidArgument, "horizon must be positive");
  require(start.size() == domain.dim() && coeffs.dim == domain.dim(), ErrorKind::InvalidArgument,
          "dimension mismatch between start, domain and coefficients");
  require(domain.contains_strictly(start), ErrorKind::InvalidArgument, "path must start in the interior");
  if (is_elliptic(horizon)) {
    require(domain.has_absorbing_face(), ErrorKind::Configuration,
            "exit-time problem on a purely reflecting domain: solution only defined up to a constant");
  }

  constexpr int kMaxReflections = 8;
  PathState state = PathState::at(start);
  while (state.t < horizon) {
    const double h = std::min(dt, horizon - state.t);
    const Point dW = sample_gaussian_increment(stream, h, domain.dim());
    state = advance_state(state, coeffs, scalars, h, dW);
    if (state.t >= horizon) state.t = horizon;

    for (int bounce = 0; bounce <= kMaxReflections; ++bounce) {
      const BoundaryEvent event = classify_point(domain, state.x);
      if (event.kind == EventKind::None) break;
      if (event.kind == EventKind::Absorbing) {
        state.x = event.hit_point;
        if (observer) observer(state);
        return PathOutcome{state, event, state.t};
      }
      if (state.x[face_axis(event.face_id)] == domain.face_value(event.face_id)) break;
      if (bounce == kMaxReflections) {
        state.x = event.hit_point;
        break;
      }
      reflect_state(state, domain, event, scalars);
    }
    if (observer) observer(state);
  }
  BoundaryEvent none;
  none.hit_point = state.x;
  return PathOutcome{state, none, horizon};
}

}  // namespace pdd
