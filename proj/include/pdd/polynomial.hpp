#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <span>

#include "pdd/error.hpp"

namespace pdd {

/// p(x) = sum_k coefficients[k] * ((x - center) / scale)^k.
template <typename Scalar>
struct PolynomialT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;
  Scalar center = 0;
  Scalar scale = 1;

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }

  Scalar operator()(Scalar x) const {
    const Scalar v = (x - center) / scale;
    Scalar acc = 0;
    for (Eigen::Index k = coefficients.size() - 1; k >= 0; --k) acc = acc * v + coefficients[k];
    return acc;
  }
};

using Polynomial = PolynomialT<double>;

/// Discrete least-squares polynomial of the given degree through (x, y).
/// The abscissae are mapped onto [-1, 1] first; with degree = n - 1 the fit
/// interpolates.
template <typename Scalar>
PolynomialT<Scalar> fit_least_squares(std::span<const Scalar> x, std::span<const Scalar> y, int degree) {
  require(x.size() == y.size(), ErrorKind::InvalidArgument, "abscissa/ordinate size mismatch");
  require(degree >= 0 && static_cast<std::size_t>(degree) < x.size(), ErrorKind::InvalidArgument,
          "polynomial degree must be below the number of points");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  PolynomialT<Scalar> poly;
  poly.center = (*lo_it + *hi_it) / Scalar(2);
  poly.scale = (*hi_it - *lo_it) / Scalar(2);
  if (poly.scale == Scalar(0)) poly.scale = Scalar(1);

  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vandermonde(n, degree + 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar v = (x[static_cast<std::size_t>(i)] - poly.center) / poly.scale;
    Scalar power = 1;
    for (int k = 0; k <= degree; ++k) {
      vandermonde(i, k) = power;
      power *= v;
    }
    rhs[i] = y[static_cast<std::size_t>(i)];
  }
  poly.coefficients = vandermonde.colPivHouseholderQr().solve(rhs);
  return poly;
}

}  // namespace pdd
