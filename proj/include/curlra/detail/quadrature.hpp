#pragma once

#include <array>
#include <cmath>

#include "curlra/errors.hpp"

namespace curlra {

namespace detail {

// 10-point Gauss-Legendre nodes and weights on [-1, 1] (positive half).
inline constexpr std::array<double, 5> kGlNodes = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                                   0.8650633666889845, 0.9739065285171717};
inline constexpr std::array<double, 5> kGlWeights = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                     0.1494513491505806, 0.0666713443086881};

template <class F>
double gauss10(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k)
    s += kGlWeights[k] * (f(c - h * kGlNodes[k]) + f(c + h * kGlNodes[k]));
  return s * h;
}

template <class F>
double adapt(F& f, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gauss10(f, a, m), right = gauss10(f, m, b);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth <= 0) throw NumericalFailure("integrate: adaptive quadrature did not converge");
  return adapt(f, a, m, left, 0.5 * tol, depth - 1) + adapt(f, m, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double tol, int max_depth) {
  return detail::adapt(f, a, b, detail::gauss10(f, a, b), tol, max_depth);
}

}  // namespace curlra
