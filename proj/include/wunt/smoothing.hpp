#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace wunt {

//! Quartic smoothing density on [-0.5, 0.5]:
//!   S(x) = (15/8) (1 - 4 x^2)^2,
//! with closed-form antiderivative T(u) = int_{-1/2}^{u} S. It vanishes at
//! the interval endpoints and integrates to one, which is what makes the
//! piecewise transform below continuous across cell boundaries.
struct SmoothingKernel {
  static double density(double x)
  {
    if (x < -0.5 || x > 0.5) {
      return 0.0;
    }
    const double t = 1.0 - 4.0 * x * x;
    return 1.875 * t * t;
  }

  static double cdf(double u)
  {
    if (u <= -0.5) {
      return 0.0;
    }
    if (u >= 0.5) {
      return 1.0;
    }
    const double u2 = u * u;
    return 0.5 + 1.875 * u * (1.0 - u2 * (8.0 / 3.0 - 3.2 * u2));
  }
};

namespace detail {

//! Index of the half-open interval [b_j, b_{j+1}) containing x, for
//! breakpoints b_0 < ... < b_m. Points on a breakpoint go right; x at or
//! beyond the last breakpoint stays in the final interval.
inline std::size_t locate_interval(const std::vector<double>& breaks, double x)
{
  const auto first = breaks.begin() + 1;
  const auto last = breaks.end() - 1;
  return static_cast<std::size_t>(std::upper_bound(first, last, x) - first);
}

//! Smoothed position of x inside interval j of the given breakpoints:
//! (j + T((x - mid)/len)) / m, the coordinate map shared by the adaptive
//! and marginal transformers.
inline double smoothed_coordinate(const std::vector<double>& breaks,
                                  std::size_t j, double x)
{
  const double left = breaks[j];
  const double right = breaks[j + 1];
  const double len = right - left;
  const double mid = 0.5 * (left + right);
  double u = len > 0.0 ? (x - mid) / len : 0.0;
  u = std::clamp(u, -0.5, 0.5);
  const double m = static_cast<double>(breaks.size() - 1);
  return (static_cast<double>(j) + SmoothingKernel::cdf(u)) / m;
}

} // namespace detail

} // namespace wunt
