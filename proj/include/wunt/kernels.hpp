#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "wunt/common.hpp"

namespace wunt {

//! Univariate kernels shipped with the product kernel. The order-2 kernel
//! is Epanechnikov on [-1,1]; orders 4 and 6 are the polynomial-times-
//! Gaussian constructions whose moments vanish up to order r - 1.
enum class KernelFamily {
  epanechnikov, // order 2, compact support
  gaussian,     // order 2
  gauss_order4, // (1/2)(3 - x^2) phi(x)
  gauss_order6, // (1/8)(15 - 10 x^2 + x^4) phi(x)
};

inline std::string to_string(KernelFamily family)
{
  switch (family) {
    case KernelFamily::epanechnikov:
      return "epanechnikov";
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::gauss_order4:
      return "gauss4";
    case KernelFamily::gauss_order6:
      return "gauss6";
  }
  return "unknown";
}

namespace detail {

inline double std_normal_pdf(double x)
{
  return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

} // namespace detail

//! Product kernel K_H(u - v) = det(H)^-1 prod_k G((u_k - v_k)/h_k).
class ProductKernel {
public:
  ProductKernel(KernelFamily family, Eigen::VectorXd bandwidths)
    : family_(family)
    , bandwidths_(std::move(bandwidths))
  {
    if (bandwidths_.size() < 1) {
      throw config_error("kernel: empty bandwidth vector");
    }
    inv_det_ = 1.0;
    for (Eigen::Index k = 0; k < bandwidths_.size(); ++k) {
      if (!(bandwidths_[k] > 0.0)) {
        throw config_error("kernel bandwidths must be positive");
      }
      inv_det_ /= bandwidths_[k];
    }
  }

  //! Shipped kernel for a requested even order in {2, 4, 6}.
  static ProductKernel for_order(int order, Eigen::VectorXd bandwidths)
  {
    switch (order) {
      case 2:
        return ProductKernel(KernelFamily::epanechnikov,
                             std::move(bandwidths));
      case 4:
        return ProductKernel(KernelFamily::gauss_order4,
                             std::move(bandwidths));
      case 6:
        return ProductKernel(KernelFamily::gauss_order6,
                             std::move(bandwidths));
      default:
        throw config_error("kernel order must be 2, 4 or 6, got " +
                           std::to_string(order));
    }
  }

  KernelFamily family() const { return family_; }
  const Eigen::VectorXd& bandwidths() const { return bandwidths_; }
  Eigen::Index dim() const { return bandwidths_.size(); }

  int order() const
  {
    switch (family_) {
      case KernelFamily::epanechnikov:
      case KernelFamily::gaussian:
        return 2;
      case KernelFamily::gauss_order4:
        return 4;
      case KernelFamily::gauss_order6:
        return 6;
    }
    return 0;
  }

  double g(double x) const
  {
    switch (family_) {
      case KernelFamily::epanechnikov: {
        const double a = std::abs(x);
        return a >= 1.0 ? 0.0 : 0.75 * (1.0 - x * x);
      }
      case KernelFamily::gaussian:
        return detail::std_normal_pdf(x);
      case KernelFamily::gauss_order4:
        return 0.5 * (3.0 - x * x) * detail::std_normal_pdf(x);
      case KernelFamily::gauss_order6: {
        const double x2 = x * x;
        return 0.125 * (15.0 - 10.0 * x2 + x2 * x2) *
               detail::std_normal_pdf(x);
      }
    }
    return 0.0;
  }

  //! K_H evaluated at the pair (u, v); symmetric in its arguments.
  double operator()(const double* u, const double* v) const
  {
    double prod = inv_det_;
    for (Eigen::Index k = 0; k < bandwidths_.size(); ++k) {
      prod *= g((u[k] - v[k]) / bandwidths_[k]);
      if (prod == 0.0) {
        return 0.0;
      }
    }
    return prod;
  }

  double operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const
  {
    if (u.size() != dim() || v.size() != dim()) {
      throw std::invalid_argument("kernel_eval: dimension mismatch");
    }
    return (*this)(u.data(), v.data());
  }

private:
  KernelFamily family_;
  Eigen::VectorXd bandwidths_;
  double inv_det_;
};

inline double kernel_eval(const ProductKernel& k, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& v)
{
  return k(u, v);
}

//! Rate-optimal bandwidth h = c * n^(-2 / (d + 2 (alpha + beta))).
inline double default_bandwidth(long n, int d, double alpha, double beta,
                                double c = 1.0)
{
  if (n < 2 || d < 1 || !(alpha > 0.0) || !(beta > 0.0) || !(c > 0.0)) {
    throw config_error("default_bandwidth: need n >= 2, d >= 1 and positive "
                       "alpha, beta, c");
  }
  const double exponent = -2.0 / (static_cast<double>(d) + 2.0 * (alpha + beta));
  return c * std::pow(static_cast<double>(n), exponent);
}

//! Even kernel order covering smoothness alpha + beta, capped at 6.
inline int default_kernel_order(double alpha, double beta)
{
  const double s = alpha + beta;
  if (s <= 2.0) {
    return 2;
  }
  if (s <= 4.0) {
    return 4;
  }
  return 6;
}

} // namespace wunt
