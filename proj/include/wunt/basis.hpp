#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wunt/common.hpp"

namespace wunt {

enum class BasisFamily {
  tensor_cosine,
  tensor_haar,
};

inline std::string to_string(BasisFamily family)
{
  switch (family) {
    case BasisFamily::tensor_cosine:
      return "cosine";
    case BasisFamily::tensor_haar:
      return "haar";
  }
  return "unknown";
}

inline BasisFamily basis_family_from_string(const std::string& name)
{
  if (name == "cosine" || name == "tensor-cosine") {
    return BasisFamily::tensor_cosine;
  }
  if (name == "haar" || name == "tensor-haar") {
    return BasisFamily::tensor_haar;
  }
  throw config_error("unknown basis family '" + name + "'");
}

//! Orthonormal tensor-product basis on [0,1]^d with the projection kernel
//! K_L(x, y) = sum_{l<=L} psi_l(x) psi_l(y). Multi-indices are enumerated
//! in blocks of maximum per-axis frequency (block m holds all indices with
//! every component < m and some component = m - 1), each block in
//! lexicographic order, so L = m^d uses exactly the full m-block prefix.
class ProjectionBasis {
public:
  ProjectionBasis(BasisFamily family, Eigen::Index dim, long count)
    : family_(family)
    , dim_(dim)
    , count_(count)
  {
    if (dim_ < 1) {
      throw config_error("basis: dimension must be positive");
    }
    if (count_ < 1) {
      throw config_error("basis count L must be at least 1");
    }
    if (count_ > 2'000'000) {
      throw config_error("basis count L = " + std::to_string(count_) +
                         " is beyond the supported range");
    }
    enumerate_indices();
  }

  BasisFamily family() const { return family_; }
  Eigen::Index dim() const { return dim_; }
  long count() const { return count_; }
  int max_frequency() const { return max_freq_; }

  //! 1-D basis member f in {0, 1, ...} at x in [0,1].
  static double eval_1d(BasisFamily family, int f, double x)
  {
    if (family == BasisFamily::tensor_cosine) {
      if (f == 0) {
        return 1.0;
      }
      return std::sqrt(2.0) *
             std::cos(M_PI * static_cast<double>(f) * x);
    }
    // Haar: f = 0 is the constant; f = 2^j + k (k in [0, 2^j)) is the
    // wavelet at scale j, offset k.
    if (f == 0) {
      return 1.0;
    }
    int j = 0;
    while ((2 << j) <= f) {
      ++j;
    }
    const int k = f - (1 << j);
    const double scale = static_cast<double>(1 << j);
    const double t = x * scale - static_cast<double>(k);
    if (t < 0.0 || t >= 1.0) {
      return 0.0;
    }
    const double amp = std::sqrt(scale);
    return t < 0.5 ? amp : -amp;
  }

  //! psi_l for l in [0, L).
  double eval(long l, const double* x) const
  {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      prod *= eval_1d(family_, index_at(l, k), x[k]);
    }
    return prod;
  }

  double eval(long l, const Eigen::VectorXd& x) const
  {
    return eval(l, x.data());
  }

  //! All L basis values at one point, via a cached table of 1-D values.
  //! out must hold L doubles; scratch must hold dim * max_frequency.
  void eval_point(const double* x, double* out, double* scratch) const
  {
    for (Eigen::Index k = 0; k < dim_; ++k) {
      for (int f = 0; f < max_freq_; ++f) {
        scratch[k * max_freq_ + f] = eval_1d(family_, f, x[k]);
      }
    }
    for (long l = 0; l < count_; ++l) {
      double prod = 1.0;
      const std::uint16_t* idx = &indices_[static_cast<std::size_t>(l) *
                                           static_cast<std::size_t>(dim_)];
      for (Eigen::Index k = 0; k < dim_; ++k) {
        prod *= scratch[k * max_freq_ + idx[k]];
      }
      out[l] = prod;
    }
  }

  //! Projection kernel K_L(x, y); symmetric, reproducing on the span.
  double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const
  {
    if (x.size() != dim_ || y.size() != dim_) {
      throw std::invalid_argument("projection_kernel_eval: dimension "
                                  "mismatch");
    }
    double total = 0.0;
    for (long l = 0; l < count_; ++l) {
      total += eval(l, x.data()) * eval(l, y.data());
    }
    return total;
  }

  int index_at(long l, Eigen::Index k) const
  {
    return indices_[static_cast<std::size_t>(l) *
                      static_cast<std::size_t>(dim_) +
                    static_cast<std::size_t>(k)];
  }

private:
  void enumerate_indices()
  {
    indices_.reserve(static_cast<std::size_t>(count_) *
                     static_cast<std::size_t>(dim_));
    std::vector<std::uint16_t> idx(static_cast<std::size_t>(dim_), 0);
    long emitted = 0;
    for (int m = 1; emitted < count_; ++m) {
      if (m > 60000) {
        throw config_error("basis enumeration overflow");
      }
      // Lexicographic walk over {0..m-1}^d keeping max component == m - 1.
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        const bool in_block =
          std::any_of(idx.begin(), idx.end(), [&](std::uint16_t v) {
            return v == m - 1;
          });
        if (in_block) {
          indices_.insert(indices_.end(), idx.begin(), idx.end());
          ++emitted;
          max_freq_ = m;
          if (emitted == count_) {
            return;
          }
        }
        Eigen::Index k = dim_ - 1;
        for (;;) {
          if (idx[static_cast<std::size_t>(k)] + 1 < m) {
            ++idx[static_cast<std::size_t>(k)];
            break;
          }
          idx[static_cast<std::size_t>(k)] = 0;
          if (k == 0) {
            k = -1;
            break;
          }
          --k;
        }
        if (k < 0) {
          break; // block exhausted
        }
      }
    }
  }

  BasisFamily family_;
  Eigen::Index dim_;
  long count_;
  int max_freq_{ 1 };
  std::vector<std::uint16_t> indices_;
};

inline double projection_kernel_eval(const ProjectionBasis& b,
                                     const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& v)
{
  return b.kernel(u, v);
}

//! Rate-optimal basis count L = max(1, round(c * n^(2d / (d + 2(a+b))))).
inline long default_basis_count(long n, int d, double alpha, double beta,
                                double c = 1.0)
{
  if (n < 2 || d < 1 || !(alpha > 0.0) || !(beta > 0.0) || !(c > 0.0)) {
    throw config_error("default_basis_count: need n >= 2, d >= 1 and "
                       "positive alpha, beta, c");
  }
  const double exponent =
    2.0 * static_cast<double>(d) /
    (static_cast<double>(d) + 2.0 * (alpha + beta));
  const double value = c * std::pow(static_cast<double>(n), exponent);
  return std::max(1L, std::lround(value));
}

} // namespace wunt
