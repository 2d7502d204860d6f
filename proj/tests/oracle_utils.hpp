// Test-only oracles: quadrature, direct double-loop estimators and random
// instance generators. Everything here is independent of the library's
// computation paths it is used to check.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "wunt/basis.hpp"
#include "wunt/dataset.hpp"
#include "wunt/kernels.hpp"
#include "wunt/transformer.hpp"

namespace oracle {

//! Composite Simpson rule; n must be even.
template<typename F>
double simpson(F f, double a, double b, int n = 20000)
{
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return s * h / 3.0;
}

//! Midpoint rule, used where the integrand is piecewise constant on a
//! dyadic grid (Haar basis).
template<typename F>
double midpoint(F f, double a, double b, int n)
{
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    s += f(a + (i + 0.5) * h);
  }
  return s * h;
}

//! Eq.-style direct evaluation of the kernel ratio over all n x n pairs,
//! naive summation.
inline double direct_mu_kernel(const wunt::Dataset& ds,
                               const wunt::UniformTransformer& t,
                               const wunt::ProductKernel& kernel)
{
  const Eigen::Index n = ds.n();
  std::vector<Eigen::VectorXd> u(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    u[static_cast<std::size_t>(i)] = t.apply(ds.covariates.row(i));
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index i1 = 0; i1 < n; ++i1) {
    for (Eigen::Index i2 = 0; i2 < n; ++i2) {
      const double k = kernel(u[static_cast<std::size_t>(i1)],
                              u[static_cast<std::size_t>(i2)]);
      const double c = (1.0 - ds.treatment[i1]) * k * ds.treatment[i2];
      num += (*ds.outcome)[i1] * c;
      den += c;
    }
  }
  if (den == 0.0) {
    throw std::runtime_error("oracle: zero denominator");
  }
  return num / den;
}

inline double direct_mu_projection(const wunt::Dataset& ds,
                                   const wunt::UniformTransformer& t,
                                   const wunt::ProjectionBasis& basis)
{
  const Eigen::Index n = ds.n();
  std::vector<Eigen::VectorXd> u(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    u[static_cast<std::size_t>(i)] = t.apply(ds.covariates.row(i));
  }
  double num = 0.0, den = 0.0;
  for (Eigen::Index i1 = 0; i1 < n; ++i1) {
    for (Eigen::Index i2 = 0; i2 < n; ++i2) {
      const double k = basis.kernel(u[static_cast<std::size_t>(i1)],
                                    u[static_cast<std::size_t>(i2)]);
      const double c = (1.0 - ds.treatment[i1]) * k * ds.treatment[i2];
      num += (*ds.outcome)[i1] * c;
      den += c;
    }
  }
  if (den == 0.0) {
    throw std::runtime_error("oracle: zero denominator");
  }
  return num / den;
}

//! Random estimation instance with covariates in [0,1]^d and at least two
//! rows in each group.
inline wunt::Dataset random_instance(std::mt19937_64& gen, Eigen::Index n,
                                     Eigen::Index d)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  wunt::Dataset ds;
  ds.covariates.resize(n, d);
  ds.treatment.resize(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      ds.covariates(i, k) = unif(gen);
    }
    y[i] = normal(gen);
    ds.treatment[i] = i % 2 == 0 ? 0 : 1; // balanced groups by construction
  }
  // shuffle treatment labels for variety while keeping both groups
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    const Eigen::Index j = pick(gen);
    std::swap(ds.treatment[i], ds.treatment[j]);
  }
  ds.outcome = std::move(y);
  ds.covariate_names.clear();
  for (Eigen::Index k = 0; k < d; ++k) {
    ds.covariate_names.push_back("X" + std::to_string(k + 1));
  }
  return ds;
}

inline double relative_diff(double a, double b)
{
  const double scale = std::max({ std::abs(a), std::abs(b), 1e-300 });
  return std::abs(a - b) / scale;
}

} // namespace oracle
