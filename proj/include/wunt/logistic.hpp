#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "wunt/common.hpp"

namespace wunt {

struct LogisticFit {
  Eigen::VectorXd coefficients; // intercept first
  int iterations{ 0 };
  double max_update{ 0.0 };
};

//! Maximum-likelihood logistic regression of z on [1, X] by Newton's
//! method with step halving. Deterministic: fixed start, iteration cap
//! 100, convergence tolerance 1e-10 on the coefficient update.
inline LogisticFit logistic_fit(const Eigen::MatrixXd& x,
                                const Eigen::VectorXi& z)
{
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  if (z.size() != n || n < 2) {
    throw std::invalid_argument("logistic_fit: bad shapes");
  }

  Eigen::MatrixXd design(n, p);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;

  auto log_likelihood = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log sigma(eta) and log(1 - sigma(eta)) in a stable form
      const double e = eta[i];
      const double log1p_exp = e > 0.0 ? e + std::log1p(std::exp(-e))
                                       : std::log1p(std::exp(e));
      ll += (z[i] == 1 ? e : 0.0) - log1p_exp;
    }
    return ll;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = log_likelihood(beta);
  constexpr int max_iter = 100;
  constexpr double tol = 1e-10;

  for (int iter = 1; iter <= max_iter; ++iter) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pr = 1.0 / (1.0 + std::exp(-eta[i]));
      prob[i] = pr;
      weight[i] = pr * (1.0 - pr);
    }
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      residual[i] = static_cast<double>(z[i]) - prob[i];
    }
    const Eigen::VectorXd score = design.transpose() * residual;
    const Eigen::MatrixXd hessian =
      design.transpose() * weight.asDiagonal() * design;

    Eigen::LDLT<Eigen::MatrixXd> solver(hessian);
    Eigen::VectorXd step = solver.solve(score);
    if (!step.allFinite()) {
      throw numeric_error("logistic_fit: singular Hessian (collinear "
                          "covariates?)");
    }

    // Step halving keeps the iteration monotone in the likelihood.
    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double candidate_ll = log_likelihood(candidate);
    int halvings = 0;
    while (candidate_ll < ll && halvings < 30) {
      scale *= 0.5;
      candidate = beta + scale * step;
      candidate_ll = log_likelihood(candidate);
      ++halvings;
    }
    const double max_update = (scale * step).cwiseAbs().maxCoeff();
    beta = candidate;
    ll = candidate_ll;

    if (max_update < tol) {
      return LogisticFit{ beta, iter, max_update };
    }
    if (beta.cwiseAbs().maxCoeff() > 40.0) {
      throw numeric_error("logistic_fit: coefficients diverging, likely "
                          "perfect separation");
    }
  }
  throw numeric_error("logistic_fit: no convergence within 100 iterations "
                      "(possible perfect separation)");
}

} // namespace wunt
