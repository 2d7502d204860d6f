#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wunt/common.hpp"
#include "wunt/estimator.hpp"
#include "wunt/rng.hpp"

namespace wunt {

//! The 1-D warm-up experiment: controls uniform on [0,1], treated drawn
//! from the Beta(2,2) density 6x(1-x), and a response that is either a
//! piecewise-constant pattern (rough) or the identity (smooth). Sweeping
//! the kernel bandwidth shows where the MSE of mu_CT bottoms out relative
//! to the density-estimation rule n^(-1/(1+2*beta)).

enum class WarmupResponse { rough, smooth };

inline std::string to_string(WarmupResponse r)
{
  return r == WarmupResponse::rough ? "rough" : "smooth";
}

struct WarmupConfig {
  Eigen::Index n0{ 2000 };
  Eigen::Index n1{ 2000 };
  int reps{ 50 };
  std::vector<double> bandwidth_grid;
  WarmupResponse response{ WarmupResponse::rough };
  double beta{ 1.0 };
  std::uint64_t seed{ 20240 };
};

struct WarmupRow {
  double bandwidth{ 0.0 };
  double mse{ 0.0 };
  double bias{ 0.0 };
  double variance{ 0.0 };
};

struct WarmupResult {
  std::vector<WarmupRow> rows;
  double best_bandwidth{ 0.0 };     // MSE-minimizing grid point
  double density_rule{ 0.0 };       // n^(-1/(1+2*beta))
  double true_mu_ct{ 0.0 };
};

namespace warmup_detail {

// Step values of the rough response on the intervals [k/8, (k+1)/8).
// The staircase descends where the treated density rises and climbs where
// it falls, so every jump pushes the smoothing bias the same way instead
// of cancelling against the smooth density.
inline constexpr std::array<double, 8> rough_steps = { 9.0, 6.0, 3.0, 0.0,
                                                       0.0, 3.0, 6.0, 9.0 };

inline double response(WarmupResponse kind, double x)
{
  if (kind == WarmupResponse::smooth) {
    return x;
  }
  auto k = static_cast<std::size_t>(x * 8.0);
  k = std::min<std::size_t>(k, 7);
  return rough_steps[k];
}

inline double beta22_cdf(double x)
{
  return x * x * (3.0 - 2.0 * x);
}

//! Exact mu_CT = int mu_C f_T for the two responses.
inline double true_mu_ct(WarmupResponse kind)
{
  if (kind == WarmupResponse::smooth) {
    return 0.5; // E[X] under Beta(2,2)
  }
  double total = 0.0;
  for (std::size_t k = 0; k < rough_steps.size(); ++k) {
    const double a = static_cast<double>(k) / 8.0;
    const double b = static_cast<double>(k + 1) / 8.0;
    total += rough_steps[k] * (beta22_cdf(b) - beta22_cdf(a));
  }
  return total;
}

inline constexpr std::uint64_t stream_control_x = 0x600;
inline constexpr std::uint64_t stream_treated_x = 0x610;
inline constexpr std::uint64_t stream_eps = 0x620;

//! Beta(2,2) draw as the median of three uniforms.
inline double beta22_draw(std::uint64_t seed, std::uint64_t row)
{
  const double a = rng::uniform01(seed, stream_treated_x, 3 * row);
  const double b = rng::uniform01(seed, stream_treated_x, 3 * row + 1);
  const double c = rng::uniform01(seed, stream_treated_x, 3 * row + 2);
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

} // namespace warmup_detail

inline WarmupResult run_warmup(const WarmupConfig& cfg)
{
  if (cfg.bandwidth_grid.empty()) {
    throw config_error("warm-up needs a non-empty bandwidth grid");
  }
  if (cfg.reps < 1 || cfg.n0 < 2 || cfg.n1 < 2) {
    throw config_error("warm-up needs reps >= 1 and group sizes >= 2");
  }

  const double truth = warmup_detail::true_mu_ct(cfg.response);
  const auto n_h = cfg.bandwidth_grid.size();
  const auto reps = static_cast<std::size_t>(cfg.reps);

  // errors[h][r] = mu_hat - truth; NaN marks an overlap failure.
  std::vector<std::vector<double>> errors(
    n_h,
    std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));

  parallel_blocks(reps, 1, [&](std::size_t, std::size_t begin,
                               std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const std::uint64_t seed = cfg.seed ^ static_cast<std::uint64_t>(r);
      Dataset ds;
      ds.covariates.resize(cfg.n0 + cfg.n1, 1);
      ds.treatment.resize(cfg.n0 + cfg.n1);
      Eigen::VectorXd outcome(cfg.n0 + cfg.n1);
      ds.covariate_names = { "X1" };
      for (Eigen::Index i = 0; i < cfg.n1; ++i) {
        const double x =
          warmup_detail::beta22_draw(seed, static_cast<std::uint64_t>(i));
        ds.covariates(i, 0) = x;
        ds.treatment[i] = 1;
        outcome[i] =
          warmup_detail::response(cfg.response, x) +
          rng::normal(seed, warmup_detail::stream_eps,
                      static_cast<std::uint64_t>(i));
      }
      for (Eigen::Index i = 0; i < cfg.n0; ++i) {
        const double x = rng::uniform01(seed, warmup_detail::stream_control_x,
                                        static_cast<std::uint64_t>(i));
        const Eigen::Index row = cfg.n1 + i;
        ds.covariates(row, 0) = x;
        ds.treatment[row] = 0;
        outcome[row] =
          warmup_detail::response(cfg.response, x) +
          rng::normal(seed, warmup_detail::stream_eps,
                      static_cast<std::uint64_t>(cfg.n1 + i));
      }
      ds.outcome = std::move(outcome);

      const UniformTransformer identity = UniformTransformer::identity(1);
      for (std::size_t hi = 0; hi < n_h; ++hi) {
        Eigen::VectorXd h(1);
        h[0] = cfg.bandwidth_grid[hi];
        try {
          const EstimateReport report = estimate_kernel(
            ds, identity, ProductKernel::for_order(2, h));
          errors[hi][r] = report.mu_ct_hat - truth;
        } catch (const numeric_error&) {
          // leave NaN
        }
      }
    }
  });

  WarmupResult result;
  result.true_mu_ct = truth;
  result.density_rule =
    std::pow(static_cast<double>(cfg.n0 + cfg.n1), -1.0 / (1.0 + 2.0 * cfg.beta));
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    CompensatedSum sum, sum_sq;
    int used = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = errors[hi][r];
      if (std::isnan(e)) {
        continue;
      }
      sum.add(e);
      sum_sq.add(e * e);
      ++used;
    }
    WarmupRow row;
    row.bandwidth = cfg.bandwidth_grid[hi];
    if (used > 0) {
      const double m = static_cast<double>(used);
      row.mse = sum_sq.value() / m;
      row.bias = sum.value() / m;
      row.variance = row.mse - row.bias * row.bias;
    } else {
      row.mse = std::numeric_limits<double>::quiet_NaN();
      row.bias = row.variance = row.mse;
    }
    result.rows.push_back(row);
    if (used > 0 && row.mse < best_mse) {
      best_mse = row.mse;
      result.best_bandwidth = row.bandwidth;
    }
  }
  return result;
}

//! Log-spaced default grid for the warm-up sweep.
inline std::vector<double> warmup_default_grid(double lo = 0.002,
                                               double hi = 0.5,
                                               int points = 10)
{
  if (!(lo > 0.0) || !(hi > lo) || points < 1) {
    throw config_error("bad warm-up grid");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  }
  return grid;
}

} // namespace wunt
