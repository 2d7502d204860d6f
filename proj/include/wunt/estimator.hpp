#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wunt/basis.hpp"
#include "wunt/common.hpp"
#include "wunt/dataset.hpp"
#include "wunt/kernels.hpp"
#include "wunt/logistic.hpp"
#include "wunt/transformer.hpp"

namespace wunt {

enum class EstimatorKind {
  kernel,
  projection,
  ipw_logistic,
};

inline std::string to_string(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::kernel:
      return "kernel";
    case EstimatorKind::projection:
      return "projection";
    case EstimatorKind::ipw_logistic:
      return "ipw-logistic";
  }
  return "unknown";
}

//! Point estimates, exported weights and diagnostics for one run.
struct EstimateReport {
  double mu_ct_hat{ 0.0 };
  double tau_att_hat{ 0.0 };
  Eigen::VectorXd weights; // 1 for treated rows, normalized over controls
  EstimatorKind kind{ EstimatorKind::kernel };
  nlohmann::json config;
  double numerator{ 0.0 };
  double denominator{ 0.0 };
  Eigen::Index n0{ 0 };
  Eigen::Index n1{ 0 };
  double seconds{ 0.0 };
};

namespace detail {

struct Groups {
  std::vector<Eigen::Index> controls;
  std::vector<Eigen::Index> treated;
};

inline Groups split_groups(const Dataset& ds)
{
  Groups g{ ds.control_rows(), ds.treated_rows() };
  if (g.controls.empty() || g.treated.empty()) {
    throw schema_error("estimation needs both treatment groups non-empty");
  }
  return g;
}

inline double treated_mean(const Dataset& ds,
                           const std::vector<Eigen::Index>& treated)
{
  CompensatedSum acc;
  for (Eigen::Index i : treated) {
    acc.add((*ds.outcome)[i]);
  }
  return acc.value() / static_cast<double>(treated.size());
}

//! Turns per-control density values s_i into the ratio estimate and the
//! exported weights. The values are normalized by their largest magnitude
//! first, which keeps the ratio scale-free: when every s_i is identical
//! the estimate reduces to the plain control mean, bit for bit.
inline EstimateReport finalize_ratio(const Dataset& ds, const Groups& groups,
                                     std::vector<double> density,
                                     EstimatorKind kind)
{
  const auto n0 = static_cast<Eigen::Index>(groups.controls.size());
  const auto n1 = static_cast<Eigen::Index>(groups.treated.size());

  double ref = 0.0;
  for (double s : density) {
    ref = std::max(ref, std::abs(s));
  }
  if (ref == 0.0) {
    throw overlap_error("all control density values are zero: total overlap "
                        "failure at this smoothing level");
  }

  CompensatedSum den_acc, num_acc;
  for (std::size_t t = 0; t < density.size(); ++t) {
    const double scaled = density[t] / ref;
    den_acc.add(scaled);
    num_acc.add((*ds.outcome)[groups.controls[t]] * scaled);
  }
  const double den = den_acc.value();
  const double num = num_acc.value();
  if (std::abs(den) < 1e-12 * static_cast<double>(n0)) {
    throw overlap_error("U-statistic denominator below the overlap "
                        "threshold: weights are not identified at this "
                        "smoothing level");
  }

  EstimateReport report;
  report.kind = kind;
  report.n0 = n0;
  report.n1 = n1;
  report.mu_ct_hat = num / den;
  report.tau_att_hat = treated_mean(ds, groups.treated) - report.mu_ct_hat;
  report.numerator = num * ref;
  report.denominator = den * ref;
  report.weights = Eigen::VectorXd::Ones(ds.n());
  for (std::size_t t = 0; t < density.size(); ++t) {
    report.weights[groups.controls[t]] = (density[t] / ref) / den;
  }
  return report;
}

} // namespace detail

//! Kernel estimator of mu_CT: the ratio of the two pairwise sums
//! sum Y_i (1-Z_i) K_H(U_i - U_j) Z_j over sum (1-Z_i) K_H(U_i - U_j) Z_j.
//! The control x treated pair sums run in fixed-size blocks with
//! compensated accumulation, so results are bit-stable across thread
//! counts.
inline EstimateReport estimate_kernel(const Dataset& ds,
                                      const UniformTransformer& t,
                                      const ProductKernel& kernel)
{
  const auto start = std::chrono::steady_clock::now();
  validate_for_estimation(ds);
  if (kernel.dim() != ds.dim()) {
    throw config_error("kernel bandwidth dimension mismatch");
  }
  const auto groups = detail::split_groups(ds);
  const Eigen::MatrixXd unit = t.apply_rows(ds.covariates);

  // Row-major copies of each group for cache-friendly pair scans.
  const auto n0 = groups.controls.size();
  const auto n1 = groups.treated.size();
  const auto d = static_cast<std::size_t>(ds.dim());
  std::vector<double> control_pts(n0 * d), treated_pts(n1 * d);
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      control_pts[i * d + k] =
        unit(groups.controls[i], static_cast<Eigen::Index>(k));
    }
  }
  for (std::size_t j = 0; j < n1; ++j) {
    for (std::size_t k = 0; k < d; ++k) {
      treated_pts[j * d + k] =
        unit(groups.treated[j], static_cast<Eigen::Index>(k));
    }
  }

  std::vector<double> density(n0, 0.0);
  parallel_blocks(n0, 128, [&](std::size_t, std::size_t begin,
                               std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum acc;
      const double* u = &control_pts[i * d];
      for (std::size_t j = 0; j < n1; ++j) {
        acc.add(kernel(u, &treated_pts[j * d]));
      }
      density[i] = acc.value();
    }
  });

  EstimateReport report =
    detail::finalize_ratio(ds, groups, std::move(density),
                           EstimatorKind::kernel);
  report.config = { { "estimator", "kernel" },
                    { "kernel.family", to_string(kernel.family()) },
                    { "kernel.order", kernel.order() },
                    { "kernel.bandwidth",
                      std::vector<double>(kernel.bandwidths().begin(),
                                          kernel.bandwidths().end()) },
                    { "transformer", to_string(t.kind()) } };
  report.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return report;
}

//! Projection estimator of mu_CT. Uses the factored form: per-basis
//! treated means r_l combined with per-control basis values, an
//! O((n0 + n1) L) computation that matches the direct double sum.
inline EstimateReport estimate_projection(const Dataset& ds,
                                          const UniformTransformer& t,
                                          const ProjectionBasis& basis)
{
  const auto start = std::chrono::steady_clock::now();
  validate_for_estimation(ds);
  if (basis.dim() != ds.dim()) {
    throw config_error("basis dimension mismatch");
  }
  const auto groups = detail::split_groups(ds);
  const Eigen::MatrixXd unit = t.apply_rows(ds.covariates);

  const auto L = static_cast<std::size_t>(basis.count());
  const auto n1 = groups.treated.size();
  const auto n0 = groups.controls.size();
  const auto d = static_cast<std::size_t>(ds.dim());
  const auto scratch_size =
    d * static_cast<std::size_t>(basis.max_frequency());

  // r_l = (1/n1) sum over treated of psi_l(U_i), block-reduced in order.
  const std::size_t block = 256;
  const std::size_t nblocks = (n1 + block - 1) / block;
  std::vector<std::vector<double>> partial(nblocks);
  parallel_blocks(n1, block, [&](std::size_t b, std::size_t begin,
                                 std::size_t end) {
    std::vector<double> local(L, 0.0);
    std::vector<double> values(L), scratch(scratch_size);
    Eigen::VectorXd point(ds.dim());
    for (std::size_t j = begin; j < end; ++j) {
      point = unit.row(groups.treated[j]);
      basis.eval_point(point.data(), values.data(), scratch.data());
      for (std::size_t l = 0; l < L; ++l) {
        local[l] += values[l];
      }
    }
    partial[b] = std::move(local);
  });
  std::vector<double> coeff(L, 0.0);
  for (std::size_t b = 0; b < nblocks; ++b) {
    for (std::size_t l = 0; l < L; ++l) {
      coeff[l] += partial[b][l];
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    coeff[l] /= static_cast<double>(n1);
  }

  std::vector<double> density(n0, 0.0);
  parallel_blocks(n0, 256, [&](std::size_t, std::size_t begin,
                               std::size_t end) {
    std::vector<double> values(L), scratch(scratch_size);
    Eigen::VectorXd point(ds.dim());
    for (std::size_t i = begin; i < end; ++i) {
      point = unit.row(groups.controls[i]);
      basis.eval_point(point.data(), values.data(), scratch.data());
      CompensatedSum acc;
      for (std::size_t l = 0; l < L; ++l) {
        acc.add(coeff[l] * values[l]);
      }
      density[i] = acc.value();
    }
  });

  EstimateReport report =
    detail::finalize_ratio(ds, groups, std::move(density),
                           EstimatorKind::projection);
  report.config = { { "estimator", "projection" },
                    { "basis.family", to_string(basis.family()) },
                    { "basis.count", basis.count() },
                    { "transformer", to_string(t.kind()) } };
  report.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return report;
}

//! Logistic-IPW baseline: fit Z ~ [1, X] by maximum likelihood and use
//! Hajek-normalized odds pi/(1-pi) as control weights.
inline EstimateReport estimate_ipw_logistic(const Dataset& ds)
{
  const auto start = std::chrono::steady_clock::now();
  validate_for_estimation(ds);
  const auto groups = detail::split_groups(ds);

  const LogisticFit fit = logistic_fit(ds.covariates, ds.treatment);
  std::vector<double> odds(groups.controls.size());
  for (std::size_t i = 0; i < groups.controls.size(); ++i) {
    const Eigen::Index row = groups.controls[i];
    double eta = fit.coefficients[0];
    for (Eigen::Index k = 0; k < ds.dim(); ++k) {
      eta += fit.coefficients[k + 1] * ds.covariates(row, k);
    }
    odds[i] = std::exp(eta); // pi/(1-pi)
  }

  EstimateReport report = detail::finalize_ratio(
    ds, groups, std::move(odds), EstimatorKind::ipw_logistic);
  report.config = { { "estimator", "ipw-logistic" },
                    { "iterations", fit.iterations } };
  report.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  return report;
}

//! Which sample size feeds the bandwidth / basis-count rules when the
//! groups differ.
enum class SampleSizeRule { total, control, treated };

inline std::string to_string(SampleSizeRule rule)
{
  switch (rule) {
    case SampleSizeRule::total:
      return "total";
    case SampleSizeRule::control:
      return "control";
    case SampleSizeRule::treated:
      return "treated";
  }
  return "unknown";
}

inline SampleSizeRule sample_size_rule_from_string(const std::string& name)
{
  if (name == "total") {
    return SampleSizeRule::total;
  }
  if (name == "control") {
    return SampleSizeRule::control;
  }
  if (name == "treated") {
    return SampleSizeRule::treated;
  }
  throw config_error("unknown sample-size rule '" + name + "'");
}

//! A fully resolved estimator configuration. Zero-valued tuning fields
//! fall back to the rate-optimal rules driven by (alpha, beta, c).
struct EstimatorSpec {
  EstimatorKind kind{ EstimatorKind::kernel };
  TransformerKind transformer{ TransformerKind::adaptive };
  bool use_extra{ false }; // build the transformer on the unlabeled pool
  double alpha{ 1.0 };
  double beta{ 1.0 };
  double scale_c{ 1.0 };
  int kernel_order{ 0 };        // 0: derived from alpha + beta
  Eigen::VectorXd bandwidth;    // empty: rate rule
  long basis_count{ 0 };        // 0: rate rule
  BasisFamily basis_family{ BasisFamily::tensor_cosine };
  SampleSizeRule n_rule{ SampleSizeRule::total };
  double margin{ 0.01 };
  std::string label;
};

//! Parses tokens like "kernel+marginal", "projection+joint+extra", "ipw".
inline EstimatorSpec parse_estimator_spec(const std::string& token)
{
  EstimatorSpec spec;
  spec.label = token;
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = token.find('+', start);
    if (pos == std::string::npos) {
      parts.push_back(token.substr(start));
      break;
    }
    parts.push_back(token.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.empty() || parts[0].empty()) {
    throw config_error("empty estimator spec");
  }
  if (parts[0] == "kernel") {
    spec.kind = EstimatorKind::kernel;
  } else if (parts[0] == "projection") {
    spec.kind = EstimatorKind::projection;
  } else if (parts[0] == "ipw" || parts[0] == "ipw-logistic") {
    spec.kind = EstimatorKind::ipw_logistic;
    if (parts.size() > 1) {
      throw config_error("ipw takes no transformer: '" + token + "'");
    }
    return spec;
  } else {
    throw config_error("unknown estimator '" + parts[0] + "'");
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "extra") {
      spec.use_extra = true;
    } else {
      spec.transformer = transformer_kind_from_string(parts[i]);
    }
  }
  return spec;
}

//! Runs one estimator end to end: builds the transformer the spec asks
//! for (on the unlabeled pool when requested) and dispatches on the kind.
inline EstimateReport run_estimator(
  const EstimatorSpec& spec,
  const Dataset& ds,
  const std::optional<Dataset>& unlabeled = std::nullopt)
{
  if (spec.kind == EstimatorKind::ipw_logistic) {
    return estimate_ipw_logistic(ds);
  }
  if (spec.use_extra && !unlabeled) {
    throw config_error("estimator '" + spec.label +
                       "' needs unlabeled data");
  }
  const std::optional<Dataset>& pool =
    spec.use_extra || spec.transformer == TransformerKind::rosenblatt_plugin
      ? unlabeled
      : std::nullopt;
  const UniformTransformer transformer =
    make_transformer(spec.transformer, ds, pool, spec.margin);

  long n_used = 0;
  switch (spec.n_rule) {
    case SampleSizeRule::total:
      n_used = static_cast<long>(ds.n());
      break;
    case SampleSizeRule::control:
      n_used = static_cast<long>(ds.n0());
      break;
    case SampleSizeRule::treated:
      n_used = static_cast<long>(ds.n1());
      break;
  }

  if (spec.kind == EstimatorKind::kernel) {
    Eigen::VectorXd h = spec.bandwidth;
    if (h.size() == 0) {
      h = Eigen::VectorXd::Constant(
        ds.dim(), default_bandwidth(n_used, static_cast<int>(ds.dim()),
                                    spec.alpha, spec.beta, spec.scale_c));
    } else if (h.size() == 1 && ds.dim() > 1) {
      h = Eigen::VectorXd::Constant(ds.dim(), h[0]);
    }
    const int order = spec.kernel_order > 0
                        ? spec.kernel_order
                        : default_kernel_order(spec.alpha, spec.beta);
    EstimateReport report =
      estimate_kernel(ds, transformer, ProductKernel::for_order(order, h));
    report.config["smoothness.alpha"] = spec.alpha;
    report.config["smoothness.beta"] = spec.beta;
    report.config["scale.c"] = spec.scale_c;
    return report;
  }

  long count = spec.basis_count;
  if (count == 0) {
    count = default_basis_count(n_used, static_cast<int>(ds.dim()),
                                spec.alpha, spec.beta, spec.scale_c);
  }
  EstimateReport report = estimate_projection(
    ds, transformer, ProjectionBasis(spec.basis_family, ds.dim(), count));
  report.config["smoothness.alpha"] = spec.alpha;
  report.config["smoothness.beta"] = spec.beta;
  report.config["scale.c"] = spec.scale_c;
  return report;
}

//! Writes per-unit weights as CSV (row, Z, w). With clip_negative,
//! negative control weights are clipped to zero and the rest renormalized;
//! the estimator itself never clips.
inline void export_weights(const EstimateReport& report,
                           const Dataset& ds,
                           const std::string& path,
                           bool clip_negative = false)
{
  if (report.weights.size() != ds.n()) {
    throw config_error("export_weights: report does not match dataset");
  }
  Eigen::VectorXd w = report.weights;
  if (clip_negative) {
    CompensatedSum positive;
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.treatment[i] == 0) {
        if (w[i] < 0.0) {
          w[i] = 0.0;
        } else {
          positive.add(w[i]);
        }
      }
    }
    const double total = positive.value();
    if (total <= 0.0) {
      throw numeric_error("export_weights: no positive control weight left "
                          "after clipping");
    }
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
      if (ds.treatment[i] == 0) {
        w[i] /= total;
      }
    }
  }

  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot write '" + path + "'");
  }
  out << "row,Z,w\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    out << i << ',' << ds.treatment[i] << ','
        << detail::format_number(w[i]) << '\n';
  }
  if (!out) {
    throw io_error("write failed for '" + path + "'");
  }
}

} // namespace wunt
