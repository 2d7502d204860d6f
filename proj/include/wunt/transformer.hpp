#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wunt/common.hpp"
#include "wunt/dataset.hpp"
#include "wunt/partition.hpp"
#include "wunt/smoothing.hpp"

namespace wunt {

//! Smoothed empirical CDF of one coordinate: the d = 1 adaptive
//! construction with one point per interval (N0 = n0).
class MarginalSmoothedCdf {
public:
  MarginalSmoothedCdf() = default;

  //! Fits from raw values already mapped into [0,1].
  static MarginalSmoothedCdf fit(std::vector<double> unit_values)
  {
    if (unit_values.empty()) {
      throw std::invalid_argument("marginal cdf: no points");
    }
    std::sort(unit_values.begin(), unit_values.end());
    if (!(unit_values.front() >= 0.0 && unit_values.back() <= 1.0)) {
      throw std::invalid_argument("marginal cdf: values outside [0,1]");
    }
    MarginalSmoothedCdf cdf;
    cdf.breaks_.resize(unit_values.size() + 1);
    cdf.breaks_.front() = 0.0;
    cdf.breaks_.back() = 1.0;
    for (std::size_t j = 0; j + 1 < unit_values.size(); ++j) {
      cdf.breaks_[j + 1] = 0.5 * (unit_values[j] + unit_values[j + 1]);
    }
    return cdf;
  }

  double operator()(double x) const
  {
    const std::size_t j = detail::locate_interval(breaks_, x);
    return detail::smoothed_coordinate(breaks_, j, x);
  }

  const std::vector<double>& breaks() const { return breaks_; }

private:
  std::vector<double> breaks_;
};

enum class TransformerKind {
  identity,
  rosenblatt_plugin,
  marginal,
  adaptive,
};

inline std::string to_string(TransformerKind kind)
{
  switch (kind) {
    case TransformerKind::identity:
      return "identity";
    case TransformerKind::rosenblatt_plugin:
      return "plugin";
    case TransformerKind::marginal:
      return "marginal";
    case TransformerKind::adaptive:
      return "adaptive";
  }
  return "unknown";
}

inline TransformerKind transformer_kind_from_string(const std::string& name)
{
  if (name == "identity") {
    return TransformerKind::identity;
  }
  if (name == "plugin" || name == "rosenblatt-plugin") {
    return TransformerKind::rosenblatt_plugin;
  }
  if (name == "marginal") {
    return TransformerKind::marginal;
  }
  if (name == "adaptive" || name == "joint") {
    return TransformerKind::adaptive;
  }
  throw config_error("unknown transformer '" + name + "'");
}

//! A uniform transformer maps covariates toward the uniform distribution
//! on [0,1]^d, composing the affine rescale with one of the constructions:
//! identity, plug-in marginal CDFs, smoothed empirical marginals, or the
//! adaptive partition. Immutable and reentrant once built.
class UniformTransformer {
public:
  using CdfFn = std::function<double(double)>;

  static UniformTransformer identity(Eigen::Index dim)
  {
    UniformTransformer t;
    t.kind_ = TransformerKind::identity;
    t.dim_ = dim;
    t.rescale_ = RescaleMap::identity(dim);
    return t;
  }

  static UniformTransformer adaptive(Partition partition, RescaleMap rescale)
  {
    UniformTransformer t;
    t.kind_ = TransformerKind::adaptive;
    t.dim_ = partition.dim();
    t.partition_ = std::make_shared<Partition>(std::move(partition));
    t.rescale_ = std::move(rescale);
    return t;
  }

  static UniformTransformer marginal(std::vector<MarginalSmoothedCdf> maps,
                                     RescaleMap rescale)
  {
    UniformTransformer t;
    t.kind_ = TransformerKind::marginal;
    t.dim_ = static_cast<Eigen::Index>(maps.size());
    t.marginals_ = std::move(maps);
    t.rescale_ = std::move(rescale);
    return t;
  }

  static UniformTransformer plugin(std::vector<CdfFn> cdfs, RescaleMap rescale)
  {
    UniformTransformer t;
    t.kind_ = TransformerKind::rosenblatt_plugin;
    t.dim_ = static_cast<Eigen::Index>(cdfs.size());
    t.cdfs_ = std::move(cdfs);
    t.rescale_ = std::move(rescale);
    return t;
  }

  TransformerKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const RescaleMap& rescale() const { return rescale_; }

  const Partition& partition() const
  {
    if (!partition_) {
      throw std::logic_error("transformer has no partition");
    }
    return *partition_;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const
  {
    if (x.size() != dim_) {
      throw std::invalid_argument("transformer: dimension mismatch");
    }
    switch (kind_) {
      case TransformerKind::identity:
        return x;
      case TransformerKind::adaptive:
        return partition_->transform(rescale_.apply(x));
      case TransformerKind::marginal: {
        Eigen::VectorXd out(dim_);
        for (Eigen::Index k = 0; k < dim_; ++k) {
          out[k] =
            marginals_[static_cast<std::size_t>(k)](rescale_.apply(k, x[k]));
        }
        return out;
      }
      case TransformerKind::rosenblatt_plugin: {
        Eigen::VectorXd out(dim_);
        for (Eigen::Index k = 0; k < dim_; ++k) {
          out[k] = cdfs_[static_cast<std::size_t>(k)](rescale_.apply(k, x[k]));
        }
        return out;
      }
    }
    throw std::logic_error("unreachable");
  }

  //! Transforms many rows; rows are independent, so they run in
  //! fixed-size blocks across workers.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const
  {
    Eigen::MatrixXd out(x.rows(), x.cols());
    parallel_blocks(static_cast<std::size_t>(x.rows()), 512,
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        out.row(static_cast<Eigen::Index>(i)) =
                          apply(x.row(static_cast<Eigen::Index>(i)));
                      }
                    });
    return out;
  }

private:
  TransformerKind kind_{ TransformerKind::identity };
  Eigen::Index dim_{ 0 };
  RescaleMap rescale_;
  std::shared_ptr<const Partition> partition_;
  std::vector<MarginalSmoothedCdf> marginals_;
  std::vector<CdfFn> cdfs_;
};

//! Marginal uniform transformer: one smoothed empirical CDF per
//! coordinate, fitted on control points already in the unit cube.
inline UniformTransformer build_marginal(const Eigen::MatrixXd& unit_points,
                                         RescaleMap rescale)
{
  if (unit_points.rows() < 1) {
    throw std::invalid_argument("build_marginal: no points");
  }
  std::vector<MarginalSmoothedCdf> maps;
  maps.reserve(static_cast<std::size_t>(unit_points.cols()));
  for (Eigen::Index k = 0; k < unit_points.cols(); ++k) {
    std::vector<double> col(static_cast<std::size_t>(unit_points.rows()));
    for (Eigen::Index i = 0; i < unit_points.rows(); ++i) {
      col[static_cast<std::size_t>(i)] = unit_points(i, k);
    }
    maps.push_back(MarginalSmoothedCdf::fit(std::move(col)));
  }
  return UniformTransformer::marginal(std::move(maps), std::move(rescale));
}

//! Plug-in Rosenblatt transformer from closed-form per-dimension CDFs
//! (product-of-marginals density model).
inline UniformTransformer build_rosenblatt_plugin(
  std::vector<UniformTransformer::CdfFn> cdfs,
  RescaleMap rescale)
{
  if (cdfs.empty()) {
    throw config_error("plug-in transformer needs at least one marginal CDF");
  }
  for (const auto& cdf : cdfs) {
    if (!cdf) {
      throw config_error("plug-in density model lacks CDF evaluation");
    }
  }
  return UniformTransformer::plugin(std::move(cdfs), std::move(rescale));
}

//! Plug-in transformer fitted on extra unlabeled control covariates:
//! per-dimension smoothed empirical CDFs.
inline UniformTransformer build_rosenblatt_plugin(
  const Eigen::MatrixXd& unit_points,
  RescaleMap rescale)
{
  UniformTransformer marginal = build_marginal(unit_points, rescale);
  return marginal; // product-of-marginals model: identical evaluation path
}

//! Applies the transformer to every covariate row; treatment and outcome
//! pass through untouched.
inline Dataset transform_dataset(const UniformTransformer& t,
                                 const Dataset& ds)
{
  if (ds.dim() != t.dim()) {
    throw config_error("transform_dataset: dimension mismatch");
  }
  Dataset out = ds;
  out.covariates = t.apply_rows(ds.covariates);
  return out;
}

//! Assembles the transformer an estimator run needs: the rescale is
//! fitted on everything that will be transformed (all labeled rows plus
//! any unlabeled pool), and the construction set is the unlabeled pool
//! when one is supplied, otherwise the labeled controls.
inline UniformTransformer make_transformer(
  TransformerKind kind,
  const Dataset& labeled,
  const std::optional<Dataset>& unlabeled = std::nullopt,
  double margin = 0.01)
{
  if (kind == TransformerKind::identity) {
    return UniformTransformer::identity(labeled.dim());
  }

  Eigen::MatrixXd controls = labeled.control_covariates();
  Eigen::MatrixXd treated = labeled.treated_covariates();
  if (controls.rows() == 0 || treated.rows() == 0) {
    throw schema_error("transformer construction needs both groups");
  }

  Eigen::MatrixXd build_set;
  RescaleMap rescale;
  if (unlabeled) {
    if (unlabeled->dim() != labeled.dim()) {
      throw config_error("unlabeled data: dimension mismatch");
    }
    Eigen::MatrixXd pool(controls.rows() + unlabeled->covariates.rows(),
                         controls.cols());
    pool.topRows(controls.rows()) = controls;
    pool.bottomRows(unlabeled->covariates.rows()) = unlabeled->covariates;
    rescale = fit_rescale(pool, treated, margin);
    build_set = rescale.apply_rows(unlabeled->covariates);
  } else {
    rescale = fit_rescale(controls, treated, margin);
    build_set = rescale.apply_rows(controls);
  }

  switch (kind) {
    case TransformerKind::adaptive:
      return UniformTransformer::adaptive(build_adaptive(build_set), rescale);
    case TransformerKind::marginal:
      return build_marginal(build_set, rescale);
    case TransformerKind::rosenblatt_plugin:
      if (!unlabeled) {
        throw config_error("plug-in transformer requires unlabeled data "
                           "(--unlabeled)");
      }
      return build_rosenblatt_plugin(build_set, rescale);
    case TransformerKind::identity:
      break;
  }
  throw std::logic_error("unreachable");
}

} // namespace wunt
