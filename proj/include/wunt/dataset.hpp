#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wunt/common.hpp"

namespace wunt {

//! Observational dataset: covariates X (n×d), binary treatment Z and an
//! optional outcome Y. Immutable by convention after construction.
struct Dataset {
  Eigen::MatrixXd covariates;
  Eigen::VectorXi treatment;
  std::optional<Eigen::VectorXd> outcome;
  std::vector<std::string> covariate_names;
  std::string treatment_name = "Z";
  std::string outcome_name = "Y";

  Eigen::Index n() const { return covariates.rows(); }
  Eigen::Index dim() const { return covariates.cols(); }

  Eigen::Index n1() const
  {
    return std::count(treatment.begin(), treatment.end(), 1);
  }
  Eigen::Index n0() const { return n() - n1(); }

  std::vector<Eigen::Index> control_rows() const
  {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n(); ++i) {
      if (treatment[i] == 0) {
        rows.push_back(i);
      }
    }
    return rows;
  }

  std::vector<Eigen::Index> treated_rows() const
  {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n(); ++i) {
      if (treatment[i] == 1) {
        rows.push_back(i);
      }
    }
    return rows;
  }

  Eigen::MatrixXd control_covariates() const
  {
    auto rows = control_rows();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) = covariates.row(rows[k]);
    }
    return out;
  }

  Eigen::MatrixXd treated_covariates() const
  {
    auto rows = treated_rows();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) = covariates.row(rows[k]);
    }
    return out;
  }
};

//! Checks the invariants estimation relies on: outcomes present, both
//! treatment groups non-empty, finite entries.
inline void validate_for_estimation(const Dataset& ds)
{
  if (ds.n() < 2) {
    throw schema_error("dataset has fewer than 2 rows");
  }
  if (!ds.outcome) {
    throw schema_error("dataset has no outcome column '" + ds.outcome_name +
                       "'");
  }
  const Eigen::Index n1 = ds.n1();
  if (n1 == 0 || n1 == ds.n()) {
    throw schema_error("dataset needs at least one treated and one control "
                       "row");
  }
}

//! Per-dimension affine map sending [lo_k, hi_k] onto [margin, 1 - margin].
class RescaleMap {
public:
  RescaleMap() = default;

  RescaleMap(Eigen::VectorXd lo, Eigen::VectorXd hi, double margin)
    : lo_(std::move(lo))
    , hi_(std::move(hi))
    , margin_(margin)
  {
  }

  static RescaleMap identity(Eigen::Index dim)
  {
    RescaleMap map;
    map.lo_ = Eigen::VectorXd::Zero(dim);
    map.hi_ = Eigen::VectorXd::Ones(dim);
    map.margin_ = 0.0;
    return map;
  }

  Eigen::Index dim() const { return lo_.size(); }
  double margin() const { return margin_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  double apply(Eigen::Index k, double x) const
  {
    const double span = hi_[k] - lo_[k];
    return margin_ + (1.0 - 2.0 * margin_) * (x - lo_[k]) / span;
  }

  double invert(Eigen::Index k, double u) const
  {
    const double span = hi_[k] - lo_[k];
    return lo_[k] + (u - margin_) / (1.0 - 2.0 * margin_) * span;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const
  {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      out[k] = apply(k, x[k]);
    }
    return out;
  }

  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const
  {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        out(i, k) = apply(k, x(i, k));
      }
    }
    return out;
  }

private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  double margin_{ 0.0 };
};

//! Fits the affine rescale on the union of control and treated covariates,
//! so every observed point lands in [margin, 1 - margin]^d.
inline RescaleMap fit_rescale(const Eigen::MatrixXd& control_covariates,
                              const Eigen::MatrixXd& treated_covariates,
                              double margin = 0.01)
{
  if (control_covariates.rows() == 0 || treated_covariates.rows() == 0) {
    throw config_error("fit_rescale requires non-empty groups");
  }
  if (control_covariates.cols() != treated_covariates.cols()) {
    throw config_error("fit_rescale: dimension mismatch between groups");
  }
  if (!(margin >= 0.0 && margin <= 0.1)) {
    throw config_error("rescale margin must lie in [0, 0.1]");
  }
  const Eigen::Index d = control_covariates.cols();
  Eigen::VectorXd lo(d), hi(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    lo[k] = std::min(control_covariates.col(k).minCoeff(),
                     treated_covariates.col(k).minCoeff());
    hi[k] = std::max(control_covariates.col(k).maxCoeff(),
                     treated_covariates.col(k).maxCoeff());
    if (!(hi[k] > lo[k])) {
      throw schema_error("constant covariate in dimension " +
                         std::to_string(k) + ": rescaling is degenerate");
    }
  }
  return RescaleMap(std::move(lo), std::move(hi), margin);
}

namespace detail {

inline std::string trim(std::string_view s)
{
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

inline double parse_cell(const std::string& cell, std::size_t row,
                         const std::string& column)
{
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw schema_error("row " + std::to_string(row) + ", column '" + column +
                       "': non-numeric value '" + cell + "'");
  }
  return value;
}

inline std::string format_number(double v)
{
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

} // namespace detail

//! Loads a comma-separated file with a header row. Covariate columns
//! default to every column that is neither treatment nor outcome.
inline Dataset load_csv(const std::string& path,
                        const std::string& treatment_col,
                        const std::optional<std::string>& outcome_col = {},
                        std::vector<std::string> covariate_cols = {})
{
  std::ifstream in(path);
  if (!in) {
    throw io_error("cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw schema_error("'" + path + "': empty file");
  }
  const auto header = detail::split_csv_line(line);
  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw schema_error("'" + path + "': missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t z_idx = column_index(treatment_col);
  std::optional<std::size_t> y_idx;
  if (outcome_col) {
    y_idx = column_index(*outcome_col);
  }
  if (covariate_cols.empty()) {
    for (const auto& name : header) {
      if (name != treatment_col && (!outcome_col || name != *outcome_col)) {
        covariate_cols.push_back(name);
      }
    }
  }
  if (covariate_cols.empty()) {
    throw schema_error("'" + path + "': no covariate columns");
  }
  std::vector<std::size_t> x_idx;
  x_idx.reserve(covariate_cols.size());
  for (const auto& name : covariate_cols) {
    x_idx.push_back(column_index(name));
  }

  std::vector<std::vector<double>> x_rows;
  std::vector<int> z_values;
  std::vector<double> y_values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw schema_error("row " + std::to_string(row) + ": expected " +
                         std::to_string(header.size()) + " fields, found " +
                         std::to_string(fields.size()));
    }
    const double z = detail::parse_cell(fields[z_idx], row, treatment_col);
    if (z != 0.0 && z != 1.0) {
      throw schema_error("row " + std::to_string(row) + ": treatment column '" +
                         treatment_col + "' holds " + fields[z_idx] +
                         ", expected 0 or 1");
    }
    z_values.push_back(static_cast<int>(z));
    if (y_idx) {
      y_values.push_back(detail::parse_cell(fields[*y_idx], row, *outcome_col));
    }
    std::vector<double> x(x_idx.size());
    for (std::size_t k = 0; k < x_idx.size(); ++k) {
      x[k] = detail::parse_cell(fields[x_idx[k]], row, covariate_cols[k]);
    }
    x_rows.push_back(std::move(x));
  }
  if (x_rows.size() < 2) {
    throw schema_error("'" + path + "': fewer than 2 data rows");
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(x_rows.size());
  const auto d = static_cast<Eigen::Index>(covariate_cols.size());
  ds.covariates.resize(n, d);
  ds.treatment.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.treatment[i] = z_values[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < d; ++k) {
      ds.covariates(i, k) =
        x_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  if (y_idx) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = y_values[static_cast<std::size_t>(i)];
    }
    ds.outcome = std::move(y);
    ds.outcome_name = *outcome_col;
  }
  ds.covariate_names = std::move(covariate_cols);
  ds.treatment_name = treatment_col;
  return ds;
}

//! Writes the dataset back out with shortest-round-trip numerics, so
//! load_csv(write_csv(ds)) reproduces ds exactly.
inline void write_csv(const Dataset& ds, const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw io_error("cannot write '" + path + "'");
  }
  out << ds.treatment_name;
  if (ds.outcome) {
    out << ',' << ds.outcome_name;
  }
  for (const auto& name : ds.covariate_names) {
    out << ',' << name;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    out << ds.treatment[i];
    if (ds.outcome) {
      out << ',' << detail::format_number((*ds.outcome)[i]);
    }
    for (Eigen::Index k = 0; k < ds.dim(); ++k) {
      out << ',' << detail::format_number(ds.covariates(i, k));
    }
    out << '\n';
  }
  if (!out) {
    throw io_error("write failed for '" + path + "'");
  }
}

} // namespace wunt
