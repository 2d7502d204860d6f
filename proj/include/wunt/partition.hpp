#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "wunt/common.hpp"
#include "wunt/smoothing.hpp"

#if !defined(WUNT_HAS_JSON)
#include <nlohmann/json.hpp>
#define WUNT_HAS_JSON 1
#endif

namespace wunt {

namespace detail {

//! Largest integer m with m^d <= n.
inline int largest_integer_root(Eigen::Index n, Eigen::Index d)
{
  auto pow_leq = [&](long long base) {
    long long r = 1;
    for (Eigen::Index k = 0; k < d; ++k) {
      r *= base;
      if (r > n) {
        return false;
      }
    }
    return true;
  };
  int m = std::max(
    1, static_cast<int>(std::floor(std::pow(static_cast<double>(n),
                                            1.0 / static_cast<double>(d)))));
  while (pow_leq(m + 1)) {
    ++m;
  }
  while (m > 1 && !pow_leq(m)) {
    --m;
  }
  return m;
}

} // namespace detail

//! Hierarchical equal-count partition of [0,1]^d built from control
//! points. Level k of the tree splits each group of points into
//! cells_per_axis() intervals along coordinate k, with group sizes as
//! equal as possible (remainder to the lowest-index groups), so every
//! leaf cube holds exactly one point when n0 = N0^d.
class Partition {
public:
  struct Node {
    std::vector<double> breaks;  // N0 + 1 entries, 0 and 1 at the ends
    std::vector<Node> children;  // empty at level d
  };

  //! Builds the partition from points already mapped into [0,1]^d.
  static Partition build(const Eigen::MatrixXd& unit_points)
  {
    const Eigen::Index n = unit_points.rows();
    const Eigen::Index d = unit_points.cols();
    if (n < 1 || d < 1) {
      throw std::invalid_argument("build_adaptive: need at least one point "
                                  "and one dimension");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double v = unit_points(i, k);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw std::invalid_argument(
            "build_adaptive: point " + std::to_string(i) +
            " lies outside [0,1]^d in dimension " + std::to_string(k));
        }
      }
    }

    Partition p;
    p.dim_ = d;
    p.n_points_ = n;
    p.cells_per_axis_ = detail::largest_integer_root(n, d);
    p.cell_of_point_.assign(static_cast<std::size_t>(n),
                            std::vector<int>(static_cast<std::size_t>(d), 0));
    std::vector<Eigen::Index> indices(static_cast<std::size_t>(n));
    std::iota(indices.begin(), indices.end(), Eigen::Index{ 0 });
    p.root_ = p.build_node(unit_points, indices, 0);
    return p;
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index n_points() const { return n_points_; }
  int cells_per_axis() const { return cells_per_axis_; }
  const Node& root() const { return root_; }

  //! Cube multi-index (0-based) assigned to control point i at build time.
  const std::vector<int>& cell_of_point(Eigen::Index i) const
  {
    return cell_of_point_[static_cast<std::size_t>(i)];
  }

  //! Cube multi-index (0-based) containing an arbitrary x in [0,1]^d.
  std::vector<int> locate(const Eigen::VectorXd& x) const
  {
    check_point(x);
    std::vector<int> cell(static_cast<std::size_t>(dim_));
    const Node* node = &root_;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      const std::size_t j = detail::locate_interval(node->breaks, x[k]);
      cell[static_cast<std::size_t>(k)] = static_cast<int>(j);
      if (k + 1 < dim_) {
        node = &node->children[j];
      }
    }
    return cell;
  }

  //! The adaptive uniform transform: coordinate k maps to
  //! (j_k + T((x_k - mid)/len)) / N0 inside its interval.
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const
  {
    check_point(x);
    Eigen::VectorXd out(dim_);
    const Node* node = &root_;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      const std::size_t j = detail::locate_interval(node->breaks, x[k]);
      out[k] = detail::smoothed_coordinate(node->breaks, j, x[k]);
      if (k + 1 < dim_) {
        node = &node->children[j];
      }
    }
    return out;
  }

  nlohmann::json to_json() const
  {
    nlohmann::json j;
    j["dim"] = dim_;
    j["n_points"] = n_points_;
    j["cells_per_axis"] = cells_per_axis_;
    j["tree"] = node_json(root_);
    return j;
  }

private:
  void check_point(const Eigen::VectorXd& x) const
  {
    if (x.size() != dim_) {
      throw std::invalid_argument("partition: dimension mismatch");
    }
    for (Eigen::Index k = 0; k < dim_; ++k) {
      if (!(x[k] >= 0.0 && x[k] <= 1.0)) {
        throw std::invalid_argument("partition: point outside [0,1]^d");
      }
    }
  }

  static nlohmann::json node_json(const Node& node)
  {
    nlohmann::json j;
    j["breaks"] = node.breaks;
    if (!node.children.empty()) {
      nlohmann::json kids = nlohmann::json::array();
      for (const auto& child : node.children) {
        kids.push_back(node_json(child));
      }
      j["children"] = std::move(kids);
    }
    return j;
  }

  Node build_node(const Eigen::MatrixXd& pts, std::vector<Eigen::Index>& idx,
                  Eigen::Index level)
  {
    // Ties in the sort key are broken by the stable row index, which only
    // affects exactly equal coordinates.
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double va = pts(a, level);
      const double vb = pts(b, level);
      return va < vb || (va == vb && a < b);
    });

    const std::size_t g = idx.size();
    const std::size_t groups = static_cast<std::size_t>(cells_per_axis_);
    const std::size_t base = g / groups;
    const std::size_t rem = g % groups;

    Node node;
    node.breaks.resize(groups + 1);
    node.breaks.front() = 0.0;
    node.breaks.back() = 1.0;

    std::vector<std::pair<std::size_t, std::size_t>> spans(groups);
    std::size_t offset = 0;
    for (std::size_t j = 0; j < groups; ++j) {
      const std::size_t size = base + (j < rem ? 1 : 0);
      spans[j] = { offset, offset + size };
      offset += size;
      if (j + 1 < groups) {
        // Midpoint between the last point of this group and the first of
        // the next. Groups are never empty: the group size at level k is
        // at least N0^(d-k) because N0^d <= n.
        node.breaks[j + 1] =
          0.5 * (pts(idx[offset - 1], level) + pts(idx[offset], level));
      }
    }

    for (std::size_t j = 0; j < groups; ++j) {
      for (std::size_t t = spans[j].first; t < spans[j].second; ++t) {
        cell_of_point_[static_cast<std::size_t>(idx[t])]
                      [static_cast<std::size_t>(level)] =
          static_cast<int>(j);
      }
    }

    if (level + 1 < dim_) {
      node.children.resize(groups);
      for (std::size_t j = 0; j < groups; ++j) {
        std::vector<Eigen::Index> sub(idx.begin() + spans[j].first,
                                      idx.begin() + spans[j].second);
        node.children[j] = build_node(pts, sub, level + 1);
      }
    }
    return node;
  }

  Eigen::Index dim_{ 0 };
  Eigen::Index n_points_{ 0 };
  int cells_per_axis_{ 1 };
  Node root_;
  std::vector<std::vector<int>> cell_of_point_;
};

//! Data-driven partition of the unit cube with (near-)equal occupancy.
inline Partition build_adaptive(const Eigen::MatrixXd& unit_points)
{
  return Partition::build(unit_points);
}

} // namespace wunt
