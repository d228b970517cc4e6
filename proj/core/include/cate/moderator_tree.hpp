#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cate/matrix.hpp"

namespace cate {

// Shallow regression tree fit to estimated treatment effects. Rows with
// x[feature] <= threshold go left.
struct TreeNode {
  bool is_leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  double value = 0.0;      // mean of the routed targets
  std::size_t count = 0;
  double sse = 0.0;        // squared error around `value`
  int left = -1;
  int right = -1;
  std::size_t depth = 0;
};

class ModeratorTree {
 public:
  ModeratorTree() = default;
  ModeratorTree(std::vector<TreeNode> nodes, std::size_t max_depth)
      : nodes_(std::move(nodes)), max_depth_(max_depth) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t max_depth() const noexcept { return max_depth_; }

  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
  // Index of the leaf `x` lands in.
  std::size_t leaf_index(std::span<const double> x) const;
  std::set<std::size_t> split_features() const;
  std::size_t leaf_count() const;

  // Indented text, one node per line. Empty `names` means x1, x2, ...
  std::string to_text(const std::vector<std::string>& names = {}) const;
  // Nested JSON: {"feature", "threshold", "left", "right"} or {"value", "count"}.
  std::string to_json(const std::vector<std::string>& names = {}) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t max_depth_ = 0;
};

// Greedy CART on squared error. A split is made only when it strictly lowers
// the total squared error and leaves at least `min_leaf` rows per side.
// Ties go to the lowest feature index, then the lowest threshold; thresholds
// are midpoints between adjacent distinct values.
ModeratorTree fit_moderator_tree(const Matrix& x, std::span<const double> target,
                                 std::size_t max_depth = 2, std::size_t min_leaf = 1);

}  // namespace cate
