#include "cate/moderator_tree.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cate/csv.hpp"
#include "cate/errors.hpp"

namespace cate {
namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

double sse_of(std::span<const double> target, std::span<const std::size_t> rows, double& mean) {
  // Offset by the first value so a constant target gives its value and zero
  // error exactly.
  const double base = target[rows.front()];
  double s = 0.0;
  for (std::size_t r : rows) s += target[r] - base;
  mean = base + s / static_cast<double>(rows.size());
  double e = 0.0;
  for (std::size_t r : rows) e += (target[r] - mean) * (target[r] - mean);
  return e;
}

Split best_split(const Matrix& x, std::span<const double> target,
                 std::span<const std::size_t> rows, double parent_mean, double parent_sse,
                 std::size_t min_leaf) {
  Split best;
  const std::size_t n = rows.size();
  if (n < 2 * min_leaf) return best;
  // Gains below this are rounding noise, not a real reduction.
  const double tol = 1e-12 * std::max(parent_sse, 1e-300);
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    double total = 0.0, total_sq = 0.0;
    for (std::size_t r : order) {
      const double t = target[r] - parent_mean;
      total += t;
      total_sq += t * t;
    }
    double left = 0.0, left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double t = target[order[i]] - parent_mean;
      left += t;
      left_sq += t * t;
      const double xv = x(order[i], f), xn = x(order[i + 1], f);
      if (xv == xn) continue;
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right = total - left, right_sq = total_sq - left_sq;
      const double sse_l = left_sq - left * left / static_cast<double>(nl);
      const double sse_r = right_sq - right * right / static_cast<double>(nr);
      const double gain = parent_sse - (sse_l + sse_r);
      if (gain > tol && (!best.found || gain > best.gain)) {
        best = {true, f, 0.5 * (xv + xn), gain};
      }
    }
  }
  return best;
}

int grow(const Matrix& x, std::span<const double> target, std::vector<std::size_t> rows,
         std::size_t depth, std::size_t max_depth, std::size_t min_leaf,
         std::vector<TreeNode>& nodes) {
  TreeNode node;
  node.depth = depth;
  node.count = rows.size();
  node.sse = sse_of(target, rows, node.value);
  const int id = static_cast<int>(nodes.size());
  nodes.push_back(node);
  if (depth >= max_depth || node.sse <= 0.0) return id;

  const Split s = best_split(x, target, rows, node.value, node.sse, min_leaf);
  if (!s.found) return id;

  // Recompute child errors exactly and only keep a strict improvement.
  std::vector<std::size_t> lrows, rrows;
  for (std::size_t r : rows) (x(r, s.feature) <= s.threshold ? lrows : rrows).push_back(r);
  double lm, rm;
  if (sse_of(target, lrows, lm) + sse_of(target, rrows, rm) >= node.sse) return id;

  const int l = grow(x, target, std::move(lrows), depth + 1, max_depth, min_leaf, nodes);
  const int r = grow(x, target, std::move(rrows), depth + 1, max_depth, min_leaf, nodes);
  TreeNode& n = nodes[static_cast<std::size_t>(id)];
  n.is_leaf = false;
  n.feature = s.feature;
  n.threshold = s.threshold;
  n.left = l;
  n.right = r;
  return id;
}

std::string feature_name(const std::vector<std::string>& names, std::size_t f) {
  return f < names.size() ? names[f] : "x" + std::to_string(f + 1);
}

nlohmann::json node_json(const std::vector<TreeNode>& nodes, int id,
                         const std::vector<std::string>& names) {
  const TreeNode& n = nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf) return {{"value", n.value}, {"count", n.count}};
  return {{"feature", feature_name(names, n.feature)},
          {"feature_index", n.feature},
          {"threshold", n.threshold},
          {"count", n.count},
          {"left", node_json(nodes, n.left, names)},
          {"right", node_json(nodes, n.right, names)}};
}

}  // namespace

ModeratorTree fit_moderator_tree(const Matrix& x, std::span<const double> target,
                                 std::size_t max_depth, std::size_t min_leaf) {
  if (x.rows() != target.size()) throw ShapeError("fit_moderator_tree: length mismatch");
  if (x.rows() == 0) throw std::invalid_argument("fit_moderator_tree: no rows");
  if (max_depth < 1) throw std::invalid_argument("fit_moderator_tree: max_depth must be >= 1");
  if (min_leaf < 1) throw std::invalid_argument("fit_moderator_tree: min_leaf must be >= 1");
  require_finite(target, "fit_moderator_tree");
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<TreeNode> nodes;
  grow(x, target, std::move(rows), 0, max_depth, min_leaf, nodes);
  return ModeratorTree(std::move(nodes), max_depth);
}

std::size_t ModeratorTree::leaf_index(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf) {
    const TreeNode& n = nodes_[id];
    if (n.feature >= x.size()) throw ShapeError("ModeratorTree: row too short");
    id = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return id;
}

double ModeratorTree::predict(std::span<const double> x) const {
  return nodes_[leaf_index(x)].value;
}

std::vector<double> ModeratorTree::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

std::set<std::size_t> ModeratorTree::split_features() const {
  std::set<std::size_t> out;
  for (const TreeNode& n : nodes_) {
    if (!n.is_leaf) out.insert(n.feature);
  }
  return out;
}

std::size_t ModeratorTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf; }));
}

std::string ModeratorTree::to_text(const std::vector<std::string>& names) const {
  std::ostringstream out;
  auto emit = [&](auto&& self, int id, const std::string& prefix) -> void {
    const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
    const std::string pad(2 * n.depth, ' ');
    if (n.is_leaf) {
      out << pad << prefix << "leaf: mean effect " << format_fixed(n.value, 4) << " (n=" << n.count
          << ")\n";
      return;
    }
    out << pad << prefix << feature_name(names, n.feature) << " <= "
        << format_fixed(n.threshold, 4) << " (n=" << n.count << ", mean "
        << format_fixed(n.value, 4) << ")\n";
    self(self, n.left, "[yes] ");
    self(self, n.right, "[no]  ");
  };
  if (!nodes_.empty()) emit(emit, 0, "");
  return out.str();
}

std::string ModeratorTree::to_json(const std::vector<std::string>& names) const {
  if (nodes_.empty()) return "null";
  return node_json(nodes_, 0, names).dump(2);
}

}  // namespace cate
