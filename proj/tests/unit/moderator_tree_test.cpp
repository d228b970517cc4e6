#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "../support/brute_tree.hpp"
#include "cate/dgp.hpp"
#include "cate/moderator_tree.hpp"

namespace cate {
namespace {

using testing::brute_best_split;
using testing::BruteSplit;

TEST(ModeratorTree, ConstantTargetIsOneLeaf) {
  const Covariates c = gen_covariates(100, 1);
  const std::vector<double> y(100, 0.42);
  const auto tree = fit_moderator_tree(c.x, y, 2);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(tree.root().value, 0.42);
  EXPECT_TRUE(tree.split_features().empty());
}

TEST(ModeratorTree, RecoversStepInFirstFeature) {
  const Covariates c = gen_covariates(400, 2);
  std::vector<double> y(400);
  double below_max = -1e300, above_min = 1e300, sl = 0, sr = 0;
  std::size_t nl = 0;
  for (std::size_t i = 0; i < 400; ++i) {
    const double x1 = c.x(i, 0);
    y[i] = x1 <= 0.0 ? -1.0 + 0.001 * x1 : 2.0 + 0.001 * x1;
    if (x1 <= 0.0) {
      below_max = std::max(below_max, x1);
      sl += y[i];
      ++nl;
    } else {
      above_min = std::min(above_min, x1);
      sr += y[i];
    }
  }
  const auto tree = fit_moderator_tree(c.x, y, 1);
  ASSERT_FALSE(tree.root().is_leaf);
  EXPECT_EQ(tree.root().feature, 0u);
  EXPECT_DOUBLE_EQ(tree.root().threshold, 0.5 * (below_max + above_min));
  const auto& left = tree.nodes()[tree.root().left];
  const auto& right = tree.nodes()[tree.root().right];
  EXPECT_NEAR(left.value, sl / nl, 1e-10);
  EXPECT_NEAR(right.value, sr / (400 - nl), 1e-10);
}

TEST(ModeratorTree, EffectTruthSplitsMatchBruteForce) {
  const Covariates c = gen_covariates(5000, 3);
  const auto beta = true_beta(c.x, Regime::kSmallTreatment);
  const auto tree = fit_moderator_tree(c.x, beta, 2);

  std::vector<std::size_t> all(5000);
  for (std::size_t i = 0; i < 5000; ++i) all[i] = i;
  const BruteSplit root = brute_best_split(c.x, beta, all, 1);
  ASSERT_TRUE(root.found);
  ASSERT_FALSE(tree.root().is_leaf);
  EXPECT_EQ(tree.root().feature, root.feature);
  EXPECT_NEAR(tree.root().threshold, root.threshold, 1e-12);

  std::set<std::size_t> oracle{root.feature};
  std::vector<std::size_t> l, r;
  for (std::size_t i : all) (c.x(i, root.feature) <= root.threshold ? l : r).push_back(i);
  for (const auto& [rows, child] :
       {std::pair{l, tree.root().left}, std::pair{r, tree.root().right}}) {
    const BruteSplit s = brute_best_split(c.x, beta, rows, 1);
    const TreeNode& node = tree.nodes()[child];
    ASSERT_EQ(s.found, !node.is_leaf);
    if (s.found) {
      oracle.insert(s.feature);
      EXPECT_EQ(node.feature, s.feature);
      EXPECT_NEAR(node.threshold, s.threshold, 1e-12);
    }
  }
  EXPECT_EQ(tree.split_features(), oracle);
  EXPECT_EQ(oracle, testing::brute_split_features(c.x, beta, all, 2, 1));
  for (std::size_t f : tree.split_features()) EXPECT_TRUE(f == 0 || f == 3) << f;
}

TEST(ModeratorTree, SplitsReduceErrorAndRespectMinLeaf) {
  const DgpSample s = sample_dgp({600, Regime::kSmallTreatment, 1.0, 4});
  const auto tree = fit_moderator_tree(s.x, s.y, 3, 25);
  for (const TreeNode& n : tree.nodes()) {
    if (n.is_leaf) {
      EXPECT_GE(n.count, 25u);
      continue;
    }
    const TreeNode& l = tree.nodes()[n.left];
    const TreeNode& r = tree.nodes()[n.right];
    EXPECT_LT(l.sse + r.sse, n.sse);
    EXPECT_EQ(l.count + r.count, n.count);
    EXPECT_LE(n.depth, 2u);
  }
  // Leaf values are the means of the rows routed there.
  std::vector<double> sum(tree.nodes().size(), 0.0);
  std::vector<std::size_t> cnt(tree.nodes().size(), 0);
  for (std::size_t i = 0; i < s.x.rows(); ++i) {
    const std::size_t leaf = tree.leaf_index(s.x.row(i));
    sum[leaf] += s.y[i];
    ++cnt[leaf];
  }
  for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
    if (!tree.nodes()[k].is_leaf) continue;
    EXPECT_EQ(cnt[k], tree.nodes()[k].count);
    EXPECT_NEAR(sum[k] / cnt[k], tree.nodes()[k].value, 1e-10);
  }
}

TEST(ModeratorTree, RendersFeatureNames) {
  const Covariates c = gen_covariates(500, 5);
  const auto beta = true_beta(c.x, Regime::kSmallTreatment);
  const auto tree = fit_moderator_tree(c.x, beta, 2);
  const std::vector<std::string> names{"a", "b", "c", "d", "e"};
  ASSERT_FALSE(tree.root().is_leaf);
  EXPECT_EQ(tree.to_text(names).rfind(names[tree.root().feature] + " <=", 0), 0u);
  EXPECT_NE(tree.to_json(names).find("\"feature\""), std::string::npos);
  EXPECT_NE(tree.to_text().find("x"), std::string::npos);
}

}  // namespace
}  // namespace cate
