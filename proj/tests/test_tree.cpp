#include "xbart/io.hpp"
#include "xbart/tree.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace xbart;

namespace {

Tree figure_tree(double mu1, double mu2, double mu3) {
  Tree t;
  const auto root = t.add_internal({0, 0.8}, 0);
  const auto inner = t.add_internal({1, 0.4}, 1);
  const auto l3 = t.add_leaf(mu3, 2);
  const auto l2 = t.add_leaf(mu2, 2);
  t.set_children(inner, l3, l2);
  const auto l1 = t.add_leaf(mu1, 1);
  t.set_children(root, inner, l1);
  return t;
}

struct Data {
  PredictorMatrix x;
  std::vector<double> y;
};

Data noisy_data(Rng& rng, int n, int p) {
  Eigen::MatrixXd m(n, p);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m(i, j) = draw_normal(rng, 0.0, 1.0);
    y[static_cast<std::size_t>(i)] = std::sin(2.0 * m(i, 0)) + (m(i, 1) > 0.3 ? 1.0 : -0.5) +
                                     draw_normal(rng, 0.0, 0.3);
  }
  return {PredictorMatrix(m), y};
}

// row -> leaf node index by walking the tree
int leaf_of(const Tree& t, const PredictorMatrix& x, RowIndex row) {
  int k = 0;
  while (!t.node(static_cast<std::size_t>(k)).is_leaf()) {
    const TreeNode& n = t.node(static_cast<std::size_t>(k));
    k = x(row, n.var) <= n.cut ? n.left : n.right;
  }
  return k;
}

}  // namespace

TEST(EvaluateTree, RootOnly) {
  const Tree t = Tree::single_leaf(7.0);
  const std::vector<double> x{0.3, -4.0};
  EXPECT_EQ(evaluate_tree(t, x), 7.0);
  EXPECT_EQ(t.levels(), 1);
  EXPECT_EQ(t.num_leaves(), 1u);
}

TEST(EvaluateTree, FigureExample) {
  const Tree t = figure_tree(1.0, 2.0, 3.0);
  t.validate();
  EXPECT_EQ(evaluate_tree(t, std::vector<double>{0.9, 0.5}), 1.0);
  EXPECT_EQ(evaluate_tree(t, std::vector<double>{0.4, 0.2}), 3.0);
  EXPECT_EQ(evaluate_tree(t, std::vector<double>{0.4, 0.7}), 2.0);
  EXPECT_EQ(evaluate_tree(t, std::vector<double>{0.8, 0.4}), 3.0);  // ties go left
  EXPECT_EQ(t.levels(), 3);
  EXPECT_EQ(t.leaf_values(), (std::vector<double>{3.0, 2.0, 1.0}));
}

TEST(Tree, ValidateRejectsMalformed) {
  Tree t;
  t.add_internal({0, 1.0}, 0);
  EXPECT_THROW(t.validate(), std::invalid_argument);
  Tree u;
  const auto r = u.add_internal({0, 1.0}, 0);
  const auto a = u.add_leaf(0.0, 1);
  const auto b = u.add_leaf(0.0, 2);  // wrong depth
  u.set_children(r, a, b);
  EXPECT_THROW(u.validate(), std::invalid_argument);
}

TEST(LeafParameter, ZeroTauIsZero) {
  Rng rng(1);
  EXPECT_EQ(sample_leaf_parameter({5.0, 3}, 1.0, 0.0, rng), 0.0);
}

TEST(LeafParameter, PosteriorMoments) {
  Rng rng(17);
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double mu = sample_leaf_parameter({2.0, 1}, 1.0, 1.0, rng);
    sum += mu;
    sum_sq += mu * mu;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(var, 0.5, 0.01);

  // empty node: prior N(0, tau)
  sum = sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double mu = sample_leaf_parameter({0.0, 0}, 1.0, 2.5, rng);
    sum += mu;
    sum_sq += mu * mu;
  }
  EXPECT_NEAR(sum / draws, 0.0, 0.03);
  EXPECT_NEAR(sum_sq / draws, 2.5, 0.05);
}

TEST(LeafParameter, FlatPriorLimit) {
  Rng rng(5);
  double sum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) sum += sample_leaf_parameter({500.0, 100}, 1.0, 1e8, rng);
  EXPECT_NEAR(sum / draws / 5.0, 1.0, 1e-3);
}

TEST(SelectVariables, DistinctSortedAndWeighted) {
  Rng rng(3);
  const std::vector<double> w{0.5, 0.5, 0.0};
  for (int i = 0; i < 50; ++i) EXPECT_EQ(select_variables(w, 2, rng), (std::vector<int>{0, 1}));

  const std::vector<double> w2{0.1, 0.2, 0.7};
  std::vector<int> hits(3, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) ++hits[static_cast<std::size_t>(select_variables(w2, 1, rng)[0])];
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(hits[static_cast<std::size_t>(j)] / static_cast<double>(draws), w2[static_cast<std::size_t>(j)],
                3.0 * std::sqrt(0.25 / draws));
  }
  EXPECT_THROW(select_variables(w2, 0, rng), std::invalid_argument);
}

TEST(GrowFromRoot, MaxDepthOneIsRootLeaf) {
  Rng data_rng(2);
  const Data d = noisy_data(data_rng, 100, 3);
  GrowOptions opt;
  opt.stop.max_depth = 1;
  Rng rng(42), ref(42);
  const auto out = grow_from_root(d.y, d.x, 0.7, 0.3, opt, rng);
  ASSERT_EQ(out.tree.size(), 1u);
  double s = 0.0;
  for (double v : d.y) s += v;
  EXPECT_NEAR(out.tree.node(0).mu, sample_leaf_parameter({s, 100}, 0.7, 0.3, ref), 1e-12);  // sum order may differ
}

TEST(GrowFromRoot, ZeroTauGivesZeroLeaves) {
  Rng data_rng(4);
  const Data d = noisy_data(data_rng, 150, 3);
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto out = grow_from_root(d.y, d.x, 1.0, 0.0, GrowOptions{}, rng);
    for (double mu : out.tree.leaf_values()) EXPECT_EQ(mu, 0.0);
  }
}

TEST(GrowFromRoot, ReplayAndStopRules) {
  Rng data_rng(6);
  const Data d = noisy_data(data_rng, 400, 4);
  const SortedIndex order = presort(d.x);
  TreeGrower grower(d.x, order);
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    GrowOptions opt;
    opt.stop.max_depth = 2 + rep % 5;
    opt.stop.min_node_size = 1 + static_cast<RowIndex>(rep % 4) * 3;
    opt.cutpoints = 20 + rep;
    std::vector<double> fitted(400, std::nan(""));
    const auto out = grower.grow(d.y, 0.1, 0.5, opt, rng, fitted);
    out.tree.validate();
    EXPECT_LE(out.tree.levels(), opt.stop.max_depth);

    std::map<int, int> leaf_rows;
    for (RowIndex i = 0; i < 400; ++i) {
      const int leaf = leaf_of(out.tree, d.x, i);
      ++leaf_rows[leaf];
      EXPECT_EQ(fitted[i], out.tree.node(static_cast<std::size_t>(leaf)).mu);
    }
    EXPECT_EQ(leaf_rows.size(), out.tree.num_leaves());
    if (out.tree.size() > 1) {
      for (const auto& [leaf, count] : leaf_rows) {
        EXPECT_GE(static_cast<RowIndex>(count), opt.stop.min_node_size);
      }
    }
    int splits = 0;
    for (int c : out.split_counts) splits += c;
    EXPECT_EQ(static_cast<std::size_t>(splits), out.tree.size() - out.tree.num_leaves());
  }
}

TEST(GrowFromRoot, Reproducible) {
  Rng data_rng(10);
  const Data d = noisy_data(data_rng, 300, 5);
  Rng a(99), b(99);
  const auto t1 = grow_from_root(d.y, d.x, 0.2, 0.4, GrowOptions{}, a);
  const auto t2 = grow_from_root(d.y, d.x, 0.2, 0.4, GrowOptions{}, b);
  EXPECT_TRUE(t1.tree == t2.tree);
  EXPECT_GT(t1.tree.size(), 1u);
}

TEST(GrowFromRoot, RootCutConcentratesAtStep) {
  const int n = 200;
  Eigen::MatrixXd m(n, 1);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    m(i, 0) = (i + 0.5) / n;
    y[static_cast<std::size_t>(i)] = m(i, 0) > 0.5 ? 2.0 : 0.0;
  }
  const PredictorMatrix x(m);
  const SortedIndex order = presort(x);
  TreeGrower grower(x, order);
  Rng rng(13);
  std::vector<double> fitted(n);
  int near_step = 0;
  const int grows = 1000;
  for (int g = 0; g < grows; ++g) {
    const auto out = grower.grow(y, 0.01, 1.0, GrowOptions{}, rng, fitted);
    if (out.tree.size() > 1 && std::abs(out.tree.node(0).cut - 0.5) < 0.01) ++near_step;
  }
  EXPECT_GE(near_step, 950);
}

TEST(GrowFromRoot, WeightedMtryUsesOnlySelectableVariables) {
  Rng data_rng(12);
  const Data d = noisy_data(data_rng, 300, 4);
  const std::vector<double> w{0.0, 0.0, 0.5, 0.5};
  GrowOptions opt;
  opt.mtry = 2;
  opt.weights = w;
  Rng rng(4);
  const auto out = grow_from_root(d.y, d.x, 0.1, 1.0, opt, rng);
  EXPECT_EQ(out.split_counts[0], 0);
  EXPECT_EQ(out.split_counts[1], 0);
}

TEST(TreeSerialization, RoundTrip) {
  Rng data_rng(14);
  const Data d = noisy_data(data_rng, 200, 3);
  Rng rng(3);
  const Tree t = grow_from_root(d.y, d.x, 0.1, 1.0, GrowOptions{}, rng).tree;
  std::stringstream buf;
  write_tree(buf, t);
  const Tree back = read_tree(buf);
  EXPECT_TRUE(back == t);
}

TEST(TreeSerialization, RejectsDamagedInput) {
  const Tree t = figure_tree(1, 2, 3);
  std::stringstream buf;
  write_tree(buf, t);
  const std::string bytes = buf.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_tree(truncated), IoError);

  std::string bad_magic = bytes;
  bad_magic[0] = 'Z';
  std::stringstream s1(bad_magic);
  try {
    read_tree(s1);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.code(), IoErrorCode::kBadMagic);
  }

  std::string bad_version = bytes;
  bad_version[4] = 9;
  std::stringstream s2(bad_version);
  try {
    read_tree(s2);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.code(), IoErrorCode::kVersionMismatch);
  }
}
