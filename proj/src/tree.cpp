#include "xbart/tree.hpp"

#include "xbart/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xbart {

Tree Tree::single_leaf(double mu) {
  Tree t;
  t.add_leaf(mu, 0);
  return t;
}

std::size_t Tree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::levels() const {
  int deepest = -1;
  for (const TreeNode& n : nodes_) deepest = std::max(deepest, static_cast<int>(n.depth));
  return deepest + 1;
}

std::vector<double> Tree::leaf_values() const {
  std::vector<double> out;
  for (const TreeNode& n : nodes_) {
    if (n.is_leaf()) out.push_back(n.mu);
  }
  return out;
}

std::int32_t Tree::add_leaf(double mu, std::int32_t depth) {
  TreeNode n;
  n.mu = mu;
  n.depth = depth;
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

std::int32_t Tree::add_internal(SplitRule rule, std::int32_t depth) {
  TreeNode n;
  n.var = rule.var;
  n.cut = rule.cut;
  n.depth = depth;
  nodes_.push_back(n);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

void Tree::set_children(std::int32_t parent, std::int32_t left, std::int32_t right) {
  nodes_[static_cast<std::size_t>(parent)].left = left;
  nodes_[static_cast<std::size_t>(parent)].right = right;
}

namespace {

// Returns the position one past the subtree rooted at `at`.
std::size_t check_subtree(std::span<const TreeNode> nodes, std::size_t at, std::int32_t depth) {
  if (at >= nodes.size()) throw std::invalid_argument("tree: dangling child reference");
  const TreeNode& n = nodes[at];
  if (n.depth != depth) throw std::invalid_argument("tree: inconsistent depth");
  if (n.is_leaf()) {
    if (n.left != -1 || n.right != -1) throw std::invalid_argument("tree: leaf with children");
    return at + 1;
  }
  if (n.left != static_cast<std::int32_t>(at + 1)) {
    throw std::invalid_argument("tree: left child out of pre-order position");
  }
  const std::size_t after_left = check_subtree(nodes, at + 1, depth + 1);
  if (n.right != static_cast<std::int32_t>(after_left)) {
    throw std::invalid_argument("tree: right child out of pre-order position");
  }
  return check_subtree(nodes, after_left, depth + 1);
}

}  // namespace

void Tree::validate() const {
  if (nodes_.empty()) throw std::invalid_argument("tree: no nodes");
  if (check_subtree(nodes_, 0, 0) != nodes_.size()) {
    throw std::invalid_argument("tree: unreachable nodes");
  }
}

double evaluate_tree(const Tree& tree, std::span<const double> x) {
  std::size_t at = 0;
  while (!tree.node(at).is_leaf()) {
    const TreeNode& n = tree.node(at);
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.var)] <= n.cut ? n.left : n.right);
  }
  return tree.node(at).mu;
}

Eigen::VectorXd evaluate_tree(const Tree& tree, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::size_t at = 0;
    while (!tree.node(at).is_leaf()) {
      const TreeNode& n = tree.node(at);
      at = static_cast<std::size_t>(x(i, n.var) <= n.cut ? n.left : n.right);
    }
    out[i] = tree.node(at).mu;
  }
  return out;
}

double sample_leaf_parameter(SuffStats stats, double sigma2, double tau, Rng& rng) {
  if (tau == 0.0) return 0.0;
  const double precision = 1.0 / tau + static_cast<double>(stats.count) / sigma2;
  const double mean = stats.sum / (sigma2 * precision);
  return draw_normal(rng, mean, std::sqrt(1.0 / precision));
}

std::vector<int> select_variables(std::span<const double> weights, int m, Rng& rng) {
  const int p = static_cast<int>(weights.size());
  if (m <= 0 || m > p) throw std::invalid_argument("mtry must lie in [1, p]");
  std::vector<int> pool(static_cast<std::size_t>(p));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    double total = 0.0;
    for (double v : w) total += v;
    std::size_t pick = w.size() - 1;
    if (total > 0.0) {
      const double target = draw_uniform(rng) * total;
      double running = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        running += w[i];
        if (target < running) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(draw_uniform(rng) * static_cast<double>(w.size()));
      pick = std::min(pick, w.size() - 1);
    }
    chosen.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

struct TreeGrower::Context {
  std::span<const double> residuals;
  const GaussianCriterion& criterion;
  const GrowOptions& options;
  Rng& rng;
  std::span<double> fitted;
  Result& result;
  bool subsample;
};

TreeGrower::TreeGrower(const PredictorMatrix& x, const SortedIndex& root_order)
    : x_(x), root_order_(root_order), all_vars_(static_cast<std::size_t>(x.cols())) {
  std::iota(all_vars_.begin(), all_vars_.end(), 0);
}

TreeGrower::Result TreeGrower::grow(std::span<const double> residuals, double sigma2, double tau,
                                    const GrowOptions& options, Rng& rng,
                                    std::span<double> fitted) {
  if (residuals.size() != x_.rows() || fitted.size() != x_.rows()) {
    throw std::invalid_argument("residual and fitted vectors must have one entry per row");
  }
  if (options.stop.max_depth < 1 || options.stop.min_node_size < 1) {
    throw std::invalid_argument("stop rule needs max_depth >= 1 and min_node_size >= 1");
  }
  order_ = root_order_;
  const GaussianCriterion criterion(sigma2, tau, x_.rows());
  Result result;
  result.split_counts.assign(static_cast<std::size_t>(x_.cols()), 0);
  const bool subsample = options.mtry > 0 && options.mtry < x_.cols();
  if (subsample && options.weights.size() != static_cast<std::size_t>(x_.cols())) {
    throw std::invalid_argument("variable weights must have one entry per column");
  }
  Context ctx{residuals, criterion, options, rng, fitted, result, subsample};
  grow_node(ctx, order_.root(), 0);
  return result;
}

void TreeGrower::grow_node(Context& ctx, NodeRange node, std::int32_t depth) {
  const StopRule& stop = ctx.options.stop;
  Tree& tree = ctx.result.tree;

  auto make_leaf = [&](SuffStats stats) {
    const double mu = sample_leaf_parameter(stats, ctx.criterion.sigma2(), ctx.criterion.tau(),
                                            ctx.rng);
    tree.add_leaf(mu, depth);
    for (RowIndex row : order_.column(0, node)) ctx.fitted[row] = mu;
  };
  auto node_stats = [&] {
    double s = 0.0;
    for (RowIndex row : order_.column(0, node)) s += ctx.residuals[row];
    return SuffStats{s, node.size};
  };

  if (depth + 1 >= stop.max_depth || node.size < 2 * stop.min_node_size) {
    make_leaf(node_stats());
    return;
  }

  std::vector<int> chosen;
  std::span<const int> vars = all_vars_;
  if (ctx.subsample) {
    chosen = select_variables(ctx.options.weights, ctx.options.mtry, ctx.rng);
    vars = chosen;
  }
  const CutpointGrid grid = build_cutpoint_grid(order_, node, x_, ctx.options.cutpoints, vars,
                                                stop.min_node_size);
  if (grid.empty()) {
    make_leaf(node_stats());
    return;
  }

  const CandidateScores scores =
      scan_candidates(order_, node, grid, ctx.residuals, ctx.criterion, depth,
                      ctx.options.alpha, ctx.options.beta);
  const auto pick = sample_cutpoint(scores, ctx.rng);
  if (!pick) {
    make_leaf(scores.parent);
    return;
  }

  const Cutpoint& cut = grid.candidates[*pick];
  const SplitRule rule{cut.var, cut.value};
  const std::int32_t self = tree.add_internal(rule, depth);
  ++ctx.result.split_counts[static_cast<std::size_t>(cut.var)];
  const auto [left, right] = sift(order_, node, rule, x_, sift_work_);

  const std::int32_t left_id = static_cast<std::int32_t>(tree.size());
  grow_node(ctx, left, depth + 1);
  const std::int32_t right_id = static_cast<std::int32_t>(tree.size());
  grow_node(ctx, right, depth + 1);
  tree.set_children(self, left_id, right_id);
}

TreeGrower::Result grow_from_root(std::span<const double> residuals, const PredictorMatrix& x,
                                  double sigma2, double tau, const GrowOptions& options, Rng& rng) {
  const SortedIndex order = presort(x);
  TreeGrower grower(x, order);
  std::vector<double> fitted(x.rows());
  return grower.grow(residuals, sigma2, tau, options, rng, fitted);
}

namespace {
constexpr char kTreeMagic[5] = "XTRE";
constexpr std::uint16_t kTreeVersion = 1;
constexpr std::int32_t kMaxRecordDepth = 4096;
}  // namespace

void write_tree(std::ostream& out, const Tree& tree) {
  io::write_magic(out, kTreeMagic);
  io::write<std::uint16_t>(out, kTreeVersion);
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(tree.size()));
  for (const TreeNode& n : tree.nodes()) {
    if (n.is_leaf()) {
      io::write<std::uint8_t>(out, 0);
      io::write<double>(out, n.mu);
    } else {
      io::write<std::uint8_t>(out, 1);
      io::write<std::uint32_t>(out, static_cast<std::uint32_t>(n.var));
      io::write<double>(out, n.cut);
    }
  }
}

namespace {

// Rebuilds child links and depths from the pre-order tag sequence.
std::size_t rebuild(Tree& tree, const std::vector<TreeNode>& flat, std::size_t at,
                    std::int32_t depth) {
  if (at >= flat.size()) throw IoError(IoErrorCode::kCorrupt, "tree record ends mid-subtree");
  if (depth > kMaxRecordDepth) throw IoError(IoErrorCode::kCorrupt, "tree record too deep");
  const TreeNode& n = flat[at];
  if (n.is_leaf()) {
    tree.add_leaf(n.mu, depth);
    return at + 1;
  }
  const std::int32_t self = tree.add_internal({n.var, n.cut}, depth);
  const auto left_id = static_cast<std::int32_t>(tree.size());
  const std::size_t after_left = rebuild(tree, flat, at + 1, depth + 1);
  const auto right_id = static_cast<std::int32_t>(tree.size());
  const std::size_t after_right = rebuild(tree, flat, after_left, depth + 1);
  tree.set_children(self, left_id, right_id);
  return after_right;
}

}  // namespace

Tree read_tree(std::istream& in) {
  io::expect_magic(in, kTreeMagic);
  const auto version = io::read<std::uint16_t>(in);
  if (version != kTreeVersion) {
    throw IoError(IoErrorCode::kVersionMismatch,
                  "tree record version " + std::to_string(version));
  }
  const auto count = io::read<std::uint32_t>(in);
  if (count == 0) throw IoError(IoErrorCode::kCorrupt, "empty tree record");
  std::vector<TreeNode> flat;
  flat.reserve(std::min<std::uint32_t>(count, 1u << 20));
  for (std::uint32_t i = 0; i < count; ++i) {
    TreeNode n;
    const auto tag = io::read<std::uint8_t>(in);
    if (tag == 0) {
      n.mu = io::read<double>(in);
    } else if (tag == 1) {
      n.var = static_cast<std::int32_t>(io::read<std::uint32_t>(in));
      n.cut = io::read<double>(in);
      if (n.var < 0) throw IoError(IoErrorCode::kCorrupt, "variable index out of range");
    } else {
      throw IoError(IoErrorCode::kCorrupt, "unknown node tag");
    }
    flat.push_back(n);
  }
  Tree tree;
  if (rebuild(tree, flat, 0, 0) != flat.size()) {
    throw IoError(IoErrorCode::kCorrupt, "trailing nodes in tree record");
  }
  return tree;
}

}  // namespace xbart
