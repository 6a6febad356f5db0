#pragma once

#include "xbart/data.hpp"
#include "xbart/random.hpp"
#include "xbart/split.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace xbart {

/// Node of a tree stored in pre-order. Internal nodes keep their split rule
/// and child positions; leaves keep their parameter mu.
struct TreeNode {
  std::int32_t var = -1;  // -1 marks a leaf
  double cut = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double mu = 0.0;
  std::int32_t depth = 0;

  bool is_leaf() const { return var < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
 public:
  Tree() = default;
  static Tree single_leaf(double mu);

  std::span<const TreeNode> nodes() const { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::size_t num_leaves() const;
  /// Number of levels: 1 for a single leaf.
  int levels() const;
  std::vector<double> leaf_values() const;

  /// Appends a leaf/internal node at the end of the pre-order list and
  /// returns its position. Children of an internal node are attached later
  /// with set_children.
  std::int32_t add_leaf(double mu, std::int32_t depth);
  std::int32_t add_internal(SplitRule rule, std::int32_t depth);
  void set_children(std::int32_t parent, std::int32_t left, std::int32_t right);

  /// Throws std::invalid_argument unless the node list is a proper binary
  /// tree in pre-order with consistent depths.
  void validate() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Leaf value at x (x_j <= c goes left).
double evaluate_tree(const Tree& tree, std::span<const double> x);
/// Leaf value for every row of x.
Eigen::VectorXd evaluate_tree(const Tree& tree, const Eigen::MatrixXd& x);

struct StopRule {
  int max_depth = 30;           // levels, counting the root
  RowIndex min_node_size = 1;   // rows per child
};

struct GrowOptions {
  double alpha = 0.95;
  double beta = 1.25;
  int cutpoints = 100;
  StopRule stop;
  /// Variables scored per node; values >= p score every variable.
  int mtry = 0;
  /// Selection weights w (length p) used when 0 < mtry < p.
  std::span<const double> weights;
};

/// Draw from the conjugate leaf posterior
///   N(s / (sigma2 (1/tau + n/sigma2)), 1 / (1/tau + n/sigma2)).
/// tau == 0 returns 0 without consuming randomness.
double sample_leaf_parameter(SuffStats stats, double sigma2, double tau, Rng& rng);

/// m variable ids drawn without replacement with probability proportional to
/// `weights`, returned in increasing order.
std::vector<int> select_variables(std::span<const double> weights, int m, Rng& rng);

/// Grows trees from the root against a residual vector. Reuses its buffers
/// between calls; one instance per chain.
class TreeGrower {
 public:
  TreeGrower(const PredictorMatrix& x, const SortedIndex& root_order);

  struct Result {
    Tree tree;
    std::vector<int> split_counts;  // splits per variable
  };

  /// One stochastic tree for `residuals` (indexed by row). Writes the leaf
  /// value of every training row into `fitted`.
  Result grow(std::span<const double> residuals, double sigma2, double tau,
              const GrowOptions& options, Rng& rng, std::span<double> fitted);

 private:
  struct Context;
  void grow_node(Context& ctx, NodeRange node, std::int32_t depth);

  const PredictorMatrix& x_;
  const SortedIndex& root_order_;
  SortedIndex order_;
  SiftWorkspace sift_work_;
  std::vector<int> all_vars_;
};

/// Convenience wrapper: presorts x and grows a single tree.
TreeGrower::Result grow_from_root(std::span<const double> residuals, const PredictorMatrix& x,
                                  double sigma2, double tau, const GrowOptions& options, Rng& rng);

/// Binary tree record: "XTRE" magic, u16 version, u32 node count, then per
/// node in pre-order a u8 tag (0 leaf, 1 internal) followed by f64 mu for a
/// leaf or u32 variable + f64 cut for an internal node.
void write_tree(std::ostream& out, const Tree& tree);
Tree read_tree(std::istream& in);

}  // namespace xbart
