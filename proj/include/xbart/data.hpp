#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace xbart {

using RowIndex = std::uint32_t;

enum class VariableKind : std::uint8_t { kContinuous = 0, kCategorical = 1 };

/// Column-major n x p feature table. Every entry is finite; categorical
/// columns hold arbitrary numeric codes and are ordered by value.
class PredictorMatrix {
 public:
  PredictorMatrix() = default;
  /// Throws std::invalid_argument on an empty table, non-finite entries or a
  /// kinds vector of the wrong length. An empty `kinds` means all continuous.
  explicit PredictorMatrix(Eigen::MatrixXd values, std::vector<VariableKind> kinds = {});

  RowIndex rows() const { return static_cast<RowIndex>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

  double operator()(RowIndex row, int var) const { return values_(row, var); }
  const double* column(int var) const { return values_.col(var).data(); }
  const Eigen::MatrixXd& values() const { return values_; }

  VariableKind kind(int var) const { return kinds_[static_cast<std::size_t>(var)]; }
  const std::vector<VariableKind>& kinds() const { return kinds_; }

 private:
  Eigen::MatrixXd values_;
  std::vector<VariableKind> kinds_;
};

/// Contiguous slice [begin, begin + size) of every column of a SortedIndex.
struct NodeRange {
  RowIndex begin = 0;
  RowIndex size = 0;
};

/// p arrays of row ids; within any node, column v lists the node's rows in
/// non-decreasing order of x_v (ties in original row order). Child nodes
/// occupy adjacent sub-ranges of their parent, so one buffer serves a whole
/// tree.
class SortedIndex {
 public:
  SortedIndex() = default;
  SortedIndex(RowIndex rows, int vars);

  RowIndex rows() const { return rows_; }
  int vars() const { return vars_; }
  NodeRange root() const { return {0, rows_}; }

  std::span<const RowIndex> column(int var, NodeRange node) const {
    return {order_.data() + offset(var) + node.begin, node.size};
  }
  std::span<RowIndex> column(int var, NodeRange node) {
    return {order_.data() + offset(var) + node.begin, node.size};
  }

  friend bool operator==(const SortedIndex&, const SortedIndex&) = default;

 private:
  std::size_t offset(int var) const {
    return static_cast<std::size_t>(var) * rows_;
  }

  RowIndex rows_ = 0;
  int vars_ = 0;
  std::vector<RowIndex> order_;
};

/// Root-level index over all rows. Stable: ties keep original row order.
SortedIndex presort(const PredictorMatrix& x);

/// Split rule: x_var <= cut goes left.
struct SplitRule {
  int var = 0;
  double cut = 0.0;
};

/// Scratch buffers reused across sift calls.
struct SiftWorkspace {
  std::vector<RowIndex> spill;
  std::vector<std::uint8_t> goes_left;
};

/// Stable in-place partition of every column of `node` by `rule`. The
/// returned ranges tile `node`; the left child comes first. The rule must
/// leave both children nonempty.
std::pair<NodeRange, NodeRange> sift(SortedIndex& order, NodeRange node, SplitRule rule,
                                     const PredictorMatrix& x, SiftWorkspace& work);
std::pair<NodeRange, NodeRange> sift(SortedIndex& order, NodeRange node, SplitRule rule,
                                     const PredictorMatrix& x);

/// Distinct values of one variable within a node, with multiplicities.
struct CategoricalColumn {
  std::vector<double> unique_val;
  std::vector<RowIndex> val_count;
};

/// Run-length summary of a node's column (`sorted_rows` must be sorted by
/// `column`).
CategoricalColumn categorical_column(std::span<const RowIndex> sorted_rows, const double* column);

/// Cumulative residual sums s(<=, v, unique_val[i]) for every unique value;
/// the last entry is the node total. `sorted_residuals` follows the node's
/// sorted order for the variable.
std::vector<double> categorical_stats(const CategoricalColumn& col,
                                      std::span<const double> sorted_residuals);

/// One candidate split. `left_count` rows of the node satisfy x_var <= value.
struct Cutpoint {
  int var = 0;
  double value = 0.0;
  RowIndex left_count = 0;
};

struct CutpointGrid {
  std::vector<Cutpoint> candidates;  // grouped by variable, increasing value

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
};

/// Candidate cutpoints for `node` over `vars`. Continuous variables use every
/// distinct value when node.size - 2 <= budget and otherwise every
/// ceil((size - 2) / budget)-th sorted value from the smallest (at most
/// budget of them); categorical variables use their unique values. Candidates
/// that leave a child empty or smaller than `min_node_size` are dropped, as are
/// repeated values.
CutpointGrid build_cutpoint_grid(const SortedIndex& order, NodeRange node, const PredictorMatrix& x,
                                 int budget, std::span<const int> vars,
                                 RowIndex min_node_size = 1);
CutpointGrid build_cutpoint_grid(const SortedIndex& order, NodeRange node, const PredictorMatrix& x,
                                 int budget);

/// Default cutpoint budget min(n, 100).
int default_cutpoint_budget(RowIndex n);

}  // namespace xbart
