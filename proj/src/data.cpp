#include "xbart/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace xbart {

PredictorMatrix::PredictorMatrix(Eigen::MatrixXd values, std::vector<VariableKind> kinds)
    : values_(std::move(values)), kinds_(std::move(kinds)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("predictor matrix needs at least one row and one column");
  }
  if (values_.rows() > static_cast<Eigen::Index>(std::numeric_limits<RowIndex>::max())) {
    throw std::invalid_argument("too many rows");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("predictor matrix contains missing or non-finite values");
  }
  if (kinds_.empty()) {
    kinds_.assign(static_cast<std::size_t>(values_.cols()), VariableKind::kContinuous);
  }
  if (kinds_.size() != static_cast<std::size_t>(values_.cols())) {
    throw std::invalid_argument("variable kind count does not match column count");
  }
}

SortedIndex::SortedIndex(RowIndex rows, int vars)
    : rows_(rows), vars_(vars), order_(static_cast<std::size_t>(vars) * rows) {}

SortedIndex presort(const PredictorMatrix& x) {
  SortedIndex order(x.rows(), x.cols());
  for (int v = 0; v < x.cols(); ++v) {
    auto col = order.column(v, order.root());
    std::iota(col.begin(), col.end(), RowIndex{0});
    const double* values = x.column(v);
    std::stable_sort(col.begin(), col.end(),
                     [values](RowIndex a, RowIndex b) { return values[a] < values[b]; });
  }
  return order;
}

std::pair<NodeRange, NodeRange> sift(SortedIndex& order, NodeRange node, SplitRule rule,
                                     const PredictorMatrix& x, SiftWorkspace& work) {
  if (work.goes_left.size() < x.rows()) work.goes_left.resize(x.rows());
  if (work.spill.size() < node.size) work.spill.resize(node.size);

  // Along the split variable the left child is a prefix.
  const double* split_col = x.column(rule.var);
  auto split_rows = order.column(rule.var, node);
  RowIndex left_size = 0;
  for (RowIndex row : split_rows) {
    const bool left = split_col[row] <= rule.cut;
    work.goes_left[row] = left ? 1 : 0;
    left_size += left ? 1 : 0;
  }

  for (int v = 0; v < order.vars(); ++v) {
    if (v == rule.var) continue;
    auto rows = order.column(v, node);
    RowIndex write = 0;
    RowIndex spilled = 0;
    for (RowIndex row : rows) {
      if (work.goes_left[row]) {
        rows[write++] = row;
      } else {
        work.spill[spilled++] = row;
      }
    }
    std::copy_n(work.spill.begin(), spilled, rows.begin() + write);
  }

  return {NodeRange{node.begin, left_size},
          NodeRange{node.begin + left_size, node.size - left_size}};
}

std::pair<NodeRange, NodeRange> sift(SortedIndex& order, NodeRange node, SplitRule rule,
                                     const PredictorMatrix& x) {
  SiftWorkspace work;
  return sift(order, node, rule, x, work);
}

CategoricalColumn categorical_column(std::span<const RowIndex> sorted_rows, const double* column) {
  CategoricalColumn out;
  for (RowIndex row : sorted_rows) {
    const double value = column[row];
    if (out.unique_val.empty() || out.unique_val.back() != value) {
      out.unique_val.push_back(value);
      out.val_count.push_back(0);
    }
    ++out.val_count.back();
  }
  return out;
}

std::vector<double> categorical_stats(const CategoricalColumn& col,
                                      std::span<const double> sorted_residuals) {
  std::vector<double> sums(col.unique_val.size());
  double running = 0.0;
  std::size_t h = 0;
  for (std::size_t i = 0; i < col.val_count.size(); ++i) {
    for (RowIndex k = 0; k < col.val_count[i]; ++k) running += sorted_residuals[h++];
    sums[i] = running;
  }
  return sums;
}

int default_cutpoint_budget(RowIndex n) {
  return static_cast<int>(std::min<RowIndex>(n, 100));
}

namespace {

void add_continuous_candidates(std::span<const RowIndex> rows, const double* column, int var,
                               int budget, RowIndex min_node_size,
                               std::vector<Cutpoint>& out) {
  const RowIndex m = static_cast<RowIndex>(rows.size());
  if (m < 2) return;
  const RowIndex span = m - 2;
  const auto c = static_cast<RowIndex>(budget);
  // ceil keeps the strided positions spread over the whole node; floor would
  // leave the upper part uncovered whenever c < span < 2c
  const RowIndex stride = span > c ? (span + c - 1) / c : 1;
  const RowIndex count = span > c ? std::min(c, span / stride + 1) : m - 1;

  RowIndex run_end = 0;  // last position holding the current run's value
  bool have_run = false;
  for (RowIndex k = 0; k < count; ++k) {
    const RowIndex h = k * stride;
    if (have_run && h <= run_end) continue;  // same value as the previous candidate
    const double value = column[rows[h]];
    run_end = h;
    while (run_end + 1 < m && column[rows[run_end + 1]] == value) ++run_end;
    have_run = true;
    const RowIndex left = run_end + 1;
    if (left == m) break;  // node maximum: right child would be empty
    if (left < min_node_size || m - left < min_node_size) continue;
    out.push_back({var, value, left});
  }
}

void add_categorical_candidates(std::span<const RowIndex> rows, const double* column, int var,
                                RowIndex min_node_size, std::vector<Cutpoint>& out) {
  const RowIndex m = static_cast<RowIndex>(rows.size());
  RowIndex h = 0;
  while (h < m) {
    const double value = column[rows[h]];
    while (h + 1 < m && column[rows[h + 1]] == value) ++h;
    const RowIndex left = h + 1;
    if (left == m) break;
    if (left >= min_node_size && m - left >= min_node_size) out.push_back({var, value, left});
    ++h;
  }
}

}  // namespace

CutpointGrid build_cutpoint_grid(const SortedIndex& order, NodeRange node, const PredictorMatrix& x,
                                 int budget, std::span<const int> vars, RowIndex min_node_size) {
  if (budget < 1) throw std::invalid_argument("cutpoint budget must be at least 1");
  CutpointGrid grid;
  for (int v : vars) {
    const auto rows = order.column(v, node);
    if (x.kind(v) == VariableKind::kCategorical) {
      add_categorical_candidates(rows, x.column(v), v, min_node_size, grid.candidates);
    } else {
      add_continuous_candidates(rows, x.column(v), v, budget, min_node_size, grid.candidates);
    }
  }
  return grid;
}

CutpointGrid build_cutpoint_grid(const SortedIndex& order, NodeRange node, const PredictorMatrix& x,
                                 int budget) {
  std::vector<int> vars(static_cast<std::size_t>(x.cols()));
  std::iota(vars.begin(), vars.end(), 0);
  return build_cutpoint_grid(order, node, x, budget, vars);
}

}  // namespace xbart
