#pragma once

#include "xbart/data.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace xbart {

/// Numeric table read from a CSV with a header row. Fields are split on commas;
/// surrounding whitespace and double quotes are stripped. Empty cells, NA, NaN
/// and non-numeric cells are rejected with std::runtime_error naming the row
/// and column.
struct Table {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;

  int index_of(const std::string& name) const;  // -1 when absent
};

Table read_csv(std::istream& in);
Table read_csv(const std::string& path);

/// Schema sidecar: one "name kind" pair per line, kind in {continuous,
/// categorical}. Blank lines and lines starting with '#' are skipped. Columns
/// not listed are continuous.
struct Schema {
  std::vector<std::pair<std::string, VariableKind>> entries;

  VariableKind kind_of(const std::string& name) const;
};

Schema read_schema(std::istream& in);
Schema read_schema(const std::string& path);

/// Training split of a table: every column except `target` becomes a feature.
struct TrainingSet {
  std::vector<std::string> feature_names;
  PredictorMatrix x;
  Eigen::VectorXd y;
};
TrainingSet training_set(const Table& table, const std::string& target, const Schema& schema = {});

/// Columns of `table` reordered to `names`. Extra columns are ignored; a
/// missing name throws std::runtime_error.
Eigen::MatrixXd select_columns(const Table& table, const std::vector<std::string>& names);

/// "row,yhat" per observation, or "row,draw_0,...,draw_{K-1}" when
/// `all_draws`; numbers use round-trip precision.
void write_predictions(std::ostream& out, const Eigen::MatrixXd& draws, bool all_draws);

}  // namespace xbart
