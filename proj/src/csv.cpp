#include "xbart/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xbart {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  // from_chars rejects a leading '+'
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::runtime_error("row " + std::to_string(row) + ", column '" + column +
                             "': expected a finite number, got '" + field + "'");
  }
  return value;
}

}  // namespace

int Table::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == name) return static_cast<int>(j);
  }
  return -1;
}

Table read_csv(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV is empty (header row required)");
  table.columns = split_fields(line);
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (table.columns[j].empty()) {
      throw std::runtime_error("header column " + std::to_string(j + 1) + " has no name");
    }
    for (std::size_t k = 0; k < j; ++k) {
      if (table.columns[k] == table.columns[j]) {
        throw std::runtime_error("duplicate column name '" + table.columns[j] + "'");
      }
    }
  }
  const std::size_t width = table.columns.size();
  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw std::runtime_error("line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, header has " +
                               std::to_string(width));
    }
    for (std::size_t j = 0; j < width; ++j) {
      flat.push_back(parse_number(fields[j], line_no, table.columns[j]));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("CSV has a header but no data rows");
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * width + j];
    }
  }
  return table;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

VariableKind Schema::kind_of(const std::string& name) const {
  for (const auto& [n, kind] : entries) {
    if (n == name) return kind;
  }
  return VariableKind::kContinuous;
}

Schema read_schema(std::istream& in) {
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream fields(t);
    std::string name, kind, extra;
    fields >> name >> kind;
    if (kind.empty() || (fields >> extra)) {
      throw std::runtime_error("schema line " + std::to_string(line_no) +
                               ": expected '<name> <continuous|categorical>'");
    }
    if (kind == "continuous") {
      schema.entries.emplace_back(name, VariableKind::kContinuous);
    } else if (kind == "categorical") {
      schema.entries.emplace_back(name, VariableKind::kCategorical);
    } else {
      throw std::runtime_error("schema line " + std::to_string(line_no) + ": unknown kind '" +
                               kind + "'");
    }
  }
  return schema;
}

Schema read_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_schema(in);
}

TrainingSet training_set(const Table& table, const std::string& target, const Schema& schema) {
  const int t = table.index_of(target);
  if (t < 0) throw std::runtime_error("target column '" + target + "' not found");
  if (table.columns.size() < 2) throw std::runtime_error("no feature columns besides the target");
  for (const auto& [name, kind] : schema.entries) {
    if (table.index_of(name) < 0) {
      throw std::runtime_error("schema names column '" + name + "' which is not in the data");
    }
  }
  TrainingSet out;
  std::vector<VariableKind> kinds;
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (static_cast<int>(j) == t) continue;
    out.feature_names.push_back(table.columns[j]);
    kinds.push_back(schema.kind_of(table.columns[j]));
    keep.push_back(static_cast<Eigen::Index>(j));
  }
  Eigen::MatrixXd x(table.values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = table.values.col(keep[k]);
  }
  out.x = PredictorMatrix(std::move(x), std::move(kinds));
  out.y = table.values.col(t);
  return out;
}

Eigen::MatrixXd select_columns(const Table& table, const std::vector<std::string>& names) {
  Eigen::MatrixXd x(table.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t k = 0; k < names.size(); ++k) {
    const int j = table.index_of(names[k]);
    if (j < 0) throw std::runtime_error("column '" + names[k] + "' required by the model is missing");
    x.col(static_cast<Eigen::Index>(k)) = table.values.col(j);
  }
  return x;
}

void write_predictions(std::ostream& out, const Eigen::MatrixXd& draws, bool all_draws) {
  if (draws.cols() == 0) throw std::invalid_argument("no prediction draws to write");
  char buf[32];
  out << "row";
  if (all_draws) {
    for (Eigen::Index k = 0; k < draws.cols(); ++k) out << ",draw_" << k;
  } else {
    out << ",yhat";
  }
  out << '\n';
  const Eigen::VectorXd mean = draws.rowwise().mean();
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    out << i;
    if (all_draws) {
      for (Eigen::Index k = 0; k < draws.cols(); ++k) {
        std::snprintf(buf, sizeof buf, ",%.17g", draws(i, k));
        out << buf;
      }
    } else {
      std::snprintf(buf, sizeof buf, ",%.17g", mean[i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace xbart
