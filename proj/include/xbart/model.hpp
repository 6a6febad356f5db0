#pragma once

#include "xbart/forest.hpp"
#include "xbart/io.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace xbart {

/// A fitted model: resolved hyperparameters, centering constant, training
/// schema and the retained (post burn-in) forest draws.
struct Model {
  Hyperparams params;
  double offset = 0.0;
  std::vector<std::string> feature_names;
  std::vector<VariableKind> kinds;
  std::vector<ForestDraw> draws;

  int num_features() const { return static_cast<int>(kinds.size()); }
};

/// Keeps the post burn-in draws of a run. Feature names default to x0, x1, ...
Model make_model(const SweepDraws& run, const PredictorMatrix& x,
                 std::vector<std::string> feature_names = {});

/// Rows = test observations, columns = retained draws; entry (i, k) is the
/// offset plus the sum of the draw-k trees at row i.
Eigen::MatrixXd predict_draws(const Model& model, const Eigen::MatrixXd& x_test);
Eigen::MatrixXd predict_draws(const SweepDraws& draws, const Eigen::MatrixXd& x_test);

/// Row means of a prediction matrix.
Eigen::VectorXd predict_mean(const Eigen::MatrixXd& draws);

/// Binary model container ("XBRT" magic, u32 version). save_model throws
/// IoError(kEmptyModel) for a model without draws; load_model throws IoError
/// with kBadMagic, kVersionMismatch, kTruncated or kCorrupt.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace xbart
