#pragma once

#include "xbart/data.hpp"
#include "xbart/random.hpp"
#include "xbart/tree.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace xbart {

/// Fixed settings of a fit. Optional entries are resolved from the data by
/// resolve_hyperparams.
struct Hyperparams {
  int num_trees = 20;
  int num_sweeps = 40;
  int burnin = 15;
  double a_sigma = 3.0;
  std::optional<double> b_sigma;  // default 0.5 * Var(y)
  double a_tau = 3.0;
  std::optional<double> b_tau;    // default 0.5 * Var(y) / num_trees
  double alpha = 0.95;
  double beta = 1.25;
  int cutpoints = 0;              // 0: min(n, 100)
  int mtry = 0;                   // 0: p
  StopRule stop;
  bool sample_tau = true;

  /// Throws std::invalid_argument when a setting is out of range for p
  /// variables.
  void validate(int p) const;
};

/// Copy of `params` with every data-dependent default filled in.
Hyperparams resolve_hyperparams(const Hyperparams& params, RowIndex n, int p, double var_y);

/// Mutable sampler state between tree updates.
struct ModelState {
  double sigma2 = 1.0;
  double tau = 1.0;
  Eigen::MatrixXd fitted;         // n x L, column l = g(X; T_l, mu_l)
  Eigen::VectorXd full_residual;  // centered y minus every column of fitted
  Eigen::VectorXd wbar;           // Dirichlet concentration (split counts + 1)
  Eigen::VectorXd w;              // variable selection probabilities
};

/// The forest after one sweep.
struct ForestDraw {
  int sweep = 0;
  std::vector<Tree> trees;
  double sigma2 = 0.0;
  double tau = 0.0;
};

/// Output of a full run: one draw per sweep plus the centering constant that
/// is added back at prediction time.
struct SweepDraws {
  Hyperparams params;  // resolved
  double offset = 0.0;
  std::vector<ForestDraw> draws;

  /// Draws after burn-in.
  std::span<const ForestDraw> retained() const;
};

/// Called after every tree update with the live state (test hook).
struct TreeUpdateEvent {
  int sweep;
  int tree;
  const ModelState& state;
  std::span<const Tree> trees;
  const Eigen::VectorXd& centered_y;
};
using TreeUpdateObserver = std::function<void(const TreeUpdateEvent&)>;

/// Runs the sweep sampler on (y, x). Throws std::invalid_argument for
/// mismatched sizes, non-finite y, or invalid hyperparameters.
SweepDraws run(const Eigen::VectorXd& y, const PredictorMatrix& x, const Hyperparams& params,
               std::uint64_t seed, const TreeUpdateObserver& observer = {});

/// sigma2 ~ inverse-Gamma(n + a_sigma, r'r + b_sigma).
double update_sigma2(const Eigen::VectorXd& residual, double a_sigma, double b_sigma, Rng& rng);

/// tau ~ inverse-Gamma(#leaves + a_tau, sum mu^2 + b_tau).
double update_tau(std::span<const double> leaf_values, double a_tau, double b_tau, Rng& rng);

/// Swaps a tree's split counts in the Dirichlet concentration,
/// wbar <- wbar - previous + current, then draws w ~ Dirichlet(wbar).
Eigen::VectorXd update_variable_weights(Eigen::VectorXd& wbar, std::span<const int> previous,
                                        std::span<const int> current, Rng& rng);

Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd& concentration, Rng& rng);

/// Sample variance with n - 1 denominator; 0 for a single value.
double sample_variance(const Eigen::VectorXd& v);

}  // namespace xbart
