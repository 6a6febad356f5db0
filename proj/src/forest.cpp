#include "xbart/forest.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace xbart {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void Hyperparams::validate(int p) const {
  require(num_trees >= 1, "num_trees must be at least 1");
  require(burnin >= 1 && burnin < num_sweeps, "burn-in must satisfy 1 <= burnin < sweeps");
  require(a_sigma > 0.0 && a_tau > 0.0, "inverse-Gamma shapes must be positive");
  require(!b_sigma || *b_sigma > 0.0, "b_sigma must be positive");
  require(!b_tau || *b_tau > 0.0, "b_tau must be positive");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(beta >= 0.0, "beta must be non-negative");
  require(cutpoints >= 0, "cutpoint budget must be non-negative (0 selects the default)");
  require(mtry >= 0 && mtry <= p, "mtry must lie in [0, p] (0 selects p)");
  require(stop.max_depth >= 1, "max_depth must be at least 1");
  require(stop.min_node_size >= 1, "min_node_size must be at least 1");
}

Hyperparams resolve_hyperparams(const Hyperparams& params, RowIndex n, int p, double var_y) {
  params.validate(p);
  Hyperparams out = params;
  if (out.cutpoints == 0) out.cutpoints = default_cutpoint_budget(n);
  if (out.mtry == 0) out.mtry = p;
  if (!out.b_sigma) out.b_sigma = 0.5 * var_y;
  if (!out.b_tau) out.b_tau = 0.5 * var_y / out.num_trees;
  return out;
}

std::span<const ForestDraw> SweepDraws::retained() const {
  const auto skip = std::min<std::size_t>(static_cast<std::size_t>(params.burnin), draws.size());
  return std::span<const ForestDraw>(draws).subspan(skip);
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

double update_sigma2(const Eigen::VectorXd& residual, double a_sigma, double b_sigma, Rng& rng) {
  const double shape = static_cast<double>(residual.size()) + a_sigma;
  const double rate = residual.squaredNorm() + b_sigma;
  return draw_inverse_gamma(rng, shape, rate);
}

double update_tau(std::span<const double> leaf_values, double a_tau, double b_tau, Rng& rng) {
  double sum_sq = 0.0;
  for (double mu : leaf_values) sum_sq += mu * mu;
  return draw_inverse_gamma(rng, static_cast<double>(leaf_values.size()) + a_tau, sum_sq + b_tau);
}

Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd& concentration, Rng& rng) {
  Eigen::VectorXd out(concentration.size());
  for (Eigen::Index j = 0; j < concentration.size(); ++j) {
    out[j] = std::gamma_distribution<double>(concentration[j], 1.0)(rng);
  }
  return out / out.sum();
}

Eigen::VectorXd update_variable_weights(Eigen::VectorXd& wbar, std::span<const int> previous,
                                        std::span<const int> current, Rng& rng) {
  require(previous.size() == static_cast<std::size_t>(wbar.size()) &&
              current.size() == static_cast<std::size_t>(wbar.size()),
          "split count vectors must have one entry per variable");
  for (Eigen::Index j = 0; j < wbar.size(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    wbar[j] += static_cast<double>(current[k] - previous[k]);
  }
  return draw_dirichlet(wbar, rng);
}

SweepDraws run(const Eigen::VectorXd& y, const PredictorMatrix& x, const Hyperparams& params,
               std::uint64_t seed, const TreeUpdateObserver& observer) {
  require(y.size() == static_cast<Eigen::Index>(x.rows()), "y length must equal the row count");
  require(y.allFinite(), "y contains missing or non-finite values");

  const RowIndex n = x.rows();
  const int p = x.cols();
  double var_y = sample_variance(y);
  if (!(var_y > 0.0)) var_y = 1.0;  // constant response: fall back to unit scale

  SweepDraws out;
  out.params = resolve_hyperparams(params, n, p, var_y);
  const Hyperparams& hp = out.params;
  out.offset = y.mean();
  const Eigen::VectorXd centered = y.array() - out.offset;

  Rng rng(seed);
  ModelState state;
  state.sigma2 = var_y;
  state.tau = var_y / hp.num_trees;
  state.fitted = Eigen::MatrixXd::Zero(n, hp.num_trees);
  state.full_residual = centered;
  state.wbar = Eigen::VectorXd::Ones(p);
  state.w = Eigen::VectorXd::Constant(p, 1.0 / p);

  std::vector<Tree> trees(static_cast<std::size_t>(hp.num_trees), Tree::single_leaf(0.0));
  std::vector<std::vector<int>> split_counts(static_cast<std::size_t>(hp.num_trees),
                                             std::vector<int>(static_cast<std::size_t>(p), 0));

  const SortedIndex order = presort(x);
  TreeGrower grower(x, order);
  Eigen::VectorXd partial(n);

  GrowOptions options;
  options.alpha = hp.alpha;
  options.beta = hp.beta;
  options.cutpoints = hp.cutpoints;
  options.stop = hp.stop;

  out.draws.reserve(static_cast<std::size_t>(hp.num_sweeps));
  for (int sweep = 0; sweep < hp.num_sweeps; ++sweep) {
    // the first sweep scores every variable to seed the split counts
    options.mtry = sweep == 0 ? p : hp.mtry;
    for (int h = 0; h < hp.num_trees; ++h) {
      const auto slot = static_cast<std::size_t>(h);
      auto fitted_h = state.fitted.col(h);
      partial = state.full_residual + fitted_h;

      options.weights = std::span<const double>(state.w.data(), static_cast<std::size_t>(p));
      auto grown = grower.grow(std::span<const double>(partial.data(), n), state.sigma2, state.tau,
                               options, rng, std::span<double>(fitted_h.data(), n));
      state.full_residual = partial - fitted_h;
      trees[slot] = std::move(grown.tree);

      state.w = update_variable_weights(state.wbar, split_counts[slot], grown.split_counts, rng);
      split_counts[slot] = std::move(grown.split_counts);

      state.sigma2 = update_sigma2(state.full_residual, hp.a_sigma, *hp.b_sigma, rng);

      if (observer) observer(TreeUpdateEvent{sweep, h, state, trees, centered});
    }
    if (hp.sample_tau) {
      std::vector<double> leaves;
      for (const Tree& t : trees) {
        const auto v = t.leaf_values();
        leaves.insert(leaves.end(), v.begin(), v.end());
      }
      state.tau = update_tau(leaves, hp.a_tau, *hp.b_tau, rng);
    }
    out.draws.push_back(ForestDraw{sweep, trees, state.sigma2, state.tau});
  }
  return out;
}

}  // namespace xbart
