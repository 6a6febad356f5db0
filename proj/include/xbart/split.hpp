#pragma once

#include "xbart/data.hpp"
#include "xbart/random.hpp"

#include <optional>
#include <span>
#include <vector>

namespace xbart {

/// Sum and count of the residuals in a node.
struct SuffStats {
  double sum = 0.0;
  RowIndex count = 0;

  friend SuffStats operator-(SuffStats a, SuffStats b) {
    return {a.sum - b.sum, a.count - b.count};
  }
};

/// Log prior predictive of one leaf under mu ~ N(0, tau), y | mu ~ N(mu, sigma2),
/// dropping the terms shared by every candidate partition of the same node:
///   0.5 * [log(sigma2 / (sigma2 + tau n)) + tau s^2 / (sigma2 (sigma2 + tau n))].
/// Throws std::invalid_argument on non-finite input, sigma2 <= 0 or tau < 0.
double node_marginal_loglik(SuffStats stats, double sigma2, double tau);

/// log L(c) for a candidate with the given child statistics.
double split_criterion_log(SuffStats left, SuffStats right, double sigma2, double tau);

/// log(|C| ((1 + depth)^beta / alpha - 1)); -infinity when the weight is zero
/// (alpha == 1 at the root).
double null_weight_log(int depth, std::size_t num_candidates, double alpha, double beta);

/// log L(null) = null_weight_log + node_marginal_loglik(parent).
double null_criterion_log(SuffStats parent, int depth, std::size_t num_candidates, double alpha,
                          double beta, double sigma2, double tau);

/// Table-backed node_marginal_loglik for fixed (sigma2, tau), used in the
/// candidate scan. Agrees bit-for-bit with the free function.
class GaussianCriterion {
 public:
  GaussianCriterion(double sigma2, double tau, RowIndex max_count);

  double sigma2() const { return sigma2_; }
  double tau() const { return tau_; }

  double log_marginal(SuffStats stats) const {
    return 0.5 * (log_ratio_[stats.count] + coef_[stats.count] * stats.sum * stats.sum);
  }
  double split_log(SuffStats left, SuffStats right) const {
    return log_marginal(left) + log_marginal(right);
  }

 private:
  double sigma2_;
  double tau_;
  std::vector<double> log_ratio_;
  std::vector<double> coef_;
};

/// Log criterion of every grid candidate plus the null option at one node.
struct CandidateScores {
  std::vector<double> log_scores;
  std::vector<SuffStats> left;  // left-child statistics per candidate
  SuffStats parent;
  double null_log_score = 0.0;
  int depth = 0;

  std::size_t size() const { return log_scores.size(); }
  SuffStats right(std::size_t i) const { return parent - left[i]; }
};

/// Scores every candidate of `grid` with one cumulative-sum pass per variable.
/// `residuals` is indexed by row id.
CandidateScores scan_candidates(const SortedIndex& order, NodeRange node, const CutpointGrid& grid,
                                std::span<const double> residuals,
                                const GaussianCriterion& criterion, int depth, double alpha,
                                double beta);
CandidateScores scan_candidates(const SortedIndex& order, NodeRange node, const CutpointGrid& grid,
                                std::span<const double> residuals, double sigma2, double tau,
                                int depth, double alpha, double beta);

/// Normalized probabilities; entry size() is the null option.
std::vector<double> cutpoint_probabilities(const CandidateScores& scores);

/// Index drawn with probability softmax(log_weights); uses one uniform.
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);
/// Same distribution via argmax of log_weights + i.i.d. Gumbel(0, 1) noise.
std::size_t sample_log_categorical_gumbel(std::span<const double> log_weights, Rng& rng);

/// Draws a candidate index, or nullopt for the null cutpoint.
std::optional<std::size_t> sample_cutpoint(const CandidateScores& scores, Rng& rng);
std::optional<std::size_t> sample_cutpoint_gumbel(const CandidateScores& scores, Rng& rng);

/// Population split criterion
///   (1 / sigma2) [P(x <= c) E[Y | x <= c]^2 + P(x > c) E[Y | x > c]^2].
double theoretical_criterion(double prob_left, double mean_left, double mean_right, double sigma2);

/// Data version of the population criterion at a node of n rows:
///   (1/n) sum_b [tau s_b^2 / (sigma2 (sigma2 + tau n_b)) + log(sigma2 / (sigma2 + tau n_b))]
///   + gumbel / n,
/// i.e. (2 log L(c) + gumbel) / n. Converges to theoretical_criterion.
double empirical_criterion(SuffStats left, SuffStats right, double sigma2, double tau,
                           double gumbel);

}  // namespace xbart
