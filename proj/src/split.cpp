#include "xbart/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace xbart {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_variances(double sigma2, double tau) {
  if (!std::isfinite(sigma2) || !std::isfinite(tau)) {
    throw std::invalid_argument("non-finite variance in split criterion");
  }
  if (sigma2 <= 0.0) throw std::invalid_argument("sigma2 must be positive");
  if (tau < 0.0) throw std::invalid_argument("tau must be non-negative");
}

}  // namespace

double node_marginal_loglik(SuffStats stats, double sigma2, double tau) {
  check_variances(sigma2, tau);
  if (!std::isfinite(stats.sum)) throw std::invalid_argument("non-finite sufficient statistic");
  const double denom = sigma2 + tau * static_cast<double>(stats.count);
  const double log_ratio = std::log(sigma2 / denom);
  const double coef = tau / (sigma2 * denom);
  return 0.5 * (log_ratio + coef * stats.sum * stats.sum);
}

double split_criterion_log(SuffStats left, SuffStats right, double sigma2, double tau) {
  return node_marginal_loglik(left, sigma2, tau) + node_marginal_loglik(right, sigma2, tau);
}

double null_weight_log(int depth, std::size_t num_candidates, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (num_candidates == 0) throw std::invalid_argument("null weight needs at least one candidate");
  const double weight = std::pow(1.0 + depth, beta) / alpha - 1.0;
  if (weight <= 0.0) return kNegInf;
  return std::log(static_cast<double>(num_candidates)) + std::log(weight);
}

double null_criterion_log(SuffStats parent, int depth, std::size_t num_candidates, double alpha,
                          double beta, double sigma2, double tau) {
  return null_weight_log(depth, num_candidates, alpha, beta) +
         node_marginal_loglik(parent, sigma2, tau);
}

GaussianCriterion::GaussianCriterion(double sigma2, double tau, RowIndex max_count)
    : sigma2_(sigma2), tau_(tau), log_ratio_(max_count + 1), coef_(max_count + 1) {
  check_variances(sigma2, tau);
  for (RowIndex n = 0; n <= max_count; ++n) {
    const double denom = sigma2 + tau * static_cast<double>(n);
    log_ratio_[n] = std::log(sigma2 / denom);
    coef_[n] = tau / (sigma2 * denom);
  }
}

CandidateScores scan_candidates(const SortedIndex& order, NodeRange node, const CutpointGrid& grid,
                                std::span<const double> residuals,
                                const GaussianCriterion& criterion, int depth, double alpha,
                                double beta) {
  CandidateScores out;
  out.depth = depth;
  out.log_scores.resize(grid.size());
  out.left.resize(grid.size());

  double total = 0.0;
  for (RowIndex row : order.column(0, node)) total += residuals[row];
  out.parent = {total, node.size};

  int current_var = -1;
  std::span<const RowIndex> rows;
  RowIndex consumed = 0;
  double running = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Cutpoint& c = grid.candidates[i];
    if (c.var != current_var) {
      current_var = c.var;
      rows = order.column(c.var, node);
      consumed = 0;
      running = 0.0;
    }
    while (consumed < c.left_count) running += residuals[rows[consumed++]];
    const SuffStats left{running, c.left_count};
    out.left[i] = left;
    out.log_scores[i] = criterion.split_log(left, out.parent - left);
  }

  out.null_log_score = grid.empty()
                           ? 0.0
                           : null_weight_log(depth, grid.size(), alpha, beta) +
                                 criterion.log_marginal(out.parent);
  return out;
}

CandidateScores scan_candidates(const SortedIndex& order, NodeRange node, const CutpointGrid& grid,
                                std::span<const double> residuals, double sigma2, double tau,
                                int depth, double alpha, double beta) {
  const GaussianCriterion criterion(sigma2, tau, node.size);
  return scan_candidates(order, node, grid, residuals, criterion, depth, alpha, beta);
}

namespace {

std::vector<double> all_log_weights(const CandidateScores& scores) {
  std::vector<double> w(scores.log_scores);
  w.push_back(scores.null_log_score);
  return w;
}

}  // namespace

std::vector<double> cutpoint_probabilities(const CandidateScores& scores) {
  std::vector<double> w = all_log_weights(scores);
  const double top = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw std::invalid_argument("no options to sample from");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (top == kNegInf) throw std::invalid_argument("all options have zero weight");

  std::vector<double> cumulative(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    total += std::exp(log_weights[i] - top);
    cumulative[i] = total;
  }
  const double target = draw_uniform(rng) * total;
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it != cumulative.end()) return static_cast<std::size_t>(it - cumulative.begin());
  // target landed on total through rounding: take the last option with weight
  std::size_t i = log_weights.size();
  while (i > 0 && log_weights[i - 1] == kNegInf) --i;
  return i - 1;
}

std::size_t sample_log_categorical_gumbel(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw std::invalid_argument("no options to sample from");
  std::size_t best = log_weights.size();
  double best_value = kNegInf;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    double u = draw_uniform(rng);
    if (u <= 0.0) u = std::numeric_limits<double>::min();
    const double perturbed = log_weights[i] - std::log(-std::log(u));
    if (log_weights[i] != kNegInf && (best == log_weights.size() || perturbed > best_value)) {
      best = i;
      best_value = perturbed;
    }
  }
  if (best == log_weights.size()) throw std::invalid_argument("all options have zero weight");
  return best;
}

std::optional<std::size_t> sample_cutpoint(const CandidateScores& scores, Rng& rng) {
  const std::size_t pick = sample_log_categorical(all_log_weights(scores), rng);
  if (pick == scores.size()) return std::nullopt;
  return pick;
}

std::optional<std::size_t> sample_cutpoint_gumbel(const CandidateScores& scores, Rng& rng) {
  const std::size_t pick = sample_log_categorical_gumbel(all_log_weights(scores), rng);
  if (pick == scores.size()) return std::nullopt;
  return pick;
}

double theoretical_criterion(double prob_left, double mean_left, double mean_right, double sigma2) {
  return (prob_left * mean_left * mean_left + (1.0 - prob_left) * mean_right * mean_right) / sigma2;
}

double empirical_criterion(SuffStats left, SuffStats right, double sigma2, double tau,
                           double gumbel) {
  const double n = static_cast<double>(left.count) + static_cast<double>(right.count);
  return (2.0 * split_criterion_log(left, right, sigma2, tau) + gumbel) / n;
}

}  // namespace xbart
