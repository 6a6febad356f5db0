#pragma once

#include "xbart/data.hpp"
#include "xbart/forest.hpp"
#include "xbart/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace xbart {

enum class MeanFunction { kLinear, kSingleIndex, kTrigPoly, kMax };
enum class PredictorKind { kIndependent, kFactor };
enum class NoiseKind { kGaussian, kStudentT3 };

const char* to_string(MeanFunction f);
const char* to_string(PredictorKind k);
const char* to_string(NoiseKind k);
/// Accepts the CLI spellings (linear, single_index, trig_poly, max;
/// independent, factor; gaussian, t3). Throws std::invalid_argument otherwise.
MeanFunction parse_mean_function(const std::string& s);
PredictorKind parse_predictor_kind(const std::string& s);
NoiseKind parse_noise_kind(const std::string& s);

struct DgpSpec {
  MeanFunction f = MeanFunction::kTrigPoly;
  int n = 10000;
  int p = 30;
  PredictorKind x_kind = PredictorKind::kIndependent;
  NoiseKind err_kind = NoiseKind::kGaussian;
  double kappa = 1.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when p is too small for f or the factor
  /// layout, or n < 2.
  void validate() const;
};

/// Throws std::invalid_argument if x has too few entries for f.
double gen_mean(MeanFunction f, std::span<const double> x);
Eigen::VectorXd gen_mean(MeanFunction f, const Eigen::MatrixXd& x);

/// n x p design. Factor kind: k = p / 5 latent normals, row j of B loads on
/// factor j / 5, noise variance 0.01 k, then every column divided by its
/// sample standard deviation.
Eigen::MatrixXd gen_X(int n, int p, PredictorKind kind, Rng& rng);

/// Noise with variance kappa^2 var_f; t3 draws are scaled by 1/sqrt(3).
Eigen::VectorXd gen_noise(NoiseKind kind, double kappa, double var_f, int n, Rng& rng);

double rmse(const Eigen::VectorXd& yhat, const Eigen::VectorXd& truth);

struct SyntheticData {
  Eigen::MatrixXd x;
  Eigen::VectorXd f;
  Eigen::VectorXd y;
  double var_f = 0.0;
};

/// Training set (noisy y) and a held-out set of n_test fresh draws from the
/// same generator. The test y equals f.
struct SyntheticSplit {
  SyntheticData train;
  SyntheticData test;
};
SyntheticSplit generate(const DgpSpec& spec, int n_test, Rng& rng);

inline int default_test_size(int n) { return std::min(n, 10000); }

struct BenchRow {
  int rep = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double seconds = 0.0;
};

struct BenchReport {
  DgpSpec spec;
  std::vector<BenchRow> rows;
  double mean_rmse = 0.0;
  double sd_rmse = 0.0;  // n - 1 denominator, 0 for a single rep
};

/// Runs `reps` independent train/fit/predict cycles. Rep r uses
/// derive_seed(spec.seed, r) for data and model randomness.
BenchReport bench(const DgpSpec& spec, const Hyperparams& params, int reps);

/// Plain-text table (dgp, rep, rmse, seconds) followed by a mean +- sd line.
void print_report(std::ostream& out, const BenchReport& report);
/// CSV with the seed-determined columns only (no wall time), so that two runs
/// with the same seed produce identical bytes.
void write_report_csv(std::ostream& out, const BenchReport& report);

}  // namespace xbart
