#include "xbart/dgp.hpp"

#include "xbart/model.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace xbart {

const char* to_string(MeanFunction f) {
  switch (f) {
    case MeanFunction::kLinear: return "linear";
    case MeanFunction::kSingleIndex: return "single_index";
    case MeanFunction::kTrigPoly: return "trig_poly";
    case MeanFunction::kMax: return "max";
  }
  return "?";
}

const char* to_string(PredictorKind k) {
  return k == PredictorKind::kIndependent ? "independent" : "factor";
}

const char* to_string(NoiseKind k) { return k == NoiseKind::kGaussian ? "gaussian" : "t3"; }

MeanFunction parse_mean_function(const std::string& s) {
  for (auto f : {MeanFunction::kLinear, MeanFunction::kSingleIndex, MeanFunction::kTrigPoly,
                 MeanFunction::kMax}) {
    if (s == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown mean function '" + s + "'");
}

PredictorKind parse_predictor_kind(const std::string& s) {
  if (s == "independent") return PredictorKind::kIndependent;
  if (s == "factor") return PredictorKind::kFactor;
  throw std::invalid_argument("unknown predictor kind '" + s + "'");
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "t3" || s == "student_t3") return NoiseKind::kStudentT3;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

namespace {

int min_features(MeanFunction f) {
  switch (f) {
    case MeanFunction::kLinear: return 2;
    case MeanFunction::kSingleIndex: return 10;
    case MeanFunction::kTrigPoly: return 4;
    case MeanFunction::kMax: return 3;
  }
  return 1;
}

}  // namespace

void DgpSpec::validate() const {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (p < min_features(f)) {
    throw std::invalid_argument(std::string(to_string(f)) + " needs p >= " +
                                std::to_string(min_features(f)));
  }
  if (x_kind == PredictorKind::kFactor && p % 5 != 0) {
    throw std::invalid_argument("factor predictors need p divisible by 5");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("kappa must be finite and non-negative");
  }
}

double gen_mean(MeanFunction f, std::span<const double> x) {
  const auto p = static_cast<int>(x.size());
  if (p < min_features(f)) {
    throw std::invalid_argument(std::string(to_string(f)) + " needs at least " +
                                std::to_string(min_features(f)) + " features");
  }
  switch (f) {
    case MeanFunction::kLinear: {
      double s = 0.0;
      for (int j = 0; j < p; ++j) s += x[j] * (-2.0 + 4.0 * j / (p - 1));
      return s;
    }
    case MeanFunction::kSingleIndex: {
      double a = 0.0;
      for (int j = 0; j < 10; ++j) {
        const double d = x[j] - (-1.5 + j / 3.0);
        a += d * d;
      }
      return 10.0 * std::sqrt(a) + std::sin(5.0 * a);
    }
    case MeanFunction::kTrigPoly:
      return 5.0 * std::sin(3.0 * x[0]) + 2.0 * x[1] * x[1] + 3.0 * x[2] * x[3];
    case MeanFunction::kMax:
      return std::max({x[0], x[1], x[2]});
  }
  return 0.0;
}

Eigen::VectorXd gen_mean(MeanFunction f, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    out[i] = gen_mean(f, row);
  }
  return out;
}

Eigen::MatrixXd gen_X(int n, int p, PredictorKind kind, Rng& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("gen_X needs n, p >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  if (kind == PredictorKind::kIndependent) {
    // row-major fill so the stream order matches a row-by-row generator
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
    }
    return x;
  }
  if (p % 5 != 0) throw std::invalid_argument("factor predictors need p divisible by 5");
  const int k = p / 5;
  Eigen::MatrixXd factors(k, n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) factors(c, i) = normal(rng);
  }
  const double noise_sd = std::sqrt(0.01 * k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = factors(j / 5, i) + noise_sd * normal(rng);
  }
  if (n >= 2) {
    for (int j = 0; j < p; ++j) {
      const double mean = x.col(j).mean();
      const double sd =
          std::sqrt((x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
      if (sd > 0.0) x.col(j) /= sd;
    }
  }
  return x;
}

Eigen::VectorXd gen_noise(NoiseKind kind, double kappa, double var_f, int n, Rng& rng) {
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(n);
  if (kappa == 0.0) return eps;
  const double scale = kappa * std::sqrt(var_f);
  if (kind == NoiseKind::kGaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < n; ++i) eps[i] = scale * normal(rng);
  } else {
    std::student_t_distribution<double> t3(3.0);
    for (int i = 0; i < n; ++i) eps[i] = scale * t3(rng) / std::sqrt(3.0);
  }
  return eps;
}

double rmse(const Eigen::VectorXd& yhat, const Eigen::VectorXd& truth) {
  if (yhat.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
  if (yhat.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((yhat - truth).squaredNorm() / static_cast<double>(yhat.size()));
}

SyntheticSplit generate(const DgpSpec& spec, int n_test, Rng& rng) {
  spec.validate();
  if (n_test < 1) throw std::invalid_argument("test size must be positive");
  SyntheticSplit out;
  out.train.x = gen_X(spec.n, spec.p, spec.x_kind, rng);
  out.train.f = gen_mean(spec.f, out.train.x);
  out.train.var_f = sample_variance(out.train.f);
  out.train.y = out.train.f + gen_noise(spec.err_kind, spec.kappa, out.train.var_f, spec.n, rng);

  out.test.x = gen_X(n_test, spec.p, spec.x_kind, rng);
  out.test.f = gen_mean(spec.f, out.test.x);
  out.test.var_f = out.train.var_f;
  out.test.y = out.test.f;
  return out;
}

BenchReport bench(const DgpSpec& spec, const Hyperparams& params, int reps) {
  spec.validate();
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  BenchReport report;
  report.spec = spec;
  const int n_test = default_test_size(spec.n);
  for (int r = 0; r < reps; ++r) {
    BenchRow row;
    row.rep = r;
    row.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(r));
    Rng data_rng(row.seed);
    const SyntheticSplit data = generate(spec, n_test, data_rng);

    const auto start = std::chrono::steady_clock::now();
    const PredictorMatrix x(data.train.x);
    const SweepDraws fit = run(data.train.y, x, params, derive_seed(row.seed, 1));
    const Eigen::VectorXd yhat = predict_mean(predict_draws(fit, data.test.x));
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.rmse = rmse(yhat, data.test.f);
    report.rows.push_back(row);
  }
  double sum = 0.0;
  for (const BenchRow& row : report.rows) sum += row.rmse;
  report.mean_rmse = sum / reps;
  if (reps > 1) {
    double ss = 0.0;
    for (const BenchRow& row : report.rows) ss += (row.rmse - report.mean_rmse) * (row.rmse - report.mean_rmse);
    report.sd_rmse = std::sqrt(ss / (reps - 1));
  }
  return report;
}

void print_report(std::ostream& out, const BenchReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %4s %12s %10s\n", "dgp", "rep", "rmse", "seconds");
  out << line;
  for (const BenchRow& row : report.rows) {
    std::snprintf(line, sizeof line, "%-14s %4d %12.6f %10.3f\n", to_string(report.spec.f),
                  row.rep, row.rmse, row.seconds);
    out << line;
  }
  std::snprintf(line, sizeof line, "mean rmse %.6f +- %.6f over %zu reps\n", report.mean_rmse,
                report.sd_rmse, report.rows.size());
  out << line;
}

void write_report_csv(std::ostream& out, const BenchReport& report) {
  const DgpSpec& s = report.spec;
  char line[256];
  out << "dgp,n,p,x,err,kappa,rep,seed,rmse\n";
  for (const BenchRow& row : report.rows) {
    std::snprintf(line, sizeof line, "%s,%d,%d,%s,%s,%.17g,%d,%" PRIu64 ",%.17g\n", to_string(s.f),
                  s.n, s.p, to_string(s.x_kind), to_string(s.err_kind), s.kappa, row.rep, row.seed,
                  row.rmse);
    out << line;
  }
}

}  // namespace xbart
