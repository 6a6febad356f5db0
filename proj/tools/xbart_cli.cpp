#include "xbart/csv.hpp"
#include "xbart/dgp.hpp"
#include "xbart/model.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void add_fit_flags(CLI::App& cmd, xbart::Hyperparams& hp) {
  cmd.add_option("--trees", hp.num_trees, "number of trees L")->capture_default_str();
  cmd.add_option("--sweeps", hp.num_sweeps, "number of sweeps I")->capture_default_str();
  cmd.add_option("--burnin", hp.burnin, "burn-in sweeps I0")->capture_default_str();
  cmd.add_option("--cutpoints", hp.cutpoints, "cutpoint budget C (0: min(n, 100))")
      ->capture_default_str();
  cmd.add_option("--alpha", hp.alpha, "split prior alpha")->capture_default_str();
  cmd.add_option("--beta", hp.beta, "split prior beta")->capture_default_str();
  cmd.add_option("--mtry", hp.mtry, "variables scored per node (0: p)")->capture_default_str();
  cmd.add_option("--max-depth", hp.stop.max_depth, "maximum tree levels")->capture_default_str();
  cmd.add_option("--min-node", hp.stop.min_node_size, "minimum observations per child")
      ->capture_default_str();
  cmd.add_option("--a-sigma", hp.a_sigma, "sigma^2 prior shape")->capture_default_str();
  cmd.add_option("--a-tau", hp.a_tau, "tau prior shape")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XBART regression: fit, predict and synthetic benchmarks"};
  app.require_subcommand(1);

  xbart::Hyperparams fit_hp;
  std::string train_path, target, schema_path, model_out;
  std::uint64_t fit_seed = 0;
  bool fit_fixed_tau = false;
  auto* fit = app.add_subcommand("fit", "fit a model to a CSV");
  fit->add_option("--train", train_path, "training CSV with header")->required();
  fit->add_option("--target", target, "response column")->required();
  fit->add_option("--schema", schema_path, "variable kinds file");
  fit->add_option("--seed", fit_seed, "random seed")->capture_default_str();
  fit->add_option("--out", model_out, "model file")->required();
  fit->add_flag("--fixed-tau", fit_fixed_tau, "keep tau at its initial value");
  add_fit_flags(*fit, fit_hp);

  std::string model_path, data_path, pred_out;
  bool all_draws = false;
  auto* predict = app.add_subcommand("predict", "predict with a saved model");
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--data", data_path, "CSV with the model's feature columns")->required();
  predict->add_option("--out", pred_out, "output CSV")->required();
  predict->add_flag("--draws", all_draws, "write every retained draw instead of the mean");

  xbart::Hyperparams bench_hp;
  xbart::DgpSpec spec;
  std::string dgp = "trig_poly", x_kind = "independent", err_kind = "gaussian", report_path;
  int reps = 5;
  bool bench_fixed_tau = false;
  auto* bench = app.add_subcommand("bench", "run a synthetic benchmark");
  bench->add_option("--dgp", dgp, "mean function")
      ->check(CLI::IsMember({"linear", "single_index", "trig_poly", "max"}))
      ->capture_default_str();
  bench->add_option("--n", spec.n, "training rows")->capture_default_str();
  bench->add_option("--p", spec.p, "predictors")->capture_default_str();
  bench->add_option("--kappa", spec.kappa, "noise multiplier")->capture_default_str();
  bench->add_option("--x", x_kind, "predictor kind")
      ->check(CLI::IsMember({"independent", "factor"}))
      ->capture_default_str();
  bench->add_option("--err", err_kind, "noise kind")
      ->check(CLI::IsMember({"gaussian", "t3"}))
      ->capture_default_str();
  bench->add_option("--reps", reps, "replications")->capture_default_str();
  bench->add_option("--seed", spec.seed, "master seed")->capture_default_str();
  bench->add_flag("--fixed-tau", bench_fixed_tau, "keep tau at its initial value");
  bench->add_option("--report", report_path, "write the seed-determined CSV report here");
  add_fit_flags(*bench, bench_hp);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      const xbart::Table table = xbart::read_csv(train_path);
      const xbart::Schema schema =
          schema_path.empty() ? xbart::Schema{} : xbart::read_schema(schema_path);
      xbart::TrainingSet data = xbart::training_set(table, target, schema);
      fit_hp.sample_tau = !fit_fixed_tau;
      const auto draws = xbart::run(data.y, data.x, fit_hp, fit_seed);
      const auto model = xbart::make_model(draws, data.x, data.feature_names);
      xbart::save_model(model, model_out);
      std::cout << "fitted " << data.x.rows() << " rows, " << data.x.cols() << " features, "
                << model.draws.size() << " retained draws -> " << model_out << '\n';
    } else if (*predict) {
      const xbart::Model model = xbart::load_model(model_path);
      const xbart::Table table = xbart::read_csv(data_path);
      const Eigen::MatrixXd x = xbart::select_columns(table, model.feature_names);
      const Eigen::MatrixXd draws = xbart::predict_draws(model, x);
      std::ofstream out(pred_out);
      if (!out) throw std::runtime_error("cannot open " + pred_out + " for writing");
      xbart::write_predictions(out, draws, all_draws);
    } else if (*bench) {
      spec.f = xbart::parse_mean_function(dgp);
      spec.x_kind = xbart::parse_predictor_kind(x_kind);
      spec.err_kind = xbart::parse_noise_kind(err_kind);
      bench_hp.sample_tau = !bench_fixed_tau;
      const auto report = xbart::bench(spec, bench_hp, reps);
      xbart::print_report(std::cout, report);
      if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + report_path + " for writing");
        xbart::write_report_csv(out, report);
      }
    }
  } catch (const xbart::IoError& e) {
    std::cerr << "error: model file: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
