#include "xbart/model.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace xbart {

const char* to_string(IoErrorCode code) {
  switch (code) {
    case IoErrorCode::kBadMagic: return "bad magic";
    case IoErrorCode::kVersionMismatch: return "version mismatch";
    case IoErrorCode::kTruncated: return "truncated";
    case IoErrorCode::kCorrupt: return "corrupt";
    case IoErrorCode::kEmptyModel: return "empty model";
  }
  return "unknown";
}

namespace io {

void write_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

void expect_magic(std::istream& in, const char (&magic)[5]) {
  char got[4] = {};
  if (!in.read(got, 4)) throw IoError(IoErrorCode::kTruncated, "missing header");
  if (std::memcmp(got, magic, 4) != 0) {
    throw IoError(IoErrorCode::kBadMagic, std::string("expected ") + magic);
  }
}

}  // namespace io

Model make_model(const SweepDraws& run, const PredictorMatrix& x,
                 std::vector<std::string> feature_names) {
  Model m;
  m.params = run.params;
  m.offset = run.offset;
  m.kinds = x.kinds();
  if (feature_names.empty()) {
    for (int j = 0; j < x.cols(); ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (feature_names.size() != m.kinds.size()) {
    throw std::invalid_argument("feature name count does not match column count");
  }
  m.feature_names = std::move(feature_names);
  const auto kept = run.retained();
  m.draws.assign(kept.begin(), kept.end());
  return m;
}

namespace {

Eigen::MatrixXd predict_forests(std::span<const ForestDraw> draws, double offset,
                                const Eigen::MatrixXd& x_test) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(x_test.rows(),
                                                  static_cast<Eigen::Index>(draws.size()), offset);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    auto col = out.col(static_cast<Eigen::Index>(k));
    for (const Tree& tree : draws[k].trees) col += evaluate_tree(tree, x_test);
  }
  return out;
}

int max_var(std::span<const ForestDraw> draws) {
  int top = -1;
  for (const ForestDraw& d : draws) {
    for (const Tree& t : d.trees) {
      for (const TreeNode& n : t.nodes()) top = std::max(top, static_cast<int>(n.var));
    }
  }
  return top;
}

}  // namespace

Eigen::MatrixXd predict_draws(const Model& model, const Eigen::MatrixXd& x_test) {
  if (x_test.cols() != model.num_features()) {
    throw std::invalid_argument("test matrix has " + std::to_string(x_test.cols()) +
                                " columns, model expects " +
                                std::to_string(model.num_features()));
  }
  return predict_forests(model.draws, model.offset, x_test);
}

Eigen::MatrixXd predict_draws(const SweepDraws& draws, const Eigen::MatrixXd& x_test) {
  const auto kept = draws.retained();
  if (max_var(kept) >= x_test.cols()) {
    throw std::invalid_argument("test matrix has fewer columns than the fitted forest uses");
  }
  return predict_forests(kept, draws.offset, x_test);
}

Eigen::VectorXd predict_mean(const Eigen::MatrixXd& draws) {
  if (draws.cols() == 0) throw std::invalid_argument("prediction matrix has no draws");
  return draws.rowwise().mean();
}

namespace {

constexpr char kModelMagic[5] = "XBRT";

void write_string(std::ostream& out, const std::string& s) {
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto size = io::read<std::uint32_t>(in);
  if (size > (1u << 20)) throw IoError(IoErrorCode::kCorrupt, "implausible string length");
  std::string s(size, '\0');
  if (!in.read(s.data(), size)) throw IoError(IoErrorCode::kTruncated, "string cut short");
  return s;
}

void write_params(std::ostream& out, const Hyperparams& hp) {
  io::write<std::int32_t>(out, hp.num_trees);
  io::write<std::int32_t>(out, hp.num_sweeps);
  io::write<std::int32_t>(out, hp.burnin);
  io::write<double>(out, hp.a_sigma);
  io::write<double>(out, hp.b_sigma.value_or(0.0));
  io::write<double>(out, hp.a_tau);
  io::write<double>(out, hp.b_tau.value_or(0.0));
  io::write<double>(out, hp.alpha);
  io::write<double>(out, hp.beta);
  io::write<std::int32_t>(out, hp.cutpoints);
  io::write<std::int32_t>(out, hp.mtry);
  io::write<std::int32_t>(out, hp.stop.max_depth);
  io::write<std::uint32_t>(out, hp.stop.min_node_size);
  io::write<std::uint8_t>(out, hp.sample_tau ? 1 : 0);
}

Hyperparams read_params(std::istream& in) {
  Hyperparams hp;
  hp.num_trees = io::read<std::int32_t>(in);
  hp.num_sweeps = io::read<std::int32_t>(in);
  hp.burnin = io::read<std::int32_t>(in);
  hp.a_sigma = io::read<double>(in);
  hp.b_sigma = io::read<double>(in);
  hp.a_tau = io::read<double>(in);
  hp.b_tau = io::read<double>(in);
  hp.alpha = io::read<double>(in);
  hp.beta = io::read<double>(in);
  hp.cutpoints = io::read<std::int32_t>(in);
  hp.mtry = io::read<std::int32_t>(in);
  hp.stop.max_depth = io::read<std::int32_t>(in);
  hp.stop.min_node_size = io::read<std::uint32_t>(in);
  hp.sample_tau = io::read<std::uint8_t>(in) != 0;
  return hp;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  if (model.draws.empty()) {
    throw IoError(IoErrorCode::kEmptyModel, "model has no retained forest draws");
  }
  if (model.feature_names.size() != model.kinds.size()) {
    throw std::invalid_argument("feature name count does not match kinds");
  }
  io::write_magic(out, kModelMagic);
  io::write<std::uint32_t>(out, kModelFormatVersion);
  write_params(out, model.params);
  io::write<double>(out, model.offset);
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(model.kinds.size()));
  for (std::size_t j = 0; j < model.kinds.size(); ++j) {
    write_string(out, model.feature_names[j]);
    io::write<std::uint8_t>(out, static_cast<std::uint8_t>(model.kinds[j]));
  }
  io::write<std::uint32_t>(out, static_cast<std::uint32_t>(model.draws.size()));
  for (const ForestDraw& d : model.draws) {
    io::write<std::int32_t>(out, d.sweep);
    io::write<double>(out, d.sigma2);
    io::write<double>(out, d.tau);
    io::write<std::uint32_t>(out, static_cast<std::uint32_t>(d.trees.size()));
    for (const Tree& t : d.trees) write_tree(out, t);
  }
  if (!out) throw std::runtime_error("failed writing model");
}

Model load_model(std::istream& in) {
  io::expect_magic(in, kModelMagic);
  const auto version = io::read<std::uint32_t>(in);
  if (version != kModelFormatVersion) {
    throw IoError(IoErrorCode::kVersionMismatch,
                  "model format version " + std::to_string(version) + ", expected " +
                      std::to_string(kModelFormatVersion));
  }
  Model m;
  m.params = read_params(in);
  m.offset = io::read<double>(in);
  const auto p = io::read<std::uint32_t>(in);
  if (p == 0 || p > (1u << 24)) throw IoError(IoErrorCode::kCorrupt, "implausible feature count");
  for (std::uint32_t j = 0; j < p; ++j) {
    m.feature_names.push_back(read_string(in));
    const auto kind = io::read<std::uint8_t>(in);
    if (kind > 1) throw IoError(IoErrorCode::kCorrupt, "unknown variable kind");
    m.kinds.push_back(static_cast<VariableKind>(kind));
  }
  const auto num_draws = io::read<std::uint32_t>(in);
  if (num_draws == 0) throw IoError(IoErrorCode::kEmptyModel, "model has no draws");
  for (std::uint32_t k = 0; k < num_draws; ++k) {
    ForestDraw d;
    d.sweep = io::read<std::int32_t>(in);
    d.sigma2 = io::read<double>(in);
    d.tau = io::read<double>(in);
    const auto num_trees = io::read<std::uint32_t>(in);
    if (num_trees > (1u << 20)) throw IoError(IoErrorCode::kCorrupt, "implausible tree count");
    for (std::uint32_t t = 0; t < num_trees; ++t) {
      Tree tree = read_tree(in);
      for (const TreeNode& n : tree.nodes()) {
        if (n.var >= static_cast<std::int32_t>(p)) {
          throw IoError(IoErrorCode::kCorrupt, "split variable out of range");
        }
      }
      d.trees.push_back(std::move(tree));
    }
    m.draws.push_back(std::move(d));
  }
  return m;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_model(model, out);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in);
}

}  // namespace xbart
