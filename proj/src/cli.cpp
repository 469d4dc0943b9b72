#include "glgp/cli.hpp"

#include "glgp/error.hpp"
#include "glgp/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace glgp {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string out;
  std::string data;
  std::string search;
  std::string model;
  std::string new_points;
  std::string report;
  std::string dump_graph;
  std::string mode = "general";
  std::string solver = "automatic";
  std::string table;
  int intrinsic_dim = 0;
  double eps2 = 0.0;
  int k = 0;
  long index = 0;
  int replicates = 1;
  int threads = 1;
};

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

PointCloud read_cloud(const Options& o) {
  PointCloud cloud = load_cloud(o.data);
  if (o.intrinsic_dim > 0) cloud = cloud.with_intrinsic_dim(o.intrinsic_dim);
  return cloud;
}

void write_truth(const PointList& points, const VectorXd& truth, const fs::path& path) {
  std::ostringstream os;
  for (Index c = 0; c < points.cols(); ++c) os << 'x' << c << ',';
  os << "truth\n";
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index c = 0; c < points.cols(); ++c) os << format_double(points(i, c)) << ',';
    os << format_double(truth(i)) << '\n';
  }
  write_text(path, os.str());
}

void write_dataset(const Dataset& ds, const fs::path& dir, const std::string& stem) {
  save_csv(ds.cloud, dir / (stem + ".csv"));
  save_json(ds.cloud, dir / (stem + ".json"));
  write_truth(ds.cloud.points(), ds.truth, dir / (stem + "_truth.csv"));
}

void cmd_generate(const Options& o, std::ostream& out) {
  const ExperimentName name = experiment_from_string(o.experiment);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const ExperimentSpec spec = ExperimentSpec::defaults(name, o.seed);
  if (name == ExperimentName::nystrom_spiral) {
    const NystromDataset nd =
        gen_nystrom_spiral(spec.seed, spec.n_labeled, spec.n_unlabeled, spec.n_base_unlabeled, spec.noise_sigma);
    write_dataset(nd.base, dir, o.experiment);
    write_dataset(nd.full, dir, o.experiment + "_full");
  } else {
    write_dataset(generate(spec), dir, o.experiment);
  }
  out << "wrote " << (dir / (o.experiment + ".csv")).string() << '\n';
}

void cmd_fit(const Options& o, std::ostream& out) {
  const SearchConfig search = o.search.empty() ? SearchConfig::defaults() : search_config_from_json(read_json(o.search));
  const PointCloud cloud = read_cloud(o);
  FitReport report;
  const GlgpModel model = train(cloud, search, &report);
  save_model(model, o.out);
  if (!o.report.empty()) {
    nlohmann::json j;
    j["schema"] = 1;
    j["logml"] = report.logml;
    j["best"] = to_json(model)["params"];
    j["trace"] = nlohmann::json::array();
    for (const auto& e : report.trace)
      j["trace"].push_back({{"epsilon", e.params.epsilon}, {"K", e.params.K}, {"t", e.params.t},
                            {"sigma_noise", e.params.sigma_noise}, {"logml", e.logml}});
    write_text(o.report, j.dump(1) + "\n");
  }
  const Hyperparams& b = report.best;
  out << "eps2=" << format_double(b.epsilon * b.epsilon) << " K=" << b.K << " t=" << format_double(b.t)
      << " sigma2=" << format_double(b.sigma_noise * b.sigma_noise) << " logml=" << format_double(report.logml) << '\n';
}

void cmd_predict(const Options& o) {
  const GlgpModel model = load_model(o.model);
  const PointList points = load_cloud(o.data).points();
  save_prediction_csv(points, predict_points(model, points), o.out);
}

void cmd_extend(const Options& o) {
  const GlgpModel model = load_model(o.model);
  const PointList points = load_points_csv(o.new_points);
  save_prediction_csv(points, predict_new(model, points), o.out);
}

void cmd_spectrum(const Options& o) {
  if (!(o.eps2 > 0.0)) throw ConfigError("--eps2 must be positive");
  const PointCloud cloud = read_cloud(o);
  const double eps = std::sqrt(o.eps2);
  const CovarianceMode mode = covariance_mode_from_string(o.mode);
  const EigenSolverKind solver = solver_from_string(o.solver);
  if (!o.dump_graph.empty()) {
    const KernelGraph g = build_graph(cloud.points(), eps);
    fs::create_directories(o.dump_graph);
    save_matrix_csv(g.W, fs::path(o.dump_graph) / "W.csv");
    save_matrix_csv(g.A, fs::path(o.dump_graph) / "A.csv");
  }
  if (o.k < 1 || o.k > cloud.size()) throw ConfigError("--k must lie in [1, N]");
  const SpectralBasis basis = basis_for(cloud, eps, o.k, mode, solver);
  const MatrixXd& vecs = mode == CovarianceMode::manifold ? *basis.vec_density : basis.vec_l2;
  std::ostringstream os;
  os << "k,mu";
  for (Index i = 0; i < vecs.rows(); ++i) os << ",v" << i;
  os << '\n';
  for (int k = 0; k < basis.K(); ++k) {
    os << k << ',' << format_double(basis.mu(k));
    for (Index i = 0; i < vecs.rows(); ++i) os << ',' << format_double(vecs(i, k));
    os << '\n';
  }
  write_text(o.out, os.str());
}

void cmd_covrow(const Options& o) {
  const GlgpModel model = load_model(o.model);
  const VectorXd row = covariance_row(model, o.index);
  const PointList& p = model.cloud.points();
  std::ostringstream os;
  for (Index c = 0; c < p.cols(); ++c) os << 'x' << c << ',';
  os << "cov\n";
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index c = 0; c < p.cols(); ++c) os << format_double(p(i, c)) << ',';
    os << format_double(row(i)) << '\n';
  }
  write_text(o.out, os.str());
}

void cmd_benchmark(const Options& o, std::ostream& out) {
  const ExperimentName name = experiment_from_string(o.experiment);
  const SearchConfig search = o.search.empty() ? default_search(name) : search_config_from_json(read_json(o.search));
  const ReplicationSummary s = replicate(name, o.seed, o.replicates, search, o.threads);
  write_text(o.out, to_json(s).dump(1) + "\n");
  fs::path table = o.table.empty() ? fs::path(o.out).replace_extension(".csv") : fs::path(o.table);
  save_result_table_csv(s.results.front(), table);
  out << to_string(name) << ": rmse_glgp=" << format_double(s.glgp.mean) << " (sd " << format_double(s.glgp.sd)
      << ") rmse_baseline=" << format_double(s.baseline.mean) << " (sd " << format_double(s.baseline.sd) << ")";
  if (s.extension) out << " rmse_extension=" << format_double(s.extension->mean);
  out << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-Laplacian Gaussian process regression"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset and its noiseless truth");
  gen->add_option("--experiment", o.experiment, "two_balloons | spiral | square | nystrom_spiral")->required();
  gen->add_option("--seed", o.seed);
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* fitc = app.add_subcommand("fit", "Select hyperparameters and write a model");
  fitc->add_option("--data", o.data, "Point cloud CSV or JSON")->required()->check(CLI::ExistingFile);
  fitc->add_option("--search", o.search, "Search config JSON")->check(CLI::ExistingFile);
  fitc->add_option("--out", o.out, "Model JSON")->required();
  fitc->add_option("--intrinsic-dim", o.intrinsic_dim, "Intrinsic dimension for manifold mode");
  fitc->add_option("--report", o.report, "Write the full evaluation trace as JSON");

  auto* pred = app.add_subcommand("predict", "Posterior mean and variance at the points of a file");
  pred->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  pred->add_option("--data", o.data)->required()->check(CLI::ExistingFile);
  pred->add_option("--out", o.out)->required();

  auto* ext = app.add_subcommand("extend", "Predict at new points through the Nystrom extension");
  ext->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  ext->add_option("--new-points", o.new_points, "CSV with header x0,...")->required()->check(CLI::ExistingFile);
  ext->add_option("--out", o.out)->required();

  auto* spec = app.add_subcommand("spectrum", "Dump the leading eigenpairs of -L");
  spec->add_option("--data", o.data)->required()->check(CLI::ExistingFile);
  spec->add_option("--eps2", o.eps2, "Squared bandwidth")->required();
  spec->add_option("--k", o.k, "Number of eigenpairs")->required();
  spec->add_option("--out", o.out)->required();
  spec->add_option("--mode", o.mode, "general | manifold");
  spec->add_option("--solver", o.solver, "automatic | dense | lanczos");
  spec->add_option("--intrinsic-dim", o.intrinsic_dim);
  spec->add_option("--dump-graph", o.dump_graph, "Directory for W.csv and A.csv");

  auto* cov = app.add_subcommand("covrow", "One row of the prior covariance over the base points");
  cov->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  cov->add_option("--index", o.index)->required();
  cov->add_option("--out", o.out)->required();

  auto* bench = app.add_subcommand("benchmark", "Run an experiment over several seeds");
  bench->add_option("--experiment", o.experiment)->required();
  bench->add_option("--replicates", o.replicates)->check(CLI::PositiveNumber);
  bench->add_option("--seed", o.seed);
  bench->add_option("--out", o.out, "Result JSON")->required();
  bench->add_option("--search", o.search, "Override the experiment's search config")->check(CLI::ExistingFile);
  bench->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  bench->add_option("--table", o.table, "Per-point CSV of the first replicate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) cmd_generate(o, out);
    else if (fitc->parsed()) cmd_fit(o, out);
    else if (pred->parsed()) cmd_predict(o);
    else if (ext->parsed()) cmd_extend(o);
    else if (spec->parsed()) cmd_spectrum(o);
    else if (cov->parsed()) cmd_covrow(o);
    else if (bench->parsed()) cmd_benchmark(o, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace glgp
