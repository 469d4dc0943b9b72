#include "glgp/model.hpp"

#include "glgp/error.hpp"

#include <fstream>
#include <sstream>

namespace glgp {

namespace {

Prediction condition_features(const MatrixXd& f_query, const MatrixXd& f_labeled, const VectorXd& w, const VectorXd& y,
                              double sigma_noise, bool full_covariance) {
  const MatrixXd fw = f_labeled * w.asDiagonal();
  const MatrixXd cov_ff = fw * f_labeled.transpose();
  const MatrixXd cov_qf = f_query * w.asDiagonal() * f_labeled.transpose();
  const VectorXd diag = f_query.array().square().matrix() * w;
  if (full_covariance) {
    const MatrixXd cov_qq = f_query * w.asDiagonal() * f_query.transpose();
    return condition(cov_ff, cov_qf, y, sigma_noise, diag, &cov_qq);
  }
  return condition(cov_ff, cov_qf, y, sigma_noise, diag);
}

nlohmann::json columns_to_json(const MatrixXd& m) {
  nlohmann::json cols = nlohmann::json::array();
  for (Index k = 0; k < m.cols(); ++k) cols.push_back(std::vector<double>(m.col(k).data(), m.col(k).data() + m.rows()));
  return cols;
}

MatrixXd columns_from_json(const nlohmann::json& j, Index rows) {
  MatrixXd m(rows, static_cast<Index>(j.size()));
  for (Index k = 0; k < m.cols(); ++k) {
    const auto col = j.at(k).get<std::vector<double>>();
    if (static_cast<Index>(col.size()) != rows) throw ValidationError("eigenvector length does not match point count");
    m.col(k) = Eigen::Map<const VectorXd>(col.data(), rows);
  }
  return m;
}

nlohmann::json vector_to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

GlgpModel make_model(const PointCloud& cloud, const Hyperparams& params, EigenSolverKind solver, NystromScale scale,
                     LikelihoodForm form) {
  if (params.K < 1 || params.K > cloud.size()) throw ConfigError("K must lie in [1, N]");
  if (!(params.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(params.t >= 0.0) || !(params.sigma_noise >= 0.0)) throw ConfigError("t and sigma_noise must be nonnegative");
  GlgpModel model{params, scale, form, cloud, basis_for(cloud, params.epsilon, params.K, params.mode, solver), 0.0, {}, {}};
  const Index m = cloud.labeled_count();
  if (m > 0)
    model.logml = log_marginal_likelihood(labeled_block(model.basis, params.t, params.mode, m), cloud.responses(),
                                          params.sigma_noise, form);
  const Prediction p = predict_base(model);
  model.base_mean = p.mean;
  model.base_variance = p.variance;
  return model;
}

GlgpModel train(const PointCloud& cloud, const SearchConfig& search, FitReport* report) {
  FitReport r = fit(cloud, search);
  GlgpModel model = make_model(cloud, r.best, search.solver, search.nystrom_scale, search.likelihood_form);
  if (report) *report = std::move(r);
  return model;
}

Prediction predict_base(const GlgpModel& model, bool full_covariance) {
  const SpectralFeatures f = spectral_features(model.basis, model.params.mode);
  const Index m = model.cloud.labeled_count();
  return condition_features(f.features, f.features.topRows(m), f.weights(model.params.t), model.cloud.responses(),
                            model.params.sigma_noise, full_covariance);
}

Prediction predict_new(const GlgpModel& model, const PointList& points, bool full_covariance) {
  if (points.cols() != model.cloud.dim()) throw ValidationError("query points have the wrong dimension");
  const NystromExtension ext = extension_matrix(model.cloud.points(), points, model.params.epsilon);
  const SpectralFeatures f = nystrom_features(ext, model.basis, model.params.mode, model.nystrom_scale);
  const Index m = model.cloud.labeled_count();
  return condition_features(f.features.bottomRows(points.rows()), f.features.topRows(m), f.weights(model.params.t),
                            model.cloud.responses(), model.params.sigma_noise, full_covariance);
}

Prediction predict_points(const GlgpModel& model, const PointList& points) {
  if (points.rows() == model.cloud.size() && points.cols() == model.cloud.dim() && points == model.cloud.points()) {
    Prediction p;
    p.mean = model.base_mean;
    p.variance = model.base_variance;
    p.query_count = points.rows();
    return p;
  }
  return predict_new(model, points);
}

VectorXd covariance_row(const GlgpModel& model, Index i) {
  if (i < 0 || i >= model.cloud.size()) throw ValidationError("covariance row index out of range");
  const SpectralFeatures f = spectral_features(model.basis, model.params.mode);
  return f.features * f.weights(model.params.t).cwiseProduct(f.features.row(i).transpose());
}

nlohmann::json to_json(const GlgpModel& model) {
  nlohmann::json j;
  j["schema"] = 1;
  j["params"] = {{"epsilon", model.params.epsilon},
                 {"K", model.params.K},
                 {"t", model.params.t},
                 {"sigma_noise", model.params.sigma_noise},
                 {"mode", std::string(to_string(model.params.mode))}};
  j["nystrom_scale"] = std::string(to_string(model.nystrom_scale));
  j["likelihood_form"] = std::string(to_string(model.likelihood_form));
  j["logml"] = model.logml;
  j["cloud"] = to_json(model.cloud);
  nlohmann::json b;
  b["epsilon"] = model.basis.epsilon;
  b["mu"] = vector_to_json(model.basis.mu);
  b["vec_l2"] = columns_to_json(model.basis.vec_l2);
  if (model.basis.vec_density) b["vec_density"] = columns_to_json(*model.basis.vec_density);
  if (model.basis.ball_counts)
    b["ball_counts"] =
        std::vector<int>(model.basis.ball_counts->data(), model.basis.ball_counts->data() + model.basis.ball_counts->size());
  if (model.basis.intrinsic_dim) b["intrinsic_dim"] = *model.basis.intrinsic_dim;
  j["basis"] = b;
  j["predictions"] = {{"mean", vector_to_json(model.base_mean)}, {"variance", vector_to_json(model.base_variance)}};
  return j;
}

GlgpModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != 1) throw ValidationError("unsupported model schema");
    Hyperparams params;
    const auto& p = j.at("params");
    params.epsilon = p.at("epsilon").get<double>();
    params.K = p.at("K").get<int>();
    params.t = p.at("t").get<double>();
    params.sigma_noise = p.at("sigma_noise").get<double>();
    params.mode = covariance_mode_from_string(p.at("mode").get<std::string>());
    GlgpModel model{params,
                    nystrom_scale_from_string(j.at("nystrom_scale").get<std::string>()),
                    likelihood_form_from_string(j.at("likelihood_form").get<std::string>()),
                    cloud_from_json(j.at("cloud")),
                    {},
                    j.at("logml").get<double>(),
                    {},
                    {}};
    const Index n = model.cloud.size();
    const auto& b = j.at("basis");
    model.basis.epsilon = b.at("epsilon").get<double>();
    model.basis.mu = vector_from_json(b.at("mu"));
    model.basis.vec_l2 = columns_from_json(b.at("vec_l2"), n);
    if (model.basis.vec_l2.cols() != model.basis.mu.size() || model.basis.K() != model.params.K)
      throw ValidationError("model eigenpairs do not match K");
    if (b.contains("vec_density")) model.basis.vec_density = columns_from_json(b.at("vec_density"), n);
    if (b.contains("ball_counts")) {
      const auto c = b.at("ball_counts").get<std::vector<int>>();
      if (static_cast<Index>(c.size()) != n) throw ValidationError("ball counts do not match point count");
      model.basis.ball_counts = Eigen::Map<const Eigen::VectorXi>(c.data(), n);
    }
    if (b.contains("intrinsic_dim")) model.basis.intrinsic_dim = b.at("intrinsic_dim").get<int>();
    model.base_mean = vector_from_json(j.at("predictions").at("mean"));
    model.base_variance = vector_from_json(j.at("predictions").at("variance"));
    if (model.base_mean.size() != n || model.base_variance.size() != n)
      throw ValidationError("stored predictions do not match point count");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const GlgpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

GlgpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model file: " + std::string(e.what()));
  }
  return model_from_json(j);
}

void save_prediction_csv(const PointList& points, const Prediction& p, const std::filesystem::path& path) {
  if (points.rows() != p.mean.size()) throw ValidationError("prediction does not match points");
  std::ostringstream os;
  for (Index c = 0; c < points.cols(); ++c) os << 'x' << c << ',';
  os << "mean,variance\n";
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index c = 0; c < points.cols(); ++c) os << format_double(points(i, c)) << ',';
    os << format_double(p.mean(i)) << ',' << format_double(p.variance(i)) << '\n';
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << os.str();
}

}  // namespace glgp
