#pragma once

#include "glgp/search.hpp"

#include <filesystem>

namespace glgp {

/// Everything needed to predict with fixed hyperparameters: the base cloud,
/// the eigenpairs of its graph (truncated to K) and the posterior at the base
/// points. Out-of-sample points go through the Nystrom extension.
struct GlgpModel {
  Hyperparams params;
  NystromScale nystrom_scale = NystromScale::consistent;
  LikelihoodForm likelihood_form = LikelihoodForm::standard;
  PointCloud cloud;
  SpectralBasis basis;
  double logml = 0.0;
  VectorXd base_mean;      ///< posterior mean at every base point
  VectorXd base_variance;  ///< posterior variance at every base point
};

GlgpModel make_model(const PointCloud& cloud, const Hyperparams& params, EigenSolverKind solver = EigenSolverKind::automatic,
                     NystromScale scale = NystromScale::consistent,
                     LikelihoodForm form = LikelihoodForm::standard);

/// fit followed by make_model at the selected hyperparameters.
GlgpModel train(const PointCloud& cloud, const SearchConfig& search, FitReport* report = nullptr);

/// Posterior at the base points, from the stored eigenpairs.
Prediction predict_base(const GlgpModel& model, bool full_covariance = false);

/// Posterior at arbitrary points through the extended covariance H*.
Prediction predict_new(const GlgpModel& model, const PointList& points, bool full_covariance = false);

/// Posterior at `points`: the stored base posterior when they are exactly the
/// base points, the Nystrom path otherwise.
Prediction predict_points(const GlgpModel& model, const PointList& points);

/// Row i of the model's prior covariance over the base points.
VectorXd covariance_row(const GlgpModel& model, Index i);

nlohmann::json to_json(const GlgpModel& model);
GlgpModel model_from_json(const nlohmann::json& j);
void save_model(const GlgpModel& model, const std::filesystem::path& path);
GlgpModel load_model(const std::filesystem::path& path);

/// CSV with columns x0..x{D-1},mean,variance.
void save_prediction_csv(const PointList& points, const Prediction& p, const std::filesystem::path& path);

}  // namespace glgp
