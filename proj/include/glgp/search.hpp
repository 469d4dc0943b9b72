#pragma once

#include "glgp/gp.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

namespace glgp {

struct OptimizerSettings {
  int max_iters = 50;
  double tol = 1e-8;  ///< stop when one step changes the standard-form logml by less
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;  ///< in log-parameter units
  double max_step = 4.0;
  int max_backtracks = 30;
};

/// Squared-exponential baseline search: every (amplitude, rho^2) pair is a start
/// point for gradient ascent over (log A, log rho, log sigma).
struct BaselineSearch {
  std::vector<double> amp_grid{1.0, 10.0, 100.0, 1000.0};
  std::vector<double> rho2_grid{0.1, 0.5, 2.0};
  std::array<double, 2> amp_bounds{1e-3, 1e5};
  std::array<double, 2> rho2_bounds{1e-3, 1e3};
};

struct SearchConfig {
  std::vector<double> eps2_grid;
  std::vector<int> k_grid;
  std::array<double, 2> t_bounds{0.01, 1.0};
  std::array<double, 2> sigma2_bounds{0.1, 2.0};
  int multistarts = 3;
  std::uint64_t seed = 0;
  LikelihoodForm likelihood_form = LikelihoodForm::standard;
  NystromScale nystrom_scale = NystromScale::consistent;
  CovarianceMode mode = CovarianceMode::general;
  EigenSolverKind solver = EigenSolverKind::automatic;
  OptimizerSettings optimizer;
  BaselineSearch baseline;

  /// K = 1..35, eps^2 = 0.002..0.030 step 0.001, t in [0.01, 1], sigma^2 in [0.1, 2].
  static SearchConfig defaults();
  void validate() const;
};

nlohmann::json to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const nlohmann::json& j);

struct TraceEntry {
  Hyperparams params;
  double logml = 0.0;
};

struct FitReport {
  Hyperparams best;
  double logml = 0.0;
  std::vector<TraceEntry> trace;
  std::optional<double> rmse;
};

struct BaselineParams {
  double amplitude = 1.0;
  double rho = 1.0;
  double sigma_noise = 1.0;
};

struct BaselineTraceEntry {
  BaselineParams params;
  double logml = 0.0;
};

struct BaselineFitReport {
  BaselineParams best;
  double logml = 0.0;
  std::vector<BaselineTraceEntry> trace;
  std::optional<double> rmse;
};

/// Log marginal likelihood of K(t, sigma) = F diag(scale e^{-mu t}) F^T + (sigma^2 + j) I
/// on m labeled points, evaluated through the K x K capacitance matrix.
/// Matches log_marginal_likelihood on the dense block (same jitter policy at its
/// first level).
class LowRankLikelihood {
 public:
  LowRankLikelihood(MatrixXd labeled_features, VectorXd mu, double scale, VectorXd y);

  struct Value {
    double logml = 0.0;  ///< standard form
    double d_t = 0.0;
    double d_sigma = 0.0;
  };
  Value evaluate(double t, double sigma_noise) const;

  Index labeled_count() const noexcept { return y_.size(); }
  int K() const noexcept { return static_cast<int>(mu_.size()); }

 private:
  MatrixXd f_;
  VectorXd mu_;
  double scale_;
  VectorXd y_;
  MatrixXd gram_;   // F^T F
  VectorXd fty_;    // F^T y
  double yty_;
};

/// Converts a standard-form value to the requested printed form.
double apply_form(double standard_logml, Index m, LikelihoodForm form);

struct AscentResult {
  VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

/// Projected gradient ascent with Armijo backtracking along the normalized
/// projected gradient, inside the box [lo, hi].
AscentResult projected_ascent(const std::function<double(const VectorXd&, VectorXd&)>& objective, VectorXd x0,
                              const VectorXd& lo, const VectorXd& hi, const OptimizerSettings& settings,
                              double value_scale = 1.0);

/// Maximizes the log marginal likelihood: grid over (eps, K), gradient ascent
/// over (log t, log sigma) inside each cell. Needs m >= 1.
FitReport fit(const PointCloud& cloud, const SearchConfig& search);

/// Squared-exponential baseline fitted by the same likelihood maximization.
BaselineFitReport fit_baseline(const PointCloud& cloud, const SearchConfig& search);

/// Standard-form baseline logml and gradient in (log A, log rho, log sigma).
double baseline_logml(const PointList& labeled, const VectorXd& y, const BaselineParams& p, VectorXd* grad_log = nullptr);

/// Exhaustive evaluation over a four-dimensional hyperparameter grid.
struct GridSpec {
  std::vector<double> eps2_grid;
  std::vector<int> k_grid;
  std::vector<double> t_grid;
  std::vector<double> sigma2_grid;
  CovarianceMode mode = CovarianceMode::general;
  LikelihoodForm form = LikelihoodForm::standard;
  EigenSolverKind solver = EigenSolverKind::automatic;
};

struct GridCell {
  double eps2 = 0.0;
  int K = 0;
  double t = 0.0;
  double sigma2 = 0.0;
  double logml = 0.0;
};

struct GridEvaluation {
  std::vector<GridCell> cells;  ///< eps2-major, then K, t, sigma2 in grid order
  std::size_t best = 0;         ///< argmax with lexicographic tie-break on (eps2, K, t, sigma2)
};

GridEvaluation grid_evaluate(const PointCloud& cloud, const GridSpec& spec);

/// Basis for one bandwidth, density-normalized in manifold mode.
SpectralBasis basis_for(const PointCloud& cloud, double epsilon, int K, CovarianceMode mode,
                        EigenSolverKind solver = EigenSolverKind::automatic);

std::string_view to_string(EigenSolverKind solver);
EigenSolverKind solver_from_string(std::string_view s);

}  // namespace glgp
