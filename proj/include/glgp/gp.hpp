#pragma once

#include "glgp/covariance.hpp"

#include <optional>

namespace glgp {

/// Which printed form of the log marginal likelihood to evaluate.
///
/// standard:   -1/2 y'K^{-1}y - 1/2 log det K - m/2 log 2 pi
/// as_written: -    y'K^{-1}y -     log det K - m/2 log 2 pi
/// Both have the same maximizers.
enum class LikelihoodForm { standard, as_written };

std::string_view to_string(LikelihoodForm form);
LikelihoodForm likelihood_form_from_string(std::string_view s);

struct Hyperparams {
  double epsilon = 0.0;
  int K = 1;
  double t = 0.0;
  double sigma_noise = 0.0;
  CovarianceMode mode = CovarianceMode::general;
};

struct Prediction {
  VectorXd mean;
  std::optional<MatrixXd> cov;       ///< full posterior covariance when requested
  VectorXd variance;                 ///< posterior variance diagonal
  Index query_count = 0;
};

/// Cholesky factor of Sigma_ff + (sigma^2 + j) I with the jitter policy:
/// j starts at 1e-10 * trace(Sigma_ff)/m and grows x10 up to 1e-4 * trace/m.
struct NoisyFactor {
  Eigen::LLT<MatrixXd> llt;
  double jitter = 0.0;
  double noise_variance = 0.0;  ///< sigma^2 + jitter
};

NoisyFactor factor_with_jitter(const MatrixXd& cov_ff, double sigma_noise);

/// Conditions a zero-mean GP on m noisy observations.
///
/// `cov_ff` is m x m, `cov_qf` is q x m. `cov_qq` (q x q) yields the full
/// posterior covariance; `cov_qq_diag` only the variances.
Prediction condition(const MatrixXd& cov_ff, const MatrixXd& cov_qf, const VectorXd& y, double sigma_noise,
                     const VectorXd& cov_qq_diag, const MatrixXd* cov_qq = nullptr);

/// Posterior at the last N - m points of a labeled-first joint covariance.
/// With m = 0 the prior is returned.
Prediction predict(const MatrixXd& cov_full, const VectorXd& y, double sigma_noise, bool full_covariance = true);
inline Prediction predict(const GlgpCovariance& cov, const VectorXd& y, double sigma_noise, bool full_covariance = true) {
  return predict(cov.H, y, sigma_noise, full_covariance);
}

double log_marginal_likelihood(const MatrixXd& h11, const VectorXd& y, double sigma_noise,
                               LikelihoodForm form = LikelihoodForm::standard);

struct LogmlGradient {
  double d_t = 0.0;
  double d_sigma = 0.0;
};

/// Gradient of the standard-form log marginal likelihood of the GL-GP prior
/// restricted to the first m = y.size() points, with respect to (t, sigma_noise).
/// The jitter of factor_with_jitter is held fixed.
LogmlGradient logml_gradient(const SpectralBasis& basis, double t, double sigma_noise, const VectorXd& y,
                             CovarianceMode mode = CovarianceMode::general);

/// H11 for a basis: the labeled block of the GL-GP covariance.
MatrixXd labeled_block(const SpectralBasis& basis, double t, CovarianceMode mode, Index m);

}  // namespace glgp
