#include "glgp/gp.hpp"

#include "glgp/error.hpp"

#include <cmath>
#include <numbers>

namespace glgp {

std::string_view to_string(LikelihoodForm form) { return form == LikelihoodForm::standard ? "standard" : "as_written"; }

LikelihoodForm likelihood_form_from_string(std::string_view s) {
  if (s == "standard") return LikelihoodForm::standard;
  if (s == "as_written") return LikelihoodForm::as_written;
  throw ConfigError("unknown likelihood_form '" + std::string(s) + "'");
}

NoisyFactor factor_with_jitter(const MatrixXd& cov_ff, double sigma_noise) {
  const Index m = cov_ff.rows();
  if (cov_ff.cols() != m) throw ValidationError("labeled covariance block must be square");
  if (!(sigma_noise >= 0.0) || !std::isfinite(sigma_noise)) throw ValidationError("sigma_noise must be non-negative");
  const double s2 = sigma_noise * sigma_noise;
  const double mean_diag = m > 0 ? cov_ff.trace() / static_cast<double>(m) : 0.0;
  const double unit = mean_diag > 0.0 ? mean_diag : 1.0;

  NoisyFactor f;
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    f.jitter = rel * unit;
    f.noise_variance = s2 + f.jitter;
    MatrixXd k = cov_ff;
    k.diagonal().array() += f.noise_variance;
    f.llt.compute(k);
    if (f.llt.info() == Eigen::Success && (f.llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) return f;
  }
  MatrixXd k = cov_ff;
  k.diagonal().array() += s2;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(k, Eigen::EigenvaluesOnly);
  throw IllConditionedError("covariance plus noise is not positive definite after maximum jitter",
                            es.eigenvalues().size() ? es.eigenvalues()(0) : 0.0);
}

Prediction condition(const MatrixXd& cov_ff, const MatrixXd& cov_qf, const VectorXd& y, double sigma_noise,
                     const VectorXd& cov_qq_diag, const MatrixXd* cov_qq) {
  const Index m = y.size();
  const Index q = cov_qf.rows();
  if (cov_ff.rows() != m || cov_ff.cols() != m) throw ValidationError("labeled block does not match responses");
  if (cov_qf.cols() != m) throw ValidationError("cross-covariance columns do not match responses");
  if (cov_qq_diag.size() != q) throw ValidationError("prior variance length does not match query count");
  Prediction p;
  p.query_count = q;
  if (m == 0) {
    p.mean = VectorXd::Zero(q);
    p.variance = cov_qq_diag;
    if (cov_qq) p.cov = *cov_qq;
    return p;
  }
  const NoisyFactor f = factor_with_jitter(cov_ff, sigma_noise);
  const VectorXd alpha = f.llt.solve(y);
  p.mean = cov_qf * alpha;
  // V = L^{-1} Sigma_fq
  const MatrixXd v = f.llt.matrixL().solve(cov_qf.transpose());
  p.variance = cov_qq_diag - v.colwise().squaredNorm().transpose();
  if (cov_qq) {
    MatrixXd c = *cov_qq - v.transpose() * v;
    p.cov = 0.5 * (c + c.transpose());
  }
  return p;
}

Prediction predict(const MatrixXd& cov_full, const VectorXd& y, double sigma_noise, bool full_covariance) {
  const Index n = cov_full.rows();
  const Index m = y.size();
  if (cov_full.cols() != n) throw ValidationError("covariance must be square");
  if (m > n) throw ValidationError("more responses than covariance rows");
  const Index q = n - m;
  const MatrixXd cov_qq = cov_full.bottomRightCorner(q, q);
  return condition(cov_full.topLeftCorner(m, m), cov_full.bottomLeftCorner(q, m), y, sigma_noise,
                   cov_qq.diagonal(), full_covariance ? &cov_qq : nullptr);
}

double log_marginal_likelihood(const MatrixXd& h11, const VectorXd& y, double sigma_noise, LikelihoodForm form) {
  const Index m = y.size();
  if (m == 0) throw ValidationError("marginal likelihood needs at least one labeled point");
  if (h11.rows() != m || h11.cols() != m) throw ValidationError("labeled block does not match responses");
  const NoisyFactor f = factor_with_jitter(h11, sigma_noise);
  const double quad = y.dot(f.llt.solve(y));
  const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double c = 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
  if (form == LikelihoodForm::standard) return -0.5 * quad - 0.5 * logdet - c;
  return -quad - logdet - c;
}

MatrixXd labeled_block(const SpectralBasis& basis, double t, CovarianceMode mode, Index m) {
  if (m > basis.n_points()) throw ValidationError("labeled count exceeds basis size");
  SpectralFeatures f = spectral_features(basis, mode);
  const MatrixXd fl = f.features.topRows(m);
  MatrixXd h = fl * f.weights(t).asDiagonal() * fl.transpose();
  return 0.5 * (h + h.transpose());
}

LogmlGradient logml_gradient(const SpectralBasis& basis, double t, double sigma_noise, const VectorXd& y,
                             CovarianceMode mode) {
  const Index m = y.size();
  if (m == 0) throw ValidationError("marginal likelihood needs at least one labeled point");
  SpectralFeatures f = spectral_features(basis, mode);
  const MatrixXd fl = f.features.topRows(m);
  const VectorXd w = f.weights(t);
  MatrixXd h11 = fl * w.asDiagonal() * fl.transpose();
  h11 = 0.5 * (h11 + h11.transpose()).eval();
  const NoisyFactor nf = factor_with_jitter(h11, sigma_noise);
  const VectorXd alpha = nf.llt.solve(y);
  const MatrixXd kinv = nf.llt.solve(MatrixXd::Identity(m, m));

  const VectorXd dw = -(f.mu.array() * w.array()).matrix();  // d weights / dt
  const VectorXd fa = fl.transpose() * alpha;
  // tr(K^{-1} F diag(dw) F^T) = sum_i dw_i f_i^T K^{-1} f_i
  const MatrixXd kf = kinv * fl;
  const VectorXd quad_f = (fl.array() * kf.array()).colwise().sum().transpose();

  LogmlGradient g;
  g.d_t = 0.5 * (fa.array().square() * dw.array()).sum() - 0.5 * (quad_f.array() * dw.array()).sum();
  g.d_sigma = sigma_noise * (alpha.squaredNorm() - kinv.trace());
  return g;
}

}  // namespace glgp
