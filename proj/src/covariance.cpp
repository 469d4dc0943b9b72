#include "glgp/covariance.hpp"

#include "glgp/error.hpp"

#include <cmath>

namespace glgp {

std::string_view to_string(CovarianceMode mode) { return mode == CovarianceMode::general ? "general" : "manifold"; }

CovarianceMode covariance_mode_from_string(std::string_view s) {
  if (s == "general") return CovarianceMode::general;
  if (s == "manifold") return CovarianceMode::manifold;
  throw ConfigError("unknown covariance mode '" + std::string(s) + "'");
}

std::string_view to_string(NystromScale scale) { return scale == NystromScale::consistent ? "consistent" : "as_written"; }

NystromScale nystrom_scale_from_string(std::string_view s) {
  if (s == "consistent") return NystromScale::consistent;
  if (s == "as_written") return NystromScale::as_written;
  throw ConfigError("unknown nystrom_scale '" + std::string(s) + "'");
}

VectorXd SpectralFeatures::weights(double t) const {
  if (!(t >= 0.0)) throw ValidationError("diffusion time t must be non-negative");
  return scale * (-t * mu.array()).exp().matrix();
}

MatrixXd SpectralFeatures::covariance(double t) const {
  MatrixXd h = features * weights(t).asDiagonal() * features.transpose();
  return 0.5 * (h + h.transpose());
}

SpectralFeatures spectral_features(const SpectralBasis& basis, CovarianceMode mode) {
  SpectralFeatures f;
  f.mu = basis.mu;
  if (mode == CovarianceMode::general) {
    f.features = basis.vec_l2;
    f.scale = static_cast<double>(basis.n_points());
  } else {
    if (!basis.vec_density) throw ValidationError("manifold mode needs density-normalized eigenvectors");
    f.features = *basis.vec_density;
    f.scale = 1.0;
  }
  return f;
}

GlgpCovariance glgp_covariance(std::shared_ptr<const SpectralBasis> basis, double t, CovarianceMode mode) {
  if (!basis) throw ValidationError("null spectral basis");
  GlgpCovariance c;
  c.mode = mode;
  c.epsilon = basis->epsilon;
  c.K = basis->K();
  c.t = t;
  c.H = spectral_features(*basis, mode).covariance(t);
  c.basis = std::move(basis);
  return c;
}

NystromExtension extension_matrix(const PointList& base_points, const PointList& new_points, double epsilon) {
  if (base_points.rows() < 2) throw ValidationError("extension needs at least two base points");
  if (new_points.rows() > 0 && new_points.cols() != base_points.cols())
    throw ValidationError("new points differ in dimension from base points");
  const Index n = base_points.rows();
  const Index l = new_points.rows();
  PointList all(n + l, base_points.cols());
  all.topRows(n) = base_points;
  if (l > 0) all.bottomRows(l) = new_points;

  NystromExtension ext;
  ext.epsilon = epsilon;
  ext.base_count = n;
  const MatrixXd k = kernel_matrix(all, base_points, epsilon);
  // q over the base set, evaluated at every row point.
  const VectorXd q = k.rowwise().sum();
  const VectorXd q_base_inv = q.head(n).cwiseInverse();
  ext.E = q.cwiseInverse().asDiagonal() * k * q_base_inv.asDiagonal();
  if (n > 0) {
    // Base block is assembled exactly like W in build_graph.
    MatrixXd wb = ext.E.topRows(n);
    ext.E.topRows(n) = 0.5 * (wb + wb.transpose());
  }
  const VectorXd rows = ext.E.rowwise().sum();
  ext.E = rows.cwiseInverse().asDiagonal() * ext.E;
  flush_subnormals(ext.E);
  return ext;
}

SpectralFeatures nystrom_features(const NystromExtension& ext, const SpectralBasis& basis, CovarianceMode mode,
                                  NystromScale scale) {
  if (ext.E.cols() != basis.n_points()) throw ValidationError("extension and basis disagree on the base size");
  if (ext.epsilon != basis.epsilon) throw ValidationError("extension and basis use different bandwidths");
  SpectralFeatures base = spectral_features(basis, mode);
  const double e2 = basis.epsilon * basis.epsilon;
  VectorXd inv(basis.K());
  for (Index i = 0; i < inv.size(); ++i) {
    const double a = 1.0 - e2 * basis.mu(i);
    if (std::abs(a) < 1e-10)
      throw NumericalError("near-singular Nystrom extension: eigenvalue " + std::to_string(i) + " of A is " + std::to_string(a));
    inv(i) = 1.0 / a;
  }
  SpectralFeatures out;
  out.mu = base.mu;
  out.features = ext.E * base.features * inv.asDiagonal();
  out.scale = (mode == CovarianceMode::general && scale == NystromScale::as_written) ? 1.0 : base.scale;
  return out;
}

GlgpCovariance nystrom_covariance(const NystromExtension& ext, std::shared_ptr<const SpectralBasis> basis, double t,
                                  CovarianceMode mode, NystromScale scale) {
  if (!basis) throw ValidationError("null spectral basis");
  GlgpCovariance c;
  c.mode = mode;
  c.epsilon = basis->epsilon;
  c.K = basis->K();
  c.t = t;
  c.H = nystrom_features(ext, *basis, mode, scale).covariance(t);
  c.basis = std::move(basis);
  return c;
}

MatrixXd sqexp_covariance(const PointList& a, const PointList& b, double amplitude, double rho) {
  if (!(amplitude > 0.0)) throw ValidationError("amplitude must be positive");
  if (!(rho > 0.0)) throw ValidationError("length scale rho must be positive");
  return amplitude * (squared_distances(a, b) / (-rho * rho)).array().exp().matrix();
}

}  // namespace glgp
