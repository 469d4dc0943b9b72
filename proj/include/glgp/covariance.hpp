#pragma once

#include "glgp/spectral.hpp"

#include <memory>
#include <string_view>

namespace glgp {

enum class CovarianceMode { general, manifold };

/// Scale of the general-mode Nystrom extension. `consistent` multiplies by N so
/// the extension restricts to H on the base points; `as_written` omits it.
enum class NystromScale { consistent, as_written };

std::string_view to_string(CovarianceMode mode);
CovarianceMode covariance_mode_from_string(std::string_view s);
std::string_view to_string(NystromScale scale);
NystromScale nystrom_scale_from_string(std::string_view s);

/// H = scale * F diag(exp(-mu t)) F^T, in factored form.
///
/// General mode: F = l2 eigenvectors, scale = N. Manifold mode: F = density
/// normalized eigenvectors, scale = 1.
struct SpectralFeatures {
  MatrixXd features;  ///< N x K
  VectorXd mu;
  double scale = 1.0;

  VectorXd weights(double t) const;  ///< scale * exp(-mu t)
  MatrixXd covariance(double t) const;
};

SpectralFeatures spectral_features(const SpectralBasis& basis, CovarianceMode mode);

struct GlgpCovariance {
  CovarianceMode mode = CovarianceMode::general;
  double epsilon = 0.0;
  int K = 0;
  double t = 0.0;
  MatrixXd H;
  std::shared_ptr<const SpectralBasis> basis;
};

GlgpCovariance glgp_covariance(std::shared_ptr<const SpectralBasis> basis, double t, CovarianceMode mode);
inline GlgpCovariance glgp_covariance(const SpectralBasis& basis, double t, CovarianceMode mode) {
  return glgp_covariance(std::make_shared<const SpectralBasis>(basis), t, mode);
}

/// Row-stochastic (N + l) x N extension matrix: base rows first, then new rows.
/// Kernel degrees are summed over the base points only.
struct NystromExtension {
  MatrixXd E;
  double epsilon = 0.0;
  Index base_count = 0;

  Index new_count() const noexcept { return E.rows() - base_count; }
};

NystromExtension extension_matrix(const PointList& base_points, const PointList& new_points, double epsilon);

/// Extended eigenvectors E w_i / (1 - eps^2 mu_i) with the matching scale, so that
/// H* = scale * F* diag(exp(-mu t)) F*^T. Throws NumericalError when some
/// |1 - eps^2 mu_i| < 1e-10.
SpectralFeatures nystrom_features(const NystromExtension& ext, const SpectralBasis& basis, CovarianceMode mode,
                                  NystromScale scale = NystromScale::consistent);

GlgpCovariance nystrom_covariance(const NystromExtension& ext, std::shared_ptr<const SpectralBasis> basis, double t,
                                  CovarianceMode mode, NystromScale scale = NystromScale::consistent);
inline GlgpCovariance nystrom_covariance(const NystromExtension& ext, const SpectralBasis& basis, double t,
                                         CovarianceMode mode, NystromScale scale = NystromScale::consistent) {
  return nystrom_covariance(ext, std::make_shared<const SpectralBasis>(basis), t, mode, scale);
}

/// amplitude * exp(-|a_i - b_j|^2 / rho^2).
MatrixXd sqexp_covariance(const PointList& a, const PointList& b, double amplitude, double rho);

}  // namespace glgp
