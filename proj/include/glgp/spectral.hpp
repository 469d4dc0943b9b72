#pragma once

#include "glgp/graph.hpp"

#include <optional>

namespace glgp {

/// First K eigenpairs of -L = (I - A) / eps^2 for one graph.
///
/// Individual eigenvectors inside a (near-)repeated eigenvalue are not unique;
/// only the span of a full multiplicity block is well defined.
struct SpectralBasis {
  double epsilon = 0.0;
  VectorXd mu;                             ///< ascending, within [0, 1/eps^2]
  MatrixXd vec_l2;                         ///< columns: unit l2 eigenvectors of A
  std::optional<MatrixXd> vec_density;     ///< columns rescaled in l2(1/p_hat)
  std::optional<Eigen::VectorXi> ball_counts;
  std::optional<int> intrinsic_dim;

  int K() const noexcept { return static_cast<int>(mu.size()); }
  Index n_points() const noexcept { return vec_l2.rows(); }

  /// The leading k eigenpairs.
  SpectralBasis truncated(int k) const;
};

enum class EigenSolverKind { automatic, dense, lanczos };

/// Eigenpairs of the symmetric (I - Asym)/eps^2, mapped back through D^{-1/2}
/// and renormalized in l2. The first entry above 1e-12 in magnitude of every
/// vector is made positive. `automatic` uses the dense solver when K > N/10.
SpectralBasis eigendecompose(const KernelGraph& graph, int K, EigenSolverKind solver = EigenSolverKind::automatic);

/// N(i) = #{ j : |x_i - x_j| < eps }, the point itself included.
Eigen::VectorXi ball_counts(const PointList& points, double epsilon);

/// Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
double unit_sphere_area(int d);

/// sqrt( |S^{d-1}| eps^d / d * sum_i v(i)^2 / N(i) ).
double inverse_density_norm(const Eigen::Ref<const VectorXd>& v, const Eigen::VectorXi& counts, double epsilon, int d);

/// Fills vec_density, ball_counts and intrinsic_dim.
SpectralBasis density_normalize(const SpectralBasis& basis, const Eigen::VectorXi& counts, int d);

}  // namespace glgp
