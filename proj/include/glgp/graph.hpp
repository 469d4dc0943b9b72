#pragma once

#include "glgp/pointcloud.hpp"

#include <cstdint>

namespace glgp {

/// Gaussian affinity graph with the alpha = 1 density normalization.
///
/// Matrices are dense: memory is O(N^2) doubles per stored matrix (W, A, Asym),
/// roughly 120 MB at N = 2266. The graph Laplacian L = (A - I) / eps^2 is never
/// stored; spectral work goes through the symmetric Asym.
struct KernelGraph {
  double epsilon = 0.0;
  VectorXd q;      ///< kernel degrees q(x_i) = sum_j k(x_i, x_j), self term included
  MatrixXd W;      ///< k(x_i, x_j) / (q_i q_j)
  VectorXd Ddiag;  ///< row sums of W
  MatrixXd A;      ///< D^{-1} W, row stochastic
  MatrixXd Asym;   ///< D^{-1/2} W D^{-1/2}

  Index n_points() const noexcept { return W.rows(); }
};

/// exp(-|x - x'|^2 / (4 eps^2)).
double gaussian_kernel(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& xp, double epsilon);

/// Pairwise kernel matrix k(a_i, b_j).
MatrixXd kernel_matrix(const PointList& a, const PointList& b, double epsilon);

/// Pairwise squared Euclidean distances.
MatrixXd squared_distances(const PointList& a, const PointList& b);

KernelGraph build_graph(const PointList& points, double epsilon);

/// Displaces every point by an independent vector with uniform direction and a
/// radius uniform in [0, delta).
PointList perturb_points(const PointList& points, double delta, std::uint64_t seed);

/// Spectral norm of L(a) - L(b) for two graphs of equal size and bandwidth.
double laplacian_distance(const KernelGraph& a, const KernelGraph& b);

/// Replaces subnormal entries by zero. Kernel values that far below DBL_MIN
/// carry no information and make dense products orders of magnitude slower.
void flush_subnormals(MatrixXd& m);

/// Writes a matrix as headerless CSV.
void save_matrix_csv(const MatrixXd& m, const std::filesystem::path& path);

}  // namespace glgp
