#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace glgp {

struct LanczosOptions {
  int max_restarts = 500;
  /// Krylov basis size; 0 picks max(2k + 20, k + 40) capped at n.
  int basis_size = 0;
  /// Residual tolerance relative to the spectral radius estimate.
  double tolerance = 1e-11;
  std::uint64_t seed = 0x5eed;
};

struct EigenPairs {
  Eigen::VectorXd values;   ///< descending
  Eigen::MatrixXd vectors;  ///< orthonormal columns
  int iterations = 0;       ///< restarts used
};

/// Largest k eigenpairs of a dense symmetric matrix by thick-restart Lanczos
/// with full reorthogonalization. Throws ConvergenceError on failure.
EigenPairs lanczos_largest(const Eigen::MatrixXd& matrix, int k, const LanczosOptions& options = {});

/// Largest k eigenpairs by a dense LAPACK solve (full tridiagonalization,
/// selected eigenpairs only). Values descending.
EigenPairs dense_largest(const Eigen::MatrixXd& matrix, int k);

}  // namespace glgp
