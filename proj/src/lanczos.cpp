#include "glgp/lanczos.hpp"

#include "glgp/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace glgp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Two passes of classical Gram-Schmidt against the first `cols` columns of basis.
double orthogonalize(const MatrixXd& basis, Index cols, VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    if (cols == 0) break;
    const VectorXd h = basis.leftCols(cols).transpose() * w;
    w.noalias() -= basis.leftCols(cols) * h;
  }
  return w.norm();
}

VectorXd random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v / v.norm();
}

}  // namespace

EigenPairs lanczos_largest(const MatrixXd& matrix, int k, const LanczosOptions& options) {
  const Index n = matrix.rows();
  if (matrix.cols() != n) throw ValidationError("eigensolver needs a square matrix");
  if (k < 1 || k > n) throw ValidationError("requested eigenpair count out of range");
  Index p = options.basis_size > 0 ? options.basis_size : std::max<Index>(2 * k + 20, k + 40);
  p = std::min(p, n);
  if (p <= k && p < n) p = std::min<Index>(n, k + 1);

  std::mt19937_64 rng(options.seed);
  MatrixXd V(n, p);
  MatrixXd AV(n, p);
  VectorXd next = random_unit(n, rng);
  Index filled = 0;
  const Index keep = std::min<Index>(p - 1, k + (p - k) / 2);
  double scale = 0.0;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    while (filled < p) {
      V.col(filled) = next;
      AV.col(filled).noalias() = matrix * next;
      VectorXd w = AV.col(filled);
      ++filled;
      if (filled == n) break;
      double beta = orthogonalize(V, filled, w);
      // Krylov space became invariant: continue with a fresh orthogonal direction.
      for (int attempt = 0; beta <= 1e-12 * std::max(scale, 1e-300) && attempt < 8; ++attempt) {
        w = random_unit(n, rng);
        beta = orthogonalize(V, filled, w);
      }
      if (beta == 0.0) throw ConvergenceError("Lanczos could not extend the Krylov basis", restart);
      next = w / beta;
    }

    MatrixXd projected = V.leftCols(filled).transpose() * AV.leftCols(filled);
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> small(projected);
    if (small.info() != Eigen::Success) throw ConvergenceError("projected eigenproblem failed", restart);
    // Reverse to descending order.
    const VectorXd theta = small.eigenvalues().reverse();
    const MatrixXd Z = small.eigenvectors().rowwise().reverse();
    scale = std::max(scale, theta.cwiseAbs().maxCoeff());

    const Index retained = (filled == n) ? std::min<Index>(n, k) : keep;
    MatrixXd ritz = V.leftCols(filled) * Z.leftCols(retained);
    MatrixXd aritz = AV.leftCols(filled) * Z.leftCols(retained);

    bool converged = true;
    const double tol = options.tolerance * std::max(scale, 1e-300);
    for (Index i = 0; i < k && converged; ++i)
      converged = (aritz.col(i) - theta(i) * ritz.col(i)).norm() <= tol;

    if (converged || filled == n) {
      EigenPairs out;
      out.vectors = ritz.leftCols(k);
      out.values.resize(k);
      // Recompute Rayleigh quotients with a fresh product to shed restart drift.
      const MatrixXd product = matrix * out.vectors;
      for (Index i = 0; i < k; ++i) out.values(i) = out.vectors.col(i).dot(product.col(i));
      out.iterations = restart;
      return out;
    }

    V.leftCols(retained) = ritz;
    AV.leftCols(retained) = aritz;
    filled = retained;
    // `next` stays orthogonal to the retained Ritz vectors, keeping a valid
    // Krylov-Schur decomposition.
    VectorXd w = next;
    const double beta = orthogonalize(V, filled, w);
    next = beta > 0.0 ? VectorXd(w / beta) : random_unit(n, rng);
  }
  throw ConvergenceError("Lanczos did not converge", options.max_restarts);
}

EigenPairs dense_largest(const MatrixXd& matrix, int k) {
  const Index n = matrix.rows();
  if (matrix.cols() != n) throw ValidationError("eigensolver needs a square matrix");
  if (k < 1 || k > n) throw ValidationError("requested eigenpair count out of range");
  MatrixXd work = matrix;
  std::vector<double> w(static_cast<std::size_t>(n));
  MatrixXd z(n, k);
  std::vector<lapack_int> support(static_cast<std::size_t>(2 * k));
  lapack_int found = 0;
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', ln, work.data(), ln, 0.0, 0.0,
                                         ln - k + 1, ln, 0.0, &found, w.data(), z.data(), ln, support.data());
  if (info != 0 || found != k) throw ConvergenceError("dense symmetric eigensolver failed (info " + std::to_string(info) + ")", 0);
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (Index i = 0; i < k; ++i) {
    out.values(i) = w[static_cast<std::size_t>(k - 1 - i)];
    out.vectors.col(i) = z.col(k - 1 - i);
  }
  return out;
}

}  // namespace glgp
