#include "glgp/spectral.hpp"

#include "glgp/error.hpp"
#include "glgp/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace glgp {

namespace {

constexpr double kSignificant = 1e-12;

double first_significant(const Eigen::Ref<const VectorXd>& v) {
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > kSignificant) return v(i);
  return 0.0;
}

}  // namespace

SpectralBasis SpectralBasis::truncated(int k) const {
  if (k < 1 || k > K()) throw ValidationError("truncation count out of range");
  SpectralBasis out;
  out.epsilon = epsilon;
  out.mu = mu.head(k);
  out.vec_l2 = vec_l2.leftCols(k);
  if (vec_density) out.vec_density = vec_density->leftCols(k);
  out.ball_counts = ball_counts;
  out.intrinsic_dim = intrinsic_dim;
  return out;
}

SpectralBasis eigendecompose(const KernelGraph& graph, int K, EigenSolverKind solver) {
  const Index n = graph.n_points();
  if (K < 1) throw ValidationError("K must be positive");
  if (K > n) throw ValidationError("K = " + std::to_string(K) + " exceeds the number of points " + std::to_string(n));
  if (solver == EigenSolverKind::automatic)
    solver = (10 * static_cast<Index>(K) > n) ? EigenSolverKind::dense : EigenSolverKind::lanczos;

  // Largest eigenvalues of Asym are the smallest of (I - Asym)/eps^2.
  EigenPairs top = solver == EigenSolverKind::dense ? dense_largest(graph.Asym, K) : lanczos_largest(graph.Asym, K);

  const double e2 = graph.epsilon * graph.epsilon;
  const VectorXd dinv_sqrt = graph.Ddiag.cwiseSqrt().cwiseInverse();

  struct Pair {
    double mu;
    VectorXd v;
    Index solver_order;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(K));
  for (Index i = 0; i < K; ++i) {
    // The spectrum of -L lies in [0, 1/eps^2]; clip roundoff.
    double mu = std::clamp((1.0 - top.values(i)) / e2, 0.0, 1.0 / e2);
    if (mu * e2 < 1e-13) mu = 0.0;
    VectorXd v = dinv_sqrt.cwiseProduct(top.vectors.col(i));
    v /= v.norm();
    if (first_significant(v) < 0.0) v = -v;
    pairs.push_back({mu, std::move(v), i});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.mu != b.mu) return a.mu < b.mu;
    const double fa = std::abs(first_significant(a.v));
    const double fb = std::abs(first_significant(b.v));
    if (fa != fb) return fa > fb;
    return a.solver_order < b.solver_order;
  });

  SpectralBasis basis;
  basis.epsilon = graph.epsilon;
  basis.mu.resize(K);
  basis.vec_l2.resize(n, K);
  for (Index i = 0; i < K; ++i) {
    basis.mu(i) = pairs[static_cast<std::size_t>(i)].mu;
    basis.vec_l2.col(i) = pairs[static_cast<std::size_t>(i)].v;
  }
  return basis;
}

Eigen::VectorXi ball_counts(const PointList& points, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("bandwidth epsilon must be positive");
  const Index n = points.rows();
  Eigen::VectorXi counts = Eigen::VectorXi::Ones(n);
  const double e2 = epsilon * epsilon;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if ((points.row(i) - points.row(j)).squaredNorm() < e2) {
        ++counts(i);
        ++counts(j);
      }
  return counts;
}

double unit_sphere_area(int d) {
  if (d < 1) throw ValidationError("intrinsic dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double inverse_density_norm(const Eigen::Ref<const VectorXd>& v, const Eigen::VectorXi& counts, double epsilon, int d) {
  if (counts.size() != v.size()) throw ValidationError("ball counts length differs from vector length");
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) acc += v(i) * v(i) / counts(i);
  return std::sqrt(unit_sphere_area(d) * std::pow(epsilon, d) / d * acc);
}

SpectralBasis density_normalize(const SpectralBasis& basis, const Eigen::VectorXi& counts, int d) {
  if (counts.size() == 0) throw ValidationError("density normalization needs ball counts");
  if (counts.size() != basis.n_points()) throw ValidationError("ball counts length differs from point count");
  if (counts.minCoeff() < 1) throw ValidationError("ball counts must be >= 1");
  if (d < 1) throw ValidationError("intrinsic dimension must be positive");
  SpectralBasis out = basis;
  MatrixXd v = basis.vec_l2;
  for (Index i = 0; i < v.cols(); ++i) v.col(i) /= inverse_density_norm(v.col(i), counts, basis.epsilon, d);
  out.vec_density = std::move(v);
  out.ball_counts = counts;
  out.intrinsic_dim = d;
  return out;
}

}  // namespace glgp
