#include "support.hpp"

#include "glgp/error.hpp"
#include "glgp/lanczos.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numbers>

using namespace glgp;

TEST_CASE("two coincident points") {
  const double eps = 0.4;
  const SpectralBasis b = eigendecompose(build_graph(PointList::Zero(2, 3), eps), 2);
  CHECK(std::abs(b.mu(0)) < 1e-14);
  CHECK(b.mu(1) == doctest::Approx(1 / (eps * eps)).epsilon(1e-12));
  CHECK(b.vec_l2(0, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(b.vec_l2(1, 0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("K = 1 gives the constant eigenvector of A") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const KernelGraph g = build_graph(support::random_points(rng, 25, 2), 0.3);
    const SpectralBasis b = eigendecompose(g, 1);
    CHECK(std::abs(b.mu(0)) < 1e-8 / (0.09));
    CHECK((g.A * b.vec_l2.col(0) - b.vec_l2.col(0)).norm() < 1e-8);
    CHECK(b.vec_l2.col(0).maxCoeff() - b.vec_l2.col(0).minCoeff() < 1e-10);
  }
}

TEST_CASE("random 8-point cloud matches a full nonsymmetric decomposition") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const double eps = support::uniform(rng, 0.2, 0.8);
    const KernelGraph g = build_graph(support::random_points(rng, 8, 2), eps);
    const MatrixXd minus_l = (MatrixXd::Identity(8, 8) - g.A) / (eps * eps);
    Eigen::EigenSolver<MatrixXd> es(minus_l);
    std::vector<std::pair<double, VectorXd>> pairs;
    for (Index i = 0; i < 8; ++i) pairs.emplace_back(es.eigenvalues()(i).real(), es.eigenvectors().col(i).real());
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto solver : {EigenSolverKind::dense, EigenSolverKind::lanczos}) {
      const SpectralBasis b = eigendecompose(g, 8, solver);
      for (Index i = 0; i < 8; ++i) {
        const auto& [value, vec] = pairs[static_cast<std::size_t>(i)];
        CHECK(std::abs(b.mu(i) - value) < 1e-8);
        const VectorXd u = vec.normalized();
        CHECK(std::abs(std::abs(u.dot(b.vec_l2.col(i))) - 1.0) < 1e-8);
      }
    }
  }
}

TEST_CASE("eigendecompose rejects K outside [1, N]") {
  const KernelGraph g = build_graph(PointList::Identity(4, 4), 1.0);
  CHECK_THROWS_AS(eigendecompose(g, 5), ValidationError);
  CHECK_THROWS_AS(eigendecompose(g, 0), ValidationError);
}

TEST_CASE("property: basis invariants on random clouds") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = support::uniform_int(rng, 10, 120);
    const Index d = support::uniform_int(rng, 1, 3);
    const double eps = support::uniform(rng, 0.08, 0.6);
    const int K = support::uniform_int(rng, 1, static_cast<int>(std::min<Index>(n, 15)));
    const PointList p = support::random_points(rng, n, d);
    const KernelGraph g = build_graph(p, eps);
    const auto solver = trial % 2 ? EigenSolverKind::lanczos : EigenSolverKind::dense;
    const SpectralBasis b = eigendecompose(g, K, solver);
    const double inv = 1.0 / (eps * eps);
    REQUIRE(b.K() == K);
    CHECK(std::abs(b.mu(0)) <= 1e-8 * inv);
    for (int i = 0; i < K; ++i) {
      if (i > 0) CHECK(b.mu(i) >= b.mu(i - 1));
      CHECK(b.mu(i) >= 0.0);
      CHECK(b.mu(i) <= inv);
      const VectorXd v = b.vec_l2.col(i);
      CHECK(std::abs(v.norm() - 1.0) < 1e-10);
      // eigen-residual of (I - A)/eps^2
      CHECK(((v - g.A * v) * inv - b.mu(i) * v).norm() <= 1e-7 * inv);
      Index first = 0;
      while (std::abs(v(first)) <= 1e-12) ++first;
      CHECK(v(first) > 0.0);
    }
    const VectorXd dhalf = g.Ddiag.cwiseSqrt();
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j) {
        if (b.mu(j) - b.mu(i) < 1e-6 * inv) continue;
        const VectorXd a = dhalf.cwiseProduct(b.vec_l2.col(i));
        const VectorXd c = dhalf.cwiseProduct(b.vec_l2.col(j));
        CHECK(std::abs(a.dot(c)) / (a.norm() * c.norm()) <= 1e-8);
      }
    const Eigen::VectorXi counts = ball_counts(p, eps);
    CHECK(counts.minCoeff() >= 1);
    const SpectralBasis nb = density_normalize(b, counts, static_cast<int>(d));
    for (int i = 0; i < K; ++i) {
      const VectorXd v = nb.vec_density->col(i);
      const double ratio = v(0) / b.vec_l2(0, i);
      CHECK((v - ratio * b.vec_l2.col(i)).cwiseAbs().maxCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff());
      CHECK(ratio > 0.0);
    }
  }
}

TEST_CASE("dense and lanczos paths agree on a larger graph") {
  std::mt19937_64 rng(4);
  const KernelGraph g = build_graph(support::random_points(rng, 400, 2), 0.05);
  const SpectralBasis a = eigendecompose(g, 20, EigenSolverKind::dense);
  const SpectralBasis b = eigendecompose(g, 20, EigenSolverKind::lanczos);
  CHECK((a.mu - b.mu).cwiseAbs().maxCoeff() < 1e-8 / 0.0025);
  // subspaces agree: projectors match when the spectrum is simple
  for (int i = 0; i < 20; ++i) CHECK(std::abs(std::abs(a.vec_l2.col(i).dot(b.vec_l2.col(i))) - 1.0) < 1e-6);
}

TEST_CASE("lanczos on a random symmetric matrix") {
  std::mt19937_64 rng(17);
  const MatrixXd s = support::random_spd(rng, 150);
  const EigenPairs l = lanczos_largest(s, 10);
  const EigenPairs d = dense_largest(s, 10);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  for (int i = 0; i < 10; ++i) {
    const double ref = es.eigenvalues()(149 - i);
    CHECK(std::abs(l.values(i) - ref) < 1e-9 * ref);
    CHECK(std::abs(d.values(i) - ref) < 1e-9 * ref);
    CHECK((s * l.vectors.col(i) - l.values(i) * l.vectors.col(i)).norm() < 1e-8 * ref);
  }
  CHECK((l.vectors.transpose() * l.vectors - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ball counts") {
  const double eps = 0.5;
  SUBCASE("isolated points") {
    const PointList p = (PointList(3, 1) << 0, 1, 2).finished();
    CHECK(ball_counts(p, eps) == Eigen::VectorXi::Ones(3));
  }
  SUBCASE("coincident points") { CHECK(ball_counts(PointList::Zero(4, 2), eps) == Eigen::VectorXi::Constant(4, 4)); }
  SUBCASE("collinear at spacing 0.6 eps") {
    const PointList p = (PointList(3, 2) << 0, 0, 0.6 * eps, 0, 1.2 * eps, 0).finished();
    CHECK(ball_counts(p, eps) == (Eigen::VectorXi(3) << 2, 3, 2).finished());
  }
  SUBCASE("the ball is open") {
    const PointList p = (PointList(2, 1) << 0, eps).finished();
    CHECK(ball_counts(p, eps) == Eigen::VectorXi::Ones(2));
  }
}

TEST_CASE("unit sphere areas") {
  CHECK(unit_sphere_area(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_sphere_area(2) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
  CHECK(unit_sphere_area(3) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("density normalization") {
  SpectralBasis b;
  b.epsilon = 1.0;
  b.mu = VectorXd::Zero(1);
  b.vec_l2 = VectorXd::Constant(2, 1 / std::sqrt(2.0));
  SUBCASE("d=1, eps=1, unit counts") {
    const SpectralBasis nb = density_normalize(b, Eigen::VectorXi::Ones(2), 1);
    CHECK(inverse_density_norm(b.vec_l2.col(0), Eigen::VectorXi::Ones(2), 1.0, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK((*nb.vec_density)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK((*nb.vec_density)(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(*nb.intrinsic_dim == 1);
  }
  SUBCASE("uniform counts") {
    std::mt19937_64 rng(2);
    b.epsilon = 0.3;
    b.vec_l2 = support::random_vector(rng, 10).normalized();
    b.mu = VectorXd::Zero(1);
    for (int d : {1, 2, 3}) {
      const int c = 7;
      const SpectralBasis nb = density_normalize(b, Eigen::VectorXi::Constant(10, c), d);
      const double factor = std::sqrt(d * c / (unit_sphere_area(d) * std::pow(0.3, d)));
      CHECK((*nb.vec_density - factor * b.vec_l2).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("counts scaled by 4 double the vectors") {
    const Eigen::VectorXi c = (Eigen::VectorXi(2) << 1, 3).finished();
    const SpectralBasis a = density_normalize(b, c, 2);
    const SpectralBasis a4 = density_normalize(b, 4 * c, 2);
    CHECK((*a4.vec_density - 2.0 * *a.vec_density).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("invalid counts") {
    CHECK_THROWS_AS(density_normalize(b, Eigen::VectorXi(), 1), ValidationError);
    CHECK_THROWS_AS(density_normalize(b, Eigen::VectorXi::Zero(2), 1), ValidationError);
    CHECK_THROWS_AS(density_normalize(b, Eigen::VectorXi::Ones(2), 0), ValidationError);
  }
}

TEST_CASE("truncation keeps the leading pairs") {
  std::mt19937_64 rng(6);
  const KernelGraph g = build_graph(support::random_points(rng, 30, 2), 0.3);
  const SpectralBasis b = eigendecompose(g, 6);
  const SpectralBasis t = b.truncated(3);
  CHECK(t.K() == 3);
  CHECK(t.mu == b.mu.head(3));
  CHECK(t.vec_l2 == b.vec_l2.leftCols(3));
  CHECK_THROWS_AS(b.truncated(7), ValidationError);
}
