#include "support.hpp"

#include "glgp/error.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>

using namespace glgp;

namespace {

struct Fixture {
  PointList points;
  KernelGraph graph;
  SpectralBasis basis;
};

Fixture random_fixture(std::mt19937_64& rng, Index n, int K, double eps, Index d = 2) {
  PointList p = support::random_points(rng, n, d);
  KernelGraph g = build_graph(p, eps);
  SpectralBasis b = eigendecompose(g, K);
  b = density_normalize(b, ball_counts(p, eps), static_cast<int>(d));
  return {std::move(p), std::move(g), std::move(b)};
}

double rel_dev(const MatrixXd& a, const MatrixXd& b) { return support::max_abs(a - b) / support::max_abs(b); }

PointList circle(Index n) {
  PointList p(n, 2);
  for (Index i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    p.row(i) << std::cos(a), std::sin(a);
  }
  return p;
}

}  // namespace

TEST_CASE("K = 1 general covariance ignores t") {
  std::mt19937_64 rng(1);
  const Fixture f = random_fixture(rng, 30, 1, 0.3);
  const VectorXd v = f.basis.vec_l2.col(0);
  for (double t : {0.0, 0.5, 10.0}) {
    const GlgpCovariance c = glgp_covariance(f.basis, t, CovarianceMode::general);
    CHECK(rel_dev(c.H, 30.0 * v * v.transpose()) < 1e-12);
  }
}

TEST_CASE("t = 0 trace is N K") {
  std::mt19937_64 rng(2);
  const Fixture f = random_fixture(rng, 40, 7, 0.3);
  const GlgpCovariance c = glgp_covariance(f.basis, 0.0, CovarianceMode::general);
  CHECK(c.H.trace() == doctest::Approx(40.0 * 7).epsilon(1e-10));
}

TEST_CASE("uniform degree: t = 0 gives a scaled projection") {
  const SpectralBasis b = eigendecompose(build_graph(circle(40), 0.3), 7);
  const GlgpCovariance c = glgp_covariance(b, 0.0, CovarianceMode::general);
  CHECK(support::max_abs(c.H * c.H / 40.0 - c.H) < 1e-9 * 40);
}

TEST_CASE("large t is dominated by the constant eigenvector") {
  std::mt19937_64 rng(3);
  const Fixture f = random_fixture(rng, 40, 5, 0.3);
  REQUIRE(f.basis.mu(1) > 0.0);
  const double t = 50.0 / f.basis.mu(1);
  const GlgpCovariance c = glgp_covariance(f.basis, t, CovarianceMode::general);
  const VectorXd v = f.basis.vec_l2.col(0);
  const MatrixXd p = v * v.transpose();
  CHECK(support::max_abs(c.H / c.H.norm() - p / p.norm()) < 1e-6);
}

TEST_CASE("manifold mode needs density vectors") {
  std::mt19937_64 rng(4);
  const PointList p = support::random_points(rng, 10, 2);
  const SpectralBasis b = eigendecompose(build_graph(p, 0.4), 3);
  CHECK_THROWS_AS(glgp_covariance(b, 0.1, CovarianceMode::manifold), ValidationError);
  CHECK_THROWS_AS(glgp_covariance(b, -0.1, CovarianceMode::general), ValidationError);
}

TEST_CASE("manifold mode uses the density vectors without the N factor") {
  std::mt19937_64 rng(5);
  const Fixture f = random_fixture(rng, 30, 4, 0.3);
  const double t = 0.2;
  const GlgpCovariance c = glgp_covariance(f.basis, t, CovarianceMode::manifold);
  MatrixXd expected = MatrixXd::Zero(30, 30);
  for (int i = 0; i < 4; ++i)
    expected += std::exp(-f.basis.mu(i) * t) * f.basis.vec_density->col(i) * f.basis.vec_density->col(i).transpose();
  CHECK(rel_dev(c.H, expected) < 1e-12);
}

TEST_CASE("property: covariance structure on random clouds") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = support::uniform_int(rng, 8, 80);
    const int K = support::uniform_int(rng, 1, static_cast<int>(std::min<Index>(n - 1, 12)));
    const double eps = support::uniform(rng, 0.1, 0.5);
    const Fixture f = random_fixture(rng, n, K, eps);
    const double t = support::uniform(rng, 0.0, 1.0);
    for (auto mode : {CovarianceMode::general, CovarianceMode::manifold}) {
      const MatrixXd h = glgp_covariance(f.basis, t, mode).H;
      CHECK(support::max_abs(h - h.transpose()) <= 1e-10 * support::max_abs(h));
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
      const VectorXd ev = es.eigenvalues().reverse();
      CHECK(ev(n - 1) >= -1e-8 * h.diagonal().maxCoeff());
      if (K < n) CHECK(ev(K) <= 1e-8 * ev(0));
      if (mode == CovarianceMode::general) {
        // nonzero spectrum of N V E V^T equals that of N E^{1/2} V^T V E^{1/2}
        const MatrixXd& v = f.basis.vec_l2;
        const VectorXd root = (-0.5 * t * f.basis.mu.array()).exp();
        const MatrixXd gram = static_cast<double>(n) * root.asDiagonal() * (v.transpose() * v) * root.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> small(gram, Eigen::EigenvaluesOnly);
        const VectorXd expected = small.eigenvalues().reverse();
        for (int i = 0; i < K; ++i) CHECK(std::abs(ev(i) - expected(i)) <= 1e-8 * expected(i) + 1e-10 * ev(0));
      }
    }
    VectorXd previous = glgp_covariance(f.basis, 0.0, CovarianceMode::general).H.diagonal();
    for (double tt : {0.1, 0.3, 1.0, 3.0}) {
      const VectorXd diag = glgp_covariance(f.basis, tt, CovarianceMode::general).H.diagonal();
      CHECK((diag.array() <= previous.array() * (1 + 1e-12)).all());
      previous = diag;
    }
  }
}

TEST_CASE("extension matrix") {
  std::mt19937_64 rng(7);
  const double eps = 0.35;
  const PointList base = support::random_points(rng, 20, 2);
  const KernelGraph g = build_graph(base, eps);
  SUBCASE("no new points reproduces A") {
    const NystromExtension e = extension_matrix(base, PointList(0, 2), eps);
    CHECK(e.new_count() == 0);
    CHECK(support::max_abs(e.E - g.A) < 1e-12);
  }
  SUBCASE("a new point on top of a base point copies its row") {
    const PointList extra = base.row(4);
    const NystromExtension e = extension_matrix(base, extra, eps);
    CHECK(support::max_abs(e.E.row(20) - g.A.row(4)) < 1e-12);
  }
  SUBCASE("rows are stochastic") {
    const NystromExtension e = extension_matrix(base, support::random_points(rng, 9, 2), eps);
    CHECK((e.E.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(e.E.rows() == 29);
    CHECK(e.E.cols() == 20);
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(extension_matrix(base, PointList::Zero(1, 3), eps), ValidationError); }
}

TEST_CASE("extension row for two base points and one new point") {
  const double eps = 0.6;
  const PointList base = (PointList(2, 2) << 0, 0, 0.5, 0.2).finished();
  const PointList z = (PointList(1, 2) << 0.3, -0.4).finished();
  auto k = [&](const VectorXd& a, const VectorXd& b) { return std::exp(-(a - b).squaredNorm() / (4 * eps * eps)); };
  const double k12 = k(base.row(0), base.row(1));
  const double q1 = 1 + k12, q2 = 1 + k12;
  const double kz1 = k(z.row(0), base.row(0)), kz2 = k(z.row(0), base.row(1));
  const double qz = kz1 + kz2;
  const double e1 = kz1 / (qz * q1), e2 = kz2 / (qz * q2);
  const NystromExtension e = extension_matrix(base, z, eps);
  CHECK(e.E(2, 0) == doctest::Approx(e1 / (e1 + e2)).epsilon(1e-13));
  CHECK(e.E(2, 1) == doctest::Approx(e2 / (e1 + e2)).epsilon(1e-13));
}

TEST_CASE("property: Nystrom covariance restricts to H and ignores further samples") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = support::uniform_int(rng, 10, 60);
    const int K = support::uniform_int(rng, 1, 10);
    const double eps = support::uniform(rng, 0.15, 0.5);
    const double t = support::uniform(rng, 0.0, 0.5);
    const Fixture f = random_fixture(rng, n, K, eps);
    const PointList extra = support::random_points(rng, 8, 2);
    for (auto mode : {CovarianceMode::general, CovarianceMode::manifold}) {
      const MatrixXd h = glgp_covariance(f.basis, t, mode).H;
      for (Index l : {0, 1, 5}) {
        const NystromExtension e = extension_matrix(f.points, extra.topRows(l), eps);
        const MatrixXd hs = nystrom_covariance(e, f.basis, t, mode).H;
        CHECK(hs.rows() == n + l);
        CHECK(rel_dev(hs.topLeftCorner(n, n), h) <= 1e-9);
      }
      const MatrixXd h5 = nystrom_covariance(extension_matrix(f.points, extra.topRows(5), eps), f.basis, t, mode).H;
      const MatrixXd h8 = nystrom_covariance(extension_matrix(f.points, extra, eps), f.basis, t, mode).H;
      CHECK(support::max_abs(h8.block(n, n, 5, 5) - h5.block(n, n, 5, 5)) <= 1e-12 * support::max_abs(h5));
    }
  }
}

TEST_CASE("as-written Nystrom scale drops the N factor in general mode") {
  std::mt19937_64 rng(9);
  const Fixture f = random_fixture(rng, 25, 4, 0.3);
  const NystromExtension e = extension_matrix(f.points, support::random_points(rng, 3, 2), 0.3);
  const MatrixXd consistent = nystrom_covariance(e, f.basis, 0.1, CovarianceMode::general).H;
  const MatrixXd written =
      nystrom_covariance(e, f.basis, 0.1, CovarianceMode::general, NystromScale::as_written).H;
  CHECK(rel_dev(written * 25.0, consistent) < 1e-13);
  const MatrixXd m1 = nystrom_covariance(e, f.basis, 0.1, CovarianceMode::manifold).H;
  const MatrixXd m2 = nystrom_covariance(e, f.basis, 0.1, CovarianceMode::manifold, NystromScale::as_written).H;
  CHECK(m1 == m2);
}

TEST_CASE("Nystrom extension of an eigenvalue-0 direction of A is refused") {
  std::mt19937_64 rng(10);
  Fixture f = random_fixture(rng, 12, 3, 0.4);
  f.basis.mu(2) = 1.0 / (0.4 * 0.4);
  const NystromExtension e = extension_matrix(f.points, support::random_points(rng, 2, 2), 0.4);
  CHECK_THROWS_AS(nystrom_covariance(e, f.basis, 0.1, CovarianceMode::general), NumericalError);
}

TEST_CASE("squared exponential covariance") {
  const PointList a = (PointList(2, 2) << 0, 0, 1, 1).finished();
  const PointList b = (PointList(3, 2) << 0, 0, 0.3, 0.4, 1, 1).finished();
  const MatrixXd c = sqexp_covariance(a, b, 3.0, 0.5);
  CHECK(c(0, 0) == 3.0);
  CHECK(c(1, 2) == 3.0);
  CHECK(c(0, 1) == doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-14));
  const MatrixXd f = sqexp_covariance(a, b, 12.0, std::sqrt(0.015));
  CHECK(f(0, 1) == doctest::Approx(12.0 * std::exp(-0.25 / 0.015)).epsilon(1e-12));
  CHECK_THROWS_AS(sqexp_covariance(a, PointList::Zero(1, 3), 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(sqexp_covariance(a, b, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(sqexp_covariance(a, b, 1.0, 0.0), ValidationError);
}

TEST_CASE("mode and scale names") {
  CHECK(covariance_mode_from_string(to_string(CovarianceMode::manifold)) == CovarianceMode::manifold);
  CHECK(nystrom_scale_from_string("as_written") == NystromScale::as_written);
  CHECK_THROWS_AS(covariance_mode_from_string("other"), ConfigError);
  CHECK_THROWS_AS(nystrom_scale_from_string(""), ConfigError);
}

TEST_CASE("uniform degree: general spectrum is N exp(-mu t)") {
  const Index n = 40;
  const SpectralBasis b = eigendecompose(build_graph(circle(n), 0.3), 7);
  const double t = 0.02;
  const MatrixXd h = glgp_covariance(b, t, CovarianceMode::general).H;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues().reverse();
  VectorXd expected = (static_cast<double>(n) * (-t * b.mu.array()).exp()).matrix();
  std::sort(expected.data(), expected.data() + expected.size(), std::greater<>());
  for (Index i = 0; i < expected.size(); ++i) CHECK(ev(i) == doctest::Approx(expected(i)).epsilon(1e-8));
}
