#include "glgp/graph.hpp"

#include "glgp/error.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace glgp {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("bandwidth epsilon must be positive and finite");
}

}  // namespace

void flush_subnormals(MatrixXd& m) {
  constexpr double tiny = std::numeric_limits<double>::min();
  m = m.unaryExpr([](double v) { return std::abs(v) < tiny ? 0.0 : v; });
}

double gaussian_kernel(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& xp, double epsilon) {
  check_epsilon(epsilon);
  if (x.size() != xp.size()) throw ValidationError("kernel arguments differ in dimension");
  return std::exp(-(x - xp).squaredNorm() / (4.0 * epsilon * epsilon));
}

MatrixXd squared_distances(const PointList& a, const PointList& b) {
  if (a.cols() != b.cols()) throw ValidationError("point sets differ in dimension");
  MatrixXd d2(a.rows(), b.rows());
  // Direct differences rather than the |a|^2 + |b|^2 - 2ab expansion, which loses
  // the exact zero on coincident points.
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) d2(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d2;
}

MatrixXd kernel_matrix(const PointList& a, const PointList& b, double epsilon) {
  check_epsilon(epsilon);
  const double scale = -1.0 / (4.0 * epsilon * epsilon);
  MatrixXd k = (squared_distances(a, b) * scale).array().exp().matrix();
  flush_subnormals(k);
  return k;
}

KernelGraph build_graph(const PointList& points, double epsilon) {
  check_epsilon(epsilon);
  if (points.rows() < 2) throw ValidationError("graph needs at least two points");
  if (!points.allFinite()) throw ValidationError("non-finite point coordinate");

  KernelGraph g;
  g.epsilon = epsilon;
  MatrixXd k = kernel_matrix(points, points, epsilon);
  g.q = k.rowwise().sum();
  const VectorXd qinv = g.q.cwiseInverse();
  g.W = qinv.asDiagonal() * k * qinv.asDiagonal();
  k.resize(0, 0);
  g.W = 0.5 * (g.W + MatrixXd(g.W.transpose()));
  g.Ddiag = g.W.rowwise().sum();
  g.A = g.Ddiag.cwiseInverse().asDiagonal() * g.W;
  const VectorXd s = g.Ddiag.cwiseSqrt().cwiseInverse();
  g.Asym = s.asDiagonal() * g.W * s.asDiagonal();
  g.Asym = 0.5 * (g.Asym + MatrixXd(g.Asym.transpose()));
  flush_subnormals(g.W);
  flush_subnormals(g.A);
  flush_subnormals(g.Asym);
  return g;
}

PointList perturb_points(const PointList& points, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw ValidationError("delta must be non-negative");
  PointList out = points;
  if (delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorXd dir(points.cols());
  for (Index i = 0; i < points.rows(); ++i) {
    double norm = 0.0;
    do {
      for (Index c = 0; c < dir.size(); ++c) dir(c) = normal(rng);
      norm = dir.norm();
    } while (norm == 0.0);
    const double radius = delta * unit(rng);
    out.row(i) += (radius / norm) * dir.transpose();
  }
  return out;
}

double laplacian_distance(const KernelGraph& a, const KernelGraph& b) {
  if (a.n_points() != b.n_points()) throw ValidationError("graphs differ in size");
  if (a.epsilon != b.epsilon) throw ValidationError("graphs differ in bandwidth");
  const MatrixXd diff = (a.A - b.A) / (a.epsilon * a.epsilon);
  Eigen::BDCSVD<MatrixXd> svd(diff);
  return svd.singularValues()(0);
}

void save_matrix_csv(const MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace glgp
