#pragma once

#include "glgp/experiments.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

namespace support {

using glgp::Index;
using glgp::MatrixXd;
using glgp::PointList;
using glgp::VectorXd;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline PointList random_points(std::mt19937_64& rng, Index n, Index d, double scale = 1.0) {
  PointList p(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < d; ++c) p(i, c) = uniform(rng, 0.0, scale);
  return p;
}

inline VectorXd random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

/// B B^T + shift I with Gaussian B.
inline MatrixXd random_spd(std::mt19937_64& rng, Index n, double shift = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd b(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = g(rng);
  MatrixXd s = b * b.transpose();
  s.diagonal().array() += shift;
  return s;
}

inline double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("glgp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// A small labeled-first cloud on a noisy circle with a smooth response.
inline glgp::PointCloud circle_cloud(std::mt19937_64& rng, Index n, Index m, double noise = 0.0) {
  PointList p(n, 2);
  VectorXd y(m);
  for (Index i = 0; i < n; ++i) {
    const double a = uniform(rng, 0.0, 6.283185307179586);
    p(i, 0) = std::cos(a) + noise * uniform(rng, -1.0, 1.0);
    p(i, 1) = std::sin(a) + noise * uniform(rng, -1.0, 1.0);
    if (i < m) y(i) = std::sin(2.0 * a) + 0.1 * uniform(rng, -1.0, 1.0);
  }
  return glgp::PointCloud(p, y, 1);
}

}  // namespace support
