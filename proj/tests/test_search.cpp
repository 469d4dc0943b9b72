#include "support.hpp"

#include "glgp/error.hpp"

using namespace glgp;

namespace {

SearchConfig small_config() {
  SearchConfig c = SearchConfig::defaults();
  c.eps2_grid = {0.03, 0.06};
  c.k_grid = {3, 6};
  return c;
}

}  // namespace

TEST_CASE("default search config") {
  const SearchConfig c = SearchConfig::defaults();
  CHECK(c.eps2_grid.size() == 29);
  CHECK(c.eps2_grid.front() == doctest::Approx(0.002));
  CHECK(c.eps2_grid.back() == doctest::Approx(0.030));
  CHECK(c.k_grid.size() == 35);
  CHECK(c.t_bounds == std::array<double, 2>{0.01, 1.0});
  CHECK(c.sigma2_bounds == std::array<double, 2>{0.1, 2.0});
  CHECK(c.multistarts == 3);
  CHECK(c.optimizer.max_iters == 50);
  CHECK(c.optimizer.armijo_c == 1e-4);
  CHECK(c.optimizer.shrink == 0.5);
  CHECK(c.optimizer.tol == 1e-8);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config validation and json") {
  SearchConfig c = small_config();
  c.eps2_grid.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.k_grid.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.t_bounds = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = small_config();
  c.seed = 99;
  c.likelihood_form = LikelihoodForm::as_written;
  c.nystrom_scale = NystromScale::as_written;
  c.mode = CovarianceMode::manifold;
  const auto j = to_json(c);
  CHECK(j["schema"] == 1);
  const SearchConfig back = search_config_from_json(j);
  CHECK(back.eps2_grid == c.eps2_grid);
  CHECK(back.k_grid == c.k_grid);
  CHECK(back.seed == 99);
  CHECK(back.likelihood_form == LikelihoodForm::as_written);
  CHECK(back.nystrom_scale == NystromScale::as_written);
  CHECK(back.mode == CovarianceMode::manifold);
  CHECK(to_json(back) == j);

  CHECK_THROWS_AS(search_config_from_json(nlohmann::json{{"eps2_grid", nlohmann::json::array()}}), ConfigError);
  CHECK_THROWS_AS(search_config_from_json(nlohmann::json{{"k_gird", {1}}}), ConfigError);
  CHECK_THROWS_AS(search_config_from_json(nlohmann::json{{"likelihood_form", "half"}}), ConfigError);
  CHECK_THROWS_AS(search_config_from_json(nlohmann::json{{"eps2_grid", "x"}}), ConfigError);
  const SearchConfig partial = search_config_from_json(nlohmann::json{{"k_grid", {2, 4}}});
  CHECK(partial.k_grid == std::vector<int>{2, 4});
  CHECK(partial.eps2_grid.size() == 29);
}

TEST_CASE("projected ascent") {
  // concave quadratic with its maximum at (1, -2)
  auto f = [](const VectorXd& x, VectorXd& g) {
    g = (VectorXd(2) << -2 * (x(0) - 1), -4 * (x(1) + 2)).finished();
    return -(x(0) - 1) * (x(0) - 1) - 2 * (x(1) + 2) * (x(1) + 2);
  };
  OptimizerSettings s;
  s.max_iters = 200;
  s.tol = 1e-14;
  const VectorXd lo = VectorXd::Constant(2, -5), hi = VectorXd::Constant(2, 5);
  const AscentResult r = projected_ascent(f, VectorXd::Zero(2), lo, hi, s);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(-2.0).epsilon(1e-4));

  const VectorXd hi2 = (VectorXd(2) << 0.5, 5).finished();
  const AscentResult b = projected_ascent(f, VectorXd::Zero(2), lo, hi2, s);
  CHECK(b.x(0) == 0.5);
  CHECK(b.x(1) == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("fit on a small cloud") {
  std::mt19937_64 rng(1);
  const PointCloud c = support::circle_cloud(rng, 80, 15);
  const SearchConfig cfg = small_config();
  const FitReport r = fit(c, cfg);
  CHECK(r.trace.size() == 2 * 2 * 3);
  for (const auto& e : r.trace) CHECK(r.logml >= e.logml);
  bool found = false;
  for (const auto& e : r.trace) found |= (e.logml == r.logml && e.params.K == r.best.K && e.params.t == r.best.t);
  CHECK(found);
  CHECK(r.best.t >= cfg.t_bounds[0]);
  CHECK(r.best.t <= cfg.t_bounds[1]);
  CHECK(r.best.sigma_noise * r.best.sigma_noise >= cfg.sigma2_bounds[0] * (1 - 1e-12));
  CHECK(r.best.sigma_noise * r.best.sigma_noise <= cfg.sigma2_bounds[1] * (1 + 1e-12));

  const FitReport again = fit(c, cfg);
  CHECK(again.logml == r.logml);
  CHECK(again.best.t == r.best.t);
  CHECK(again.trace.size() == r.trace.size());
}

TEST_CASE("a single-cell grid improves on its start point") {
  std::mt19937_64 rng(2);
  const PointCloud c = support::circle_cloud(rng, 60, 12);
  SearchConfig cfg = SearchConfig::defaults();
  cfg.eps2_grid = {0.05};
  cfg.k_grid = {5};
  cfg.multistarts = 1;
  const FitReport r = fit(c, cfg);
  const SpectralBasis b = basis_for(c, std::sqrt(0.05), 5, CovarianceMode::general);
  const double var = (c.responses().array() - c.responses().mean()).square().mean();
  const double s2 = std::clamp(var / 2, 0.1, 2.0);
  const double t0 = std::clamp(1.0 / b.mu(4), 0.01, 1.0);
  const double start = log_marginal_likelihood(labeled_block(b, t0, CovarianceMode::general, 12), c.responses(), std::sqrt(s2));
  CHECK(r.logml >= start - 1e-9);
}

TEST_CASE("fit refusals") {
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(fit(support::circle_cloud(rng, 20, 0), small_config()), ValidationError);
  SearchConfig big = small_config();
  big.k_grid = {30};
  CHECK_THROWS_AS(fit(support::circle_cloud(rng, 20, 5), big), ConfigError);
  SearchConfig manifold = small_config();
  manifold.mode = CovarianceMode::manifold;
  const PointCloud no_dim = support::circle_cloud(rng, 20, 5).with_intrinsic_dim(std::nullopt);
  CHECK_THROWS_AS(fit(no_dim, manifold), ConfigError);
}

TEST_CASE("baseline gradient matches finite differences") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const PointList x = support::random_points(rng, 12, 2, 2.0);
    const VectorXd y = support::random_vector(rng, 12);
    const BaselineParams p{support::uniform(rng, 0.5, 5), support::uniform(rng, 0.3, 2), support::uniform(rng, 0.3, 1)};
    VectorXd g;
    baseline_logml(x, y, p, &g);
    const double h = 1e-5;
    auto at = [&](int k, double dir) {
      BaselineParams q = p;
      double* field = k == 0 ? &q.amplitude : k == 1 ? &q.rho : &q.sigma_noise;
      *field *= std::exp(dir * h);
      return baseline_logml(x, y, q);
    };
    for (int k = 0; k < 3; ++k) {
      const double fd = (at(k, 1) - at(k, -1)) / (2 * h);
      CHECK(std::abs(g(k) - fd) <= 1e-4 * std::max(std::abs(fd), 1e-3));
    }
  }
}

TEST_CASE("baseline fit dominates any fixed parameters") {
  std::mt19937_64 rng(5);
  const PointCloud c = support::circle_cloud(rng, 40, 20);
  SearchConfig cfg = small_config();
  const BaselineFitReport r = fit_baseline(c, cfg);
  CHECK(r.trace.size() == cfg.baseline.amp_grid.size() * cfg.baseline.rho2_grid.size());
  for (const auto& e : r.trace) CHECK(r.logml >= e.logml);
  const PointList lab = c.points().topRows(20);
  CHECK(baseline_logml(lab, c.responses(), {12.0, std::sqrt(0.015), 0.5}) <= r.logml);
  CHECK(baseline_logml(lab, c.responses(), {1.0, 1.0, 1.0}) <= r.logml);

  cfg.baseline.amp_grid = {3.0};
  cfg.baseline.rho2_grid = {0.5};
  CHECK(fit_baseline(c, cfg).trace.size() == 1);
}

TEST_CASE("grid evaluation and argmax invariance") {
  std::mt19937_64 rng(6);
  const PointCloud c = support::circle_cloud(rng, 60, 15);
  GridSpec g;
  g.eps2_grid = {0.02, 0.05};
  g.k_grid = {2, 4, 8};
  g.t_grid = {0.05, 0.2, 0.8};
  g.sigma2_grid = {0.1, 0.5};
  const GridEvaluation a = grid_evaluate(c, g);
  CHECK(a.cells.size() == 2 * 3 * 3 * 2);
  for (const auto& cell : a.cells) CHECK(a.cells[a.best].logml >= cell.logml);
  g.form = LikelihoodForm::as_written;
  const GridEvaluation b = grid_evaluate(c, g);
  CHECK(b.best == a.best);
  g.t_grid.clear();
  CHECK_THROWS_AS(grid_evaluate(c, g), ConfigError);
}

TEST_CASE("solver names") {
  CHECK(solver_from_string(to_string(EigenSolverKind::lanczos)) == EigenSolverKind::lanczos);
  CHECK_THROWS_AS(solver_from_string("arpack"), ConfigError);
}
