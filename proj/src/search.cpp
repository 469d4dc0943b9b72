#include "glgp/search.hpp"

#include "glgp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

namespace glgp {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double form_factor(LikelihoodForm form) { return form == LikelihoodForm::standard ? 1.0 : 2.0; }

double sample_variance(const VectorXd& y) {
  if (y.size() == 0) return 0.0;
  const double mean = y.mean();
  return (y.array() - mean).square().mean();
}

void check_bounds(const std::array<double, 2>& b, const char* name) {
  if (!(b[0] > 0.0) || !(b[1] >= b[0]) || !std::isfinite(b[1]))
    throw ConfigError(std::string(name) + " must satisfy 0 < lo <= hi");
}

// Lexicographic order used to break exact likelihood ties.
bool lex_less(const Hyperparams& a, const Hyperparams& b) {
  return std::tie(a.epsilon, a.K, a.t, a.sigma_noise) < std::tie(b.epsilon, b.K, b.t, b.sigma_noise);
}

}  // namespace

std::string_view to_string(EigenSolverKind solver) {
  switch (solver) {
    case EigenSolverKind::dense: return "dense";
    case EigenSolverKind::lanczos: return "lanczos";
    default: return "automatic";
  }
}

EigenSolverKind solver_from_string(std::string_view s) {
  if (s == "automatic") return EigenSolverKind::automatic;
  if (s == "dense") return EigenSolverKind::dense;
  if (s == "lanczos") return EigenSolverKind::lanczos;
  throw ConfigError("unknown solver '" + std::string(s) + "'");
}

SearchConfig SearchConfig::defaults() {
  SearchConfig c;
  for (int i = 2; i <= 30; ++i) c.eps2_grid.push_back(0.001 * i);
  for (int k = 1; k <= 35; ++k) c.k_grid.push_back(k);
  return c;
}

void SearchConfig::validate() const {
  if (eps2_grid.empty()) throw ConfigError("eps2_grid is empty");
  if (k_grid.empty()) throw ConfigError("k_grid is empty");
  for (double e : eps2_grid)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eps2_grid entries must be positive");
  for (int k : k_grid)
    if (k < 1) throw ConfigError("k_grid entries must be >= 1");
  check_bounds(t_bounds, "t_bounds");
  check_bounds(sigma2_bounds, "sigma2_bounds");
  if (multistarts < 1) throw ConfigError("multistarts must be >= 1");
  if (optimizer.max_iters < 0 || !(optimizer.shrink > 0.0 && optimizer.shrink < 1.0) || !(optimizer.initial_step > 0.0))
    throw ConfigError("invalid optimizer settings");
  if (baseline.amp_grid.empty() || baseline.rho2_grid.empty()) throw ConfigError("baseline grids are empty");
  for (double a : baseline.amp_grid)
    if (!(a > 0.0)) throw ConfigError("baseline amp_grid entries must be positive");
  for (double r : baseline.rho2_grid)
    if (!(r > 0.0)) throw ConfigError("baseline rho2_grid entries must be positive");
  check_bounds(baseline.amp_bounds, "baseline amp_bounds");
  check_bounds(baseline.rho2_bounds, "baseline rho2_bounds");
}

nlohmann::json to_json(const SearchConfig& c) {
  nlohmann::json j;
  j["schema"] = 1;
  j["eps2_grid"] = c.eps2_grid;
  j["k_grid"] = c.k_grid;
  j["t_bounds"] = c.t_bounds;
  j["sigma2_bounds"] = c.sigma2_bounds;
  j["multistarts"] = c.multistarts;
  j["seed"] = c.seed;
  j["likelihood_form"] = std::string(to_string(c.likelihood_form));
  j["nystrom_scale"] = std::string(to_string(c.nystrom_scale));
  j["mode"] = std::string(to_string(c.mode));
  j["solver"] = std::string(to_string(c.solver));
  j["optimizer"] = {{"max_iters", c.optimizer.max_iters},       {"tol", c.optimizer.tol},
                    {"armijo_c", c.optimizer.armijo_c},         {"shrink", c.optimizer.shrink},
                    {"initial_step", c.optimizer.initial_step}, {"max_step", c.optimizer.max_step},
                    {"max_backtracks", c.optimizer.max_backtracks}};
  j["baseline"] = {{"amp_grid", c.baseline.amp_grid},
                   {"rho2_grid", c.baseline.rho2_grid},
                   {"amp_bounds", c.baseline.amp_bounds},
                   {"rho2_bounds", c.baseline.rho2_bounds}};
  return j;
}

SearchConfig search_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"schema", "eps2_grid", "k_grid", "t_bounds", "sigma2_bounds",
                                           "multistarts", "seed", "likelihood_form", "nystrom_scale", "mode",
                                           "solver", "optimizer", "baseline"};
  if (!j.is_object()) throw ConfigError("search config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown search config field '" + key + "'");
  if (j.contains("schema") && j["schema"] != 1) throw ConfigError("unsupported search config schema");
  SearchConfig c = SearchConfig::defaults();
  try {
    if (j.contains("eps2_grid")) c.eps2_grid = j["eps2_grid"].get<std::vector<double>>();
    if (j.contains("k_grid")) c.k_grid = j["k_grid"].get<std::vector<int>>();
    if (j.contains("t_bounds")) c.t_bounds = j["t_bounds"].get<std::array<double, 2>>();
    if (j.contains("sigma2_bounds")) c.sigma2_bounds = j["sigma2_bounds"].get<std::array<double, 2>>();
    if (j.contains("multistarts")) c.multistarts = j["multistarts"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("likelihood_form")) c.likelihood_form = likelihood_form_from_string(j["likelihood_form"].get<std::string>());
    if (j.contains("nystrom_scale")) c.nystrom_scale = nystrom_scale_from_string(j["nystrom_scale"].get<std::string>());
    if (j.contains("mode")) c.mode = covariance_mode_from_string(j["mode"].get<std::string>());
    if (j.contains("solver")) c.solver = solver_from_string(j["solver"].get<std::string>());
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      c.optimizer.max_iters = o.value("max_iters", c.optimizer.max_iters);
      c.optimizer.tol = o.value("tol", c.optimizer.tol);
      c.optimizer.armijo_c = o.value("armijo_c", c.optimizer.armijo_c);
      c.optimizer.shrink = o.value("shrink", c.optimizer.shrink);
      c.optimizer.initial_step = o.value("initial_step", c.optimizer.initial_step);
      c.optimizer.max_step = o.value("max_step", c.optimizer.max_step);
      c.optimizer.max_backtracks = o.value("max_backtracks", c.optimizer.max_backtracks);
    }
    if (j.contains("baseline")) {
      const auto& b = j["baseline"];
      if (b.contains("amp_grid")) c.baseline.amp_grid = b["amp_grid"].get<std::vector<double>>();
      if (b.contains("rho2_grid")) c.baseline.rho2_grid = b["rho2_grid"].get<std::vector<double>>();
      if (b.contains("amp_bounds")) c.baseline.amp_bounds = b["amp_bounds"].get<std::array<double, 2>>();
      if (b.contains("rho2_bounds")) c.baseline.rho2_bounds = b["rho2_bounds"].get<std::array<double, 2>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed search config: ") + e.what());
  }
  c.validate();
  return c;
}

LowRankLikelihood::LowRankLikelihood(MatrixXd labeled_features, VectorXd mu, double scale, VectorXd y)
    : f_(std::move(labeled_features)), mu_(std::move(mu)), scale_(scale), y_(std::move(y)) {
  if (f_.rows() != y_.size()) throw ValidationError("feature rows do not match responses");
  if (f_.cols() != mu_.size()) throw ValidationError("feature columns do not match eigenvalues");
  if (y_.size() == 0) throw ValidationError("marginal likelihood needs at least one labeled point");
  gram_ = f_.transpose() * f_;
  fty_ = f_.transpose() * y_;
  yty_ = y_.squaredNorm();
}

LowRankLikelihood::Value LowRankLikelihood::evaluate(double t, double sigma_noise) const {
  const Index m = y_.size();
  const Index k = mu_.size();
  const VectorXd w = scale_ * (-t * mu_.array()).exp().matrix();
  const double trace = (w.array() * gram_.diagonal().array()).sum();
  const double mean_diag = trace / static_cast<double>(m);
  const double s = sigma_noise * sigma_noise + 1e-10 * (mean_diag > 0.0 ? mean_diag : 1.0);

  const VectorXd sw = w.cwiseSqrt();
  const MatrixXd p = sw.asDiagonal() * gram_;          // diag(sw) G
  MatrixXd cap = p * sw.asDiagonal() / s;              // diag(sw) G diag(sw) / s
  cap.diagonal().array() += 1.0;
  const Eigen::LLT<MatrixXd> llt(cap);
  if (llt.info() != Eigen::Success) throw NumericalError("capacitance matrix is not positive definite");

  const VectorXd b = sw.cwiseProduct(fty_);
  const VectorXd c = llt.solve(b);
  const double quad = (yty_ - b.dot(c) / s) / s;
  const double logdet = static_cast<double>(m) * std::log(s) + 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  Value v;
  v.logml = -0.5 * quad - 0.5 * logdet - static_cast<double>(m) * kHalfLog2Pi;

  // alpha = K^{-1} y; only F^T alpha and |alpha|^2 are needed.
  const VectorXd swc = sw.cwiseProduct(c);
  const VectorXd alpha = (y_ - f_ * swc / s) / s;
  const VectorXd fa = f_.transpose() * alpha;
  const MatrixXd x = llt.solve(p);
  const VectorXd inner = (p.array() * x.array()).colwise().sum().transpose();
  const VectorXd diag_fkf = (gram_.diagonal() - inner / s) / s;
  const VectorXd dw = -(mu_.array() * w.array()).matrix();
  v.d_t = 0.5 * (dw.array() * fa.array().square()).sum() - 0.5 * (dw.array() * diag_fkf.array()).sum();

  const MatrixXd linv = llt.matrixL().solve(MatrixXd::Identity(k, k));
  const double tr_kinv = (static_cast<double>(m - k) + linv.squaredNorm()) / s;
  v.d_sigma = sigma_noise * (alpha.squaredNorm() - tr_kinv);
  return v;
}

double apply_form(double standard_logml, Index m, LikelihoodForm form) {
  if (form == LikelihoodForm::standard) return standard_logml;
  return 2.0 * standard_logml + static_cast<double>(m) * kHalfLog2Pi;
}

AscentResult projected_ascent(const std::function<double(const VectorXd&, VectorXd&)>& objective, VectorXd x0,
                              const VectorXd& lo, const VectorXd& hi, const OptimizerSettings& settings,
                              double value_scale) {
  auto project = [&](VectorXd x) { return x.cwiseMax(lo).cwiseMin(hi).eval(); };
  AscentResult r;
  r.x = project(std::move(x0));
  VectorXd g(r.x.size());
  r.value = objective(r.x, g);
  double step = settings.initial_step;
  for (int it = 0; it < settings.max_iters; ++it) {
    VectorXd pg = g;
    for (Index i = 0; i < pg.size(); ++i)
      if ((r.x(i) <= lo(i) && pg(i) < 0.0) || (r.x(i) >= hi(i) && pg(i) > 0.0)) pg(i) = 0.0;
    const double norm = pg.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    const VectorXd dir = pg / norm;

    bool accepted = false;
    VectorXd x1;
    VectorXd g1(r.x.size());
    double f1 = 0.0;
    for (int bt = 0; bt < settings.max_backtracks; ++bt) {
      x1 = project(r.x + step * dir);
      f1 = objective(x1, g1);
      if (std::isfinite(f1) && f1 >= r.value + settings.armijo_c * g.dot(x1 - r.x)) {
        accepted = true;
        break;
      }
      step *= settings.shrink;
    }
    r.iterations = it + 1;
    if (!accepted) break;
    const double change = f1 - r.value;
    r.x = x1;
    r.value = f1;
    g = g1;
    if (std::abs(change) < settings.tol * value_scale) break;
    step = std::min(step * 2.0, settings.max_step);
  }
  return r;
}

SpectralBasis basis_for(const PointCloud& cloud, double epsilon, int K, CovarianceMode mode, EigenSolverKind solver) {
  const KernelGraph graph = build_graph(cloud.points(), epsilon);
  SpectralBasis basis = eigendecompose(graph, K, solver);
  if (mode == CovarianceMode::manifold) {
    if (!cloud.intrinsic_dim()) throw ConfigError("manifold mode needs the intrinsic dimension of the data");
    basis = density_normalize(basis, ball_counts(cloud.points(), epsilon), *cloud.intrinsic_dim());
  }
  return basis;
}

FitReport fit(const PointCloud& cloud, const SearchConfig& search) {
  search.validate();
  const Index m = cloud.labeled_count();
  if (m < 1) throw ValidationError("fit needs at least one labeled point");
  const int k_max = *std::max_element(search.k_grid.begin(), search.k_grid.end());
  if (k_max > cloud.size()) throw ConfigError("k_grid exceeds the number of points");
  if (search.mode == CovarianceMode::manifold && !cloud.intrinsic_dim())
    throw ConfigError("manifold mode needs the intrinsic dimension of the data");

  const VectorXd& y = cloud.responses();
  const double factor = form_factor(search.likelihood_form);
  const VectorXd lo = (VectorXd(2) << std::log(search.t_bounds[0]), 0.5 * std::log(search.sigma2_bounds[0])).finished();
  const VectorXd hi = (VectorXd(2) << std::log(search.t_bounds[1]), 0.5 * std::log(search.sigma2_bounds[1])).finished();
  const double sigma2_start = std::clamp(0.5 * sample_variance(y), search.sigma2_bounds[0], search.sigma2_bounds[1]);

  FitReport report;
  bool have_best = false;
  for (std::size_t ei = 0; ei < search.eps2_grid.size(); ++ei) {
    const double epsilon = std::sqrt(search.eps2_grid[ei]);
    const SpectralBasis basis = basis_for(cloud, epsilon, k_max, search.mode, search.solver);
    const SpectralFeatures features = spectral_features(basis, search.mode);
    const MatrixXd labeled = features.features.topRows(m);

    for (std::size_t ki = 0; ki < search.k_grid.size(); ++ki) {
      const int K = search.k_grid[ki];
      const LowRankLikelihood lik(labeled.leftCols(K), features.mu.head(K), features.scale, y);
      auto objective = [&](const VectorXd& x, VectorXd& grad) {
        const double t = std::exp(x(0));
        const double sigma = std::exp(x(1));
        const auto v = lik.evaluate(t, sigma);
        grad.resize(2);
        grad << factor * t * v.d_t, factor * sigma * v.d_sigma;
        return apply_form(v.logml, m, search.likelihood_form);
      };

      std::mt19937_64 rng(mix(search.seed ^ mix((static_cast<std::uint64_t>(ei) << 32) | ki)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double mu_last = features.mu(K - 1);
      const double t_start = std::clamp(mu_last > 0.0 ? 1.0 / mu_last : search.t_bounds[1], search.t_bounds[0], search.t_bounds[1]);
      for (int s = 0; s < search.multistarts; ++s) {
        VectorXd x0(2);
        if (s == 0) {
          x0 << std::log(t_start), 0.5 * std::log(sigma2_start);
        } else {
          x0 << lo(0) + unit(rng) * (hi(0) - lo(0)), lo(1) + unit(rng) * (hi(1) - lo(1));
        }
        const AscentResult r = projected_ascent(objective, x0, lo, hi, search.optimizer, factor);
        TraceEntry e;
        e.params = Hyperparams{epsilon, K, std::exp(r.x(0)), std::exp(r.x(1)), search.mode};
        e.logml = r.value;
        report.trace.push_back(e);
        if (!have_best || e.logml > report.logml || (e.logml == report.logml && lex_less(e.params, report.best))) {
          report.best = e.params;
          report.logml = e.logml;
          have_best = true;
        }
      }
    }
  }
  return report;
}

double baseline_logml(const PointList& labeled, const VectorXd& y, const BaselineParams& p, VectorXd* grad_log) {
  const Index m = y.size();
  if (labeled.rows() != m) throw ValidationError("labeled points do not match responses");
  if (m == 0) throw ValidationError("marginal likelihood needs at least one labeled point");
  const MatrixXd d2 = squared_distances(labeled, labeled);
  const MatrixXd kse = p.amplitude * (d2 / (-p.rho * p.rho)).array().exp().matrix();
  const NoisyFactor f = factor_with_jitter(kse, p.sigma_noise);
  const VectorXd alpha = f.llt.solve(y);
  const double logdet = 2.0 * f.llt.matrixLLT().diagonal().array().log().sum();
  const double value = -0.5 * y.dot(alpha) - 0.5 * logdet - static_cast<double>(m) * kHalfLog2Pi;
  if (grad_log) {
    const MatrixXd kinv = f.llt.solve(MatrixXd::Identity(m, m));
    const MatrixXd drho = kse.cwiseProduct(d2) * (2.0 / (p.rho * p.rho));
    grad_log->resize(3);
    (*grad_log)(0) = 0.5 * alpha.dot(kse * alpha) - 0.5 * kinv.cwiseProduct(kse).sum();
    (*grad_log)(1) = 0.5 * alpha.dot(drho * alpha) - 0.5 * kinv.cwiseProduct(drho).sum();
    (*grad_log)(2) = p.sigma_noise * p.sigma_noise * (alpha.squaredNorm() - kinv.trace());
  }
  return value;
}

BaselineFitReport fit_baseline(const PointCloud& cloud, const SearchConfig& search) {
  search.validate();
  const Index m = cloud.labeled_count();
  if (m < 1) throw ValidationError("fit needs at least one labeled point");
  const PointList labeled = cloud.points().topRows(m);
  const VectorXd& y = cloud.responses();
  const double factor = form_factor(search.likelihood_form);
  const auto& b = search.baseline;
  const VectorXd lo = (VectorXd(3) << std::log(b.amp_bounds[0]), 0.5 * std::log(b.rho2_bounds[0]),
                       0.5 * std::log(search.sigma2_bounds[0])).finished();
  const VectorXd hi = (VectorXd(3) << std::log(b.amp_bounds[1]), 0.5 * std::log(b.rho2_bounds[1]),
                       0.5 * std::log(search.sigma2_bounds[1])).finished();
  const double sigma2_start = std::clamp(0.5 * sample_variance(y), search.sigma2_bounds[0], search.sigma2_bounds[1]);

  auto objective = [&](const VectorXd& x, VectorXd& grad) {
    const BaselineParams p{std::exp(x(0)), std::exp(x(1)), std::exp(x(2))};
    const double v = baseline_logml(labeled, y, p, &grad);
    grad *= factor;
    return apply_form(v, m, search.likelihood_form);
  };

  BaselineFitReport report;
  bool have_best = false;
  for (double amp : b.amp_grid) {
    for (double rho2 : b.rho2_grid) {
      VectorXd x0(3);
      x0 << std::log(amp), 0.5 * std::log(rho2), 0.5 * std::log(sigma2_start);
      const AscentResult r = projected_ascent(objective, x0, lo, hi, search.optimizer, factor);
      BaselineTraceEntry e{BaselineParams{std::exp(r.x(0)), std::exp(r.x(1)), std::exp(r.x(2))}, r.value};
      report.trace.push_back(e);
      const auto key = [](const BaselineParams& p) { return std::tie(p.amplitude, p.rho, p.sigma_noise); };
      if (!have_best || e.logml > report.logml || (e.logml == report.logml && key(e.params) < key(report.best))) {
        report.best = e.params;
        report.logml = e.logml;
        have_best = true;
      }
    }
  }
  return report;
}

GridEvaluation grid_evaluate(const PointCloud& cloud, const GridSpec& spec) {
  if (spec.eps2_grid.empty() || spec.k_grid.empty() || spec.t_grid.empty() || spec.sigma2_grid.empty())
    throw ConfigError("grid evaluation needs non-empty grids");
  const Index m = cloud.labeled_count();
  if (m < 1) throw ValidationError("grid evaluation needs at least one labeled point");
  const int k_max = *std::max_element(spec.k_grid.begin(), spec.k_grid.end());
  if (k_max > cloud.size() || *std::min_element(spec.k_grid.begin(), spec.k_grid.end()) < 1)
    throw ConfigError("k_grid out of range");

  GridEvaluation out;
  out.cells.reserve(spec.eps2_grid.size() * spec.k_grid.size() * spec.t_grid.size() * spec.sigma2_grid.size());
  for (double eps2 : spec.eps2_grid) {
    if (!(eps2 > 0.0)) throw ConfigError("eps2_grid entries must be positive");
    const SpectralBasis basis = basis_for(cloud, std::sqrt(eps2), k_max, spec.mode, spec.solver);
    const SpectralFeatures features = spectral_features(basis, spec.mode);
    const MatrixXd labeled = features.features.topRows(m);
    for (int K : spec.k_grid) {
      const LowRankLikelihood lik(labeled.leftCols(K), features.mu.head(K), features.scale, cloud.responses());
      for (double t : spec.t_grid)
        for (double s2 : spec.sigma2_grid)
          out.cells.push_back(GridCell{eps2, K, t, s2, apply_form(lik.evaluate(t, std::sqrt(s2)).logml, m, spec.form)});
    }
  }
  const auto key = [](const GridCell& c) { return std::tie(c.eps2, c.K, c.t, c.sigma2); };
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    const GridCell& c = out.cells[i];
    const GridCell& b = out.cells[out.best];
    if (c.logml > b.logml || (c.logml == b.logml && key(c) < key(b))) out.best = i;
  }
  return out;
}

}  // namespace glgp
