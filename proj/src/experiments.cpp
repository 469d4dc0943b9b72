#include "glgp/experiments.hpp"

#include "glgp/error.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace glgp {

namespace {

constexpr double kPi = std::numbers::pi;

const Eigen::Vector3d kRightCenter(1.2, 0.0, 2.0);
const Eigen::Vector3d kLeftCenter(-1.2, 0.0, 2.0);
const Eigen::Vector3d kRightFoot(1.2, 0.0, 1.0);
const Eigen::Vector3d kLeftFoot(-1.2, 0.0, 1.0);

double segment_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& end) {
  const double s = std::clamp(x.dot(end) / end.squaredNorm(), 0.0, 1.0);
  return (x - s * end).norm();
}

double polar_angle(const Eigen::Vector3d& x, const Eigen::Vector3d& center, double pole_z) {
  const Eigen::Vector3d u = (x - center).normalized();
  return std::acos(std::clamp(u.z() * pole_z, -1.0, 1.0));
}

PointCloud assemble(const std::vector<VectorXd>& points, const VectorXd& y, std::optional<int> d) {
  PointList p(static_cast<Index>(points.size()), points.front().size());
  for (Index i = 0; i < p.rows(); ++i) p.row(i) = points[static_cast<std::size_t>(i)].transpose();
  return PointCloud(std::move(p), y, d);
}

VectorXd noisy(const VectorXd& truth, Index m, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  VectorXd y = truth.head(m);
  for (Index i = 0; i < m; ++i) y(i) += noise(rng);
  return y;
}

VectorXd baseline_predict(const PointList& labeled, const VectorXd& y, const BaselineParams& p, const PointList& query) {
  const MatrixXd cov_ff = sqexp_covariance(labeled, labeled, p.amplitude, p.rho);
  const MatrixXd cov_qf = sqexp_covariance(query, labeled, p.amplitude, p.rho);
  return condition(cov_ff, cov_qf, y, p.sigma_noise, VectorXd::Constant(query.rows(), p.amplitude)).mean;
}

Dataset spiral_dataset(const VectorXd& theta, Index m, double noise_sigma, std::mt19937_64& rng) {
  std::vector<VectorXd> pts;
  VectorXd truth(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    pts.push_back(spiral_point(theta(i)));
    truth(i) = spiral_function(theta(i));
  }
  return Dataset{assemble(pts, noisy(truth, m, noise_sigma, rng), 1), truth, theta};
}

std::vector<double> grid(double first, double step, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(first + step * i);
  return g;
}

std::vector<int> k_range(int lo, int hi) {
  std::vector<int> k;
  for (int i = lo; i <= hi; ++i) k.push_back(i);
  return k;
}

}  // namespace

std::string_view to_string(ExperimentName name) {
  switch (name) {
    case ExperimentName::two_balloons: return "two_balloons";
    case ExperimentName::spiral: return "spiral";
    case ExperimentName::square: return "square";
    default: return "nystrom_spiral";
  }
}

ExperimentName experiment_from_string(std::string_view s) {
  if (s == "two_balloons") return ExperimentName::two_balloons;
  if (s == "spiral") return ExperimentName::spiral;
  if (s == "square") return ExperimentName::square;
  if (s == "nystrom_spiral") return ExperimentName::nystrom_spiral;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

ExperimentSpec ExperimentSpec::defaults(ExperimentName name, std::uint64_t seed) {
  switch (name) {
    case ExperimentName::two_balloons: return {name, seed, 66, 2200, 0, 1.0};
    case ExperimentName::spiral: return {name, seed, 60, 1500, 0, 1.0};
    case ExperimentName::square: return {name, seed, 50, 1000, 0, 0.5};
    default: return {name, seed, 60, 1500, 299, 1.0};
  }
}

double balloon_distance(const Eigen::Ref<const VectorXd>& xv) {
  if (xv.size() != 3) throw ValidationError("two-balloons points are three-dimensional");
  const Eigen::Vector3d x = xv;
  const double foot = kRightFoot.norm();
  const double off_right = std::abs((x - kRightCenter).norm() - 1.0);
  const double off_left = std::abs((x - kLeftCenter).norm() - 1.0);
  const double off_rseg = segment_distance(x, kRightFoot);
  const double off_lseg = segment_distance(x, kLeftFoot);
  const double best = std::min({off_left, off_lseg, off_rseg, off_right});
  if (off_left == best) return polar_angle(x, kLeftCenter, 1.0);
  if (off_lseg == best) return kPi + (x - kLeftFoot).norm();
  if (off_rseg == best) return kPi + foot + x.norm();
  return kPi + 2.0 * foot + polar_angle(x, kRightCenter, -1.0);
}

VectorXd spiral_point(double theta) {
  const double r = std::pow(theta + 4.0, 0.7);
  return (VectorXd(2) << r * std::cos(theta), r * std::sin(theta)).finished();
}

double spiral_function(double theta) {
  return 3.0 * std::sin(theta / 10.0) + 3.0 * std::cos(theta / 2.0) + 4.0 * std::sin(4.0 * theta / 5.0);
}

double square_function(double theta, double phi) { return 6.0 * std::sin(2.0 * theta) * std::cos(2.0 * phi); }

Dataset gen_two_balloons(std::uint64_t seed, Index sphere_labeled, Index segment_labeled, Index sphere_unlabeled,
                         Index segment_unlabeled, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_side = [&](Index n_sphere, Index n_segment) {
    std::vector<VectorXd> side;
    for (Index i = 0; i < n_sphere; ++i) {
      Eigen::Vector3d g;
      do {
        g = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
      } while (g.norm() == 0.0);
      side.push_back(kRightCenter + g.normalized());
    }
    for (Index i = 0; i < n_segment; ++i) side.push_back(unit(rng) * kRightFoot);
    return side;
  };
  std::vector<VectorXd> pts;
  for (const auto& [n_sphere, n_segment] : {std::pair{sphere_labeled, segment_labeled}, std::pair{sphere_unlabeled, segment_unlabeled}}) {
    const auto side = sample_side(n_sphere, n_segment);
    pts.insert(pts.end(), side.begin(), side.end());
    for (VectorXd p : side) {
      p(0) = -p(0);
      pts.push_back(p);
    }
  }
  if (pts.empty()) throw ValidationError("two-balloons sample is empty");
  VectorXd truth(static_cast<Index>(pts.size()));
  for (Index i = 0; i < truth.size(); ++i) truth(i) = 5.0 * balloon_distance(pts[static_cast<std::size_t>(i)]);
  const Index m = 2 * (sphere_labeled + segment_labeled);
  return Dataset{assemble(pts, noisy(truth, m, noise_sigma, rng), std::nullopt), truth, {}};
}

Dataset gen_spiral(std::uint64_t seed, Index n_labeled, Index n_unlabeled, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 8.0 * kPi);
  VectorXd theta(n_labeled + n_unlabeled);
  for (Index i = 0; i < theta.size(); ++i) theta(i) = angle(rng);
  return spiral_dataset(theta, n_labeled, noise_sigma, rng);
}

Dataset gen_square(std::uint64_t seed, Index n_labeled, Index n_unlabeled, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> side(0.0, kPi);
  std::vector<VectorXd> pts;
  VectorXd truth(n_labeled + n_unlabeled);
  for (Index i = 0; i < truth.size(); ++i) {
    const double a = side(rng);
    const double b = side(rng);
    pts.push_back((VectorXd(2) << a, b).finished());
    truth(i) = square_function(a, b);
  }
  return Dataset{assemble(pts, noisy(truth, n_labeled, noise_sigma, rng), 2), truth, {}};
}

NystromDataset gen_nystrom_spiral(std::uint64_t seed, Index n_labeled, Index n_unlabeled, Index n_base_unlabeled,
                                  double noise_sigma) {
  if (n_base_unlabeled > n_unlabeled) throw ValidationError("base subset larger than the unlabeled set");
  NystromDataset out{gen_spiral(seed, n_labeled, n_unlabeled, noise_sigma), Dataset{PointCloud(PointList::Zero(2, 2), {}), {}, {}}, {}};
  std::vector<Index> pool(static_cast<std::size_t>(n_unlabeled));
  for (Index i = 0; i < n_unlabeled; ++i) pool[static_cast<std::size_t>(i)] = n_labeled + i;
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::vector<Index> chosen;
  std::sample(pool.begin(), pool.end(), std::back_inserter(chosen), n_base_unlabeled, rng);
  std::sort(chosen.begin(), chosen.end());
  for (Index i = 0; i < n_labeled; ++i) out.base_indices.push_back(i);
  out.base_indices.insert(out.base_indices.end(), chosen.begin(), chosen.end());

  const Index nb = static_cast<Index>(out.base_indices.size());
  PointList pts(nb, 2);
  VectorXd truth(nb), theta(nb);
  for (Index r = 0; r < nb; ++r) {
    const Index src = out.base_indices[static_cast<std::size_t>(r)];
    pts.row(r) = out.full.cloud.points().row(src);
    truth(r) = out.full.truth(src);
    theta(r) = out.full.coordinate(src);
  }
  out.base = Dataset{PointCloud(std::move(pts), out.full.cloud.responses(), 1), truth, theta};
  return out;
}

Dataset generate(const ExperimentSpec& spec) {
  switch (spec.name) {
    case ExperimentName::two_balloons: {
      if (spec.n_labeled % 2 != 0 || spec.n_unlabeled % 2 != 0)
        throw ValidationError("two-balloons counts must be even (the sample is mirrored)");
      const Index lab = spec.n_labeled / 2, unl = spec.n_unlabeled / 2;
      const Index seg_lab = lab / 11, seg_unl = unl / 11;
      return gen_two_balloons(spec.seed, lab - seg_lab, seg_lab, unl - seg_unl, seg_unl, spec.noise_sigma);
    }
    case ExperimentName::spiral: return gen_spiral(spec.seed, spec.n_labeled, spec.n_unlabeled, spec.noise_sigma);
    case ExperimentName::square: return gen_square(spec.seed, spec.n_labeled, spec.n_unlabeled, spec.noise_sigma);
    default:
      return gen_nystrom_spiral(spec.seed, spec.n_labeled, spec.n_unlabeled, spec.n_base_unlabeled, spec.noise_sigma).base;
  }
}

double rmse(const VectorXd& predicted, const VectorXd& truth) {
  if (predicted.size() != truth.size()) throw ValidationError("rmse: length mismatch");
  if (predicted.size() == 0) throw ValidationError("rmse: empty input");
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(predicted.size()));
}

SearchConfig default_search(ExperimentName name) {
  SearchConfig c = SearchConfig::defaults();
  switch (name) {
    case ExperimentName::two_balloons:
      break;
    case ExperimentName::spiral:
      c.eps2_grid = grid(0.04, 0.02, 9);
      c.k_grid = k_range(1, 35);
      c.mode = CovarianceMode::general;
      break;
    case ExperimentName::square:
      c.eps2_grid = grid(0.1, 0.05, 11);
      c.k_grid = k_range(1, 35);
      c.mode = CovarianceMode::general;
      break;
    case ExperimentName::nystrom_spiral:
      c.eps2_grid = grid(0.05, 0.02, 10);
      c.k_grid = k_range(1, 35);
      c.t_bounds = {0.01, 100.0};
      c.mode = CovarianceMode::general;
      break;
  }
  return c;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const SearchConfig& search) {
  ExperimentResult r;
  r.spec = spec;
  if (spec.name == ExperimentName::nystrom_spiral) {
    const NystromDataset nd =
        gen_nystrom_spiral(spec.seed, spec.n_labeled, spec.n_unlabeled, spec.n_base_unlabeled, spec.noise_sigma);
    const PointCloud& base = nd.base.cloud;
    const Index m = base.labeled_count();
    const GlgpModel model = train(base, search, &r.fit_glgp);
    r.rmse_glgp = rmse(model.base_mean.tail(base.unlabeled_count()), nd.base.truth.tail(base.unlabeled_count()));

    const Index q = nd.full.cloud.unlabeled_count();
    r.query_points = nd.full.cloud.points().bottomRows(q);
    r.truth = nd.full.truth.tail(q);
    r.glgp_mean = predict_new(model, r.query_points).mean;
    r.rmse_extension = rmse(r.glgp_mean, r.truth);

    r.fit_baseline = fit_baseline(base, search);
    const PointList labeled = base.points().topRows(m);
    r.baseline_mean = baseline_predict(labeled, base.responses(), r.fit_baseline.best, r.query_points);
    r.rmse_baseline = rmse(r.baseline_mean, r.truth);
    r.rmse_baseline_base = rmse(baseline_predict(labeled, base.responses(), r.fit_baseline.best,
                                                 base.points().bottomRows(base.unlabeled_count())),
                                nd.base.truth.tail(base.unlabeled_count()));
  } else {
    const Dataset ds = generate(spec);
    const PointCloud& cloud = ds.cloud;
    const Index m = cloud.labeled_count();
    const Index q = cloud.unlabeled_count();
    const GlgpModel model = train(cloud, search, &r.fit_glgp);
    r.query_points = cloud.points().bottomRows(q);
    r.truth = ds.truth.tail(q);
    r.glgp_mean = model.base_mean.tail(q);
    r.rmse_glgp = rmse(r.glgp_mean, r.truth);

    r.fit_baseline = fit_baseline(cloud, search);
    r.baseline_mean = baseline_predict(cloud.points().topRows(m), cloud.responses(), r.fit_baseline.best, r.query_points);
    r.rmse_baseline = rmse(r.baseline_mean, r.truth);
  }
  r.fit_glgp.rmse = r.rmse_extension ? *r.rmse_extension : r.rmse_glgp;
  r.fit_baseline.rmse = r.rmse_baseline;
  return r;
}

nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["experiment"] = std::string(to_string(r.spec.name));
  j["seed"] = r.spec.seed;
  j["counts"] = {{"labeled", r.spec.n_labeled}, {"unlabeled", r.spec.n_unlabeled}};
  if (r.spec.name == ExperimentName::nystrom_spiral) j["counts"]["base_unlabeled"] = r.spec.n_base_unlabeled;
  j["noise_sigma"] = r.spec.noise_sigma;
  const Hyperparams& b = r.fit_glgp.best;
  j["glgp"] = {{"epsilon", b.epsilon},           {"eps2", b.epsilon * b.epsilon},
               {"K", b.K},                       {"t", b.t},
               {"sigma_noise", b.sigma_noise},   {"sigma2", b.sigma_noise * b.sigma_noise},
               {"mode", std::string(to_string(b.mode))}, {"logml", r.fit_glgp.logml},
               {"evaluated_cells", r.fit_glgp.trace.size()}};
  const BaselineParams& p = r.fit_baseline.best;
  j["baseline"] = {{"amplitude", p.amplitude}, {"rho", p.rho}, {"rho2", p.rho * p.rho}, {"sigma_noise", p.sigma_noise},
                   {"sigma2", p.sigma_noise * p.sigma_noise}, {"logml", r.fit_baseline.logml}};
  j["rmse_glgp"] = r.rmse_glgp;
  j["rmse_baseline"] = r.rmse_baseline;
  if (r.rmse_extension) j["rmse_extension"] = *r.rmse_extension;
  if (r.rmse_baseline_base) j["rmse_baseline_base"] = *r.rmse_baseline_base;
  return j;
}

void save_result_table_csv(const ExperimentResult& r, const std::filesystem::path& path) {
  std::ostringstream os;
  for (Index c = 0; c < r.query_points.cols(); ++c) os << 'x' << c << ',';
  os << "truth,glgp,baseline\n";
  for (Index i = 0; i < r.query_points.rows(); ++i) {
    for (Index c = 0; c < r.query_points.cols(); ++c) os << format_double(r.query_points(i, c)) << ',';
    os << format_double(r.truth(i)) << ',' << format_double(r.glgp_mean(i)) << ',' << format_double(r.baseline_mean(i))
       << '\n';
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << os.str();
}

MeanSd mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

ReplicationSummary replicate(ExperimentName name, std::uint64_t first_seed, int replicates, const SearchConfig& search,
                             int threads) {
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  ReplicationSummary s;
  s.name = name;
  s.results.resize(static_cast<std::size_t>(replicates));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < replicates; i = next++) {
      try {
        s.results[static_cast<std::size_t>(i)] =
            run_experiment(ExperimentSpec::defaults(name, first_seed + static_cast<std::uint64_t>(i)), search);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, replicates);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> g, b, e;
  for (const auto& r : s.results) {
    g.push_back(r.rmse_glgp);
    b.push_back(r.rmse_baseline);
    if (r.rmse_extension) e.push_back(*r.rmse_extension);
  }
  s.glgp = mean_sd(g);
  s.baseline = mean_sd(b);
  if (!e.empty()) s.extension = mean_sd(e);
  return s;
}

nlohmann::json to_json(const ReplicationSummary& s) {
  nlohmann::json j;
  j["schema"] = 1;
  j["experiment"] = std::string(to_string(s.name));
  j["replicates"] = s.results.size();
  j["rmse_glgp"] = s.glgp.mean;
  j["rmse_glgp_sd"] = s.glgp.sd;
  j["rmse_baseline"] = s.baseline.mean;
  j["rmse_baseline_sd"] = s.baseline.sd;
  if (s.extension) {
    j["rmse_extension"] = s.extension->mean;
    j["rmse_extension_sd"] = s.extension->sd;
  }
  j["results"] = nlohmann::json::array();
  for (const auto& r : s.results) j["results"].push_back(to_json(r));
  return j;
}

}  // namespace glgp
