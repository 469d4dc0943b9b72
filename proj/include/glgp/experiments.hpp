#pragma once

#include "glgp/model.hpp"

#include <cstdint>
#include <string_view>

namespace glgp {

enum class ExperimentName { two_balloons, spiral, square, nystrom_spiral };

std::string_view to_string(ExperimentName name);
ExperimentName experiment_from_string(std::string_view s);

struct ExperimentSpec {
  ExperimentName name = ExperimentName::spiral;
  std::uint64_t seed = 0;
  Index n_labeled = 0;
  Index n_unlabeled = 0;
  Index n_base_unlabeled = 0;  ///< nystrom_spiral only: unlabeled points kept in the base graph
  double noise_sigma = 1.0;

  static ExperimentSpec defaults(ExperimentName name, std::uint64_t seed = 0);
};

/// Labeled-first cloud plus the noiseless regression function at every point.
struct Dataset {
  PointCloud cloud;
  VectorXd truth;
  VectorXd coordinate;  ///< curve parameter theta for the spirals, empty otherwise
};

/// Intrinsic distance to the north pole (-1.2, 0, 3) of the left sphere, for a
/// point of the two-balloons set. The piece is chosen as the nearest of the
/// two spheres and two segments.
double balloon_distance(const Eigen::Ref<const VectorXd>& x);

VectorXd spiral_point(double theta);
double spiral_function(double theta);
double square_function(double theta, double phi);

/// Per side: `sphere_labeled` + `segment_labeled` labeled and `sphere_unlabeled`
/// + `segment_unlabeled` unlabeled points, sampled on the right sphere and its
/// segment, then mirrored through x0 -> -x0.
Dataset gen_two_balloons(std::uint64_t seed, Index sphere_labeled = 30, Index segment_labeled = 3,
                         Index sphere_unlabeled = 1000, Index segment_unlabeled = 100, double noise_sigma = 1.0);
Dataset gen_spiral(std::uint64_t seed, Index n_labeled = 60, Index n_unlabeled = 1500, double noise_sigma = 1.0);
Dataset gen_square(std::uint64_t seed, Index n_labeled = 50, Index n_unlabeled = 1000, double noise_sigma = 0.5);

struct NystromDataset {
  Dataset full;                       ///< labeled + all unlabeled points
  Dataset base;                       ///< labeled + the sampled subset
  std::vector<Index> base_indices;    ///< rows of `full` kept in `base`, labeled rows included
};

NystromDataset gen_nystrom_spiral(std::uint64_t seed, Index n_labeled = 60, Index n_unlabeled = 1500,
                                  Index n_base_unlabeled = 299, double noise_sigma = 1.0);

/// Dataset for any non-Nystrom spec; for nystrom_spiral the base dataset.
Dataset generate(const ExperimentSpec& spec);

double rmse(const VectorXd& predicted, const VectorXd& truth);

/// Search grid used for each experiment.
SearchConfig default_search(ExperimentName name);

struct ExperimentResult {
  ExperimentSpec spec;
  FitReport fit_glgp;
  BaselineFitReport fit_baseline;
  double rmse_glgp = 0.0;      ///< at the unlabeled points of the fitted cloud
  double rmse_baseline = 0.0;  ///< at the evaluation points of the baseline
  std::optional<double> rmse_extension;      ///< nystrom_spiral: at all unlabeled points
  std::optional<double> rmse_baseline_base;  ///< nystrom_spiral: baseline at the base unlabeled points

  // Per-point table over the evaluation points (all unlabeled points).
  PointList query_points;
  VectorXd truth;
  VectorXd glgp_mean;      ///< Nystrom prediction for nystrom_spiral
  VectorXd baseline_mean;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const SearchConfig& search);

nlohmann::json to_json(const ExperimentResult& r);
void save_result_table_csv(const ExperimentResult& r, const std::filesystem::path& path);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};
MeanSd mean_sd(const std::vector<double>& v);

struct ReplicationSummary {
  ExperimentName name = ExperimentName::spiral;
  std::vector<ExperimentResult> results;  ///< in seed order
  MeanSd glgp;
  MeanSd baseline;
  std::optional<MeanSd> extension;
};

/// Runs seeds first_seed, first_seed + 1, ... with up to `threads` workers.
ReplicationSummary replicate(ExperimentName name, std::uint64_t first_seed, int replicates, const SearchConfig& search,
                             int threads = 1);

nlohmann::json to_json(const ReplicationSummary& s);

}  // namespace glgp
