#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace glgp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Rows are points, columns are ambient coordinates.
using PointList = MatrixXd;

/// Input points with a labeled-first partition.
///
/// Points x_1..x_m (rows 0..m-1) carry responses; rows m..m+n-1 are unlabeled.
/// Immutable once constructed.
class PointCloud {
 public:
  /// Throws ValidationError unless responses.size() <= points.rows(), the cloud has
  /// at least two points, dim >= 1 and every coordinate and response is finite.
  PointCloud(PointList points, VectorXd responses, std::optional<int> intrinsic_dim = std::nullopt);

  const PointList& points() const noexcept { return points_; }
  const VectorXd& responses() const noexcept { return responses_; }
  Index dim() const noexcept { return points_.cols(); }
  Index size() const noexcept { return points_.rows(); }
  Index labeled_count() const noexcept { return responses_.size(); }
  Index unlabeled_count() const noexcept { return size() - labeled_count(); }
  std::optional<int> intrinsic_dim() const noexcept { return intrinsic_dim_; }

  PointCloud with_intrinsic_dim(std::optional<int> d) const;

  bool operator==(const PointCloud& other) const;

 private:
  PointList points_;
  VectorXd responses_;
  std::optional<int> intrinsic_dim_;
};

struct LabeledPart {
  PointList points;
  VectorXd responses;
};

struct SplitCloud {
  LabeledPart labeled;
  PointList unlabeled;
};

SplitCloud split(const PointCloud& cloud);

/// CSV with header `x0,...,x{D-1},y,labeled`. Labeled rows are moved ahead of
/// unlabeled rows with a stable sort; `source_rows[k]` is the 0-based data row
/// (header excluded) that became point k.
PointCloud load_csv(const std::filesystem::path& path, std::vector<std::size_t>* source_rows = nullptr);
PointCloud parse_csv(const std::string& text, std::vector<std::size_t>* source_rows = nullptr);
void save_csv(const PointCloud& cloud, const std::filesystem::path& path);
std::string format_csv(const PointCloud& cloud);

/// Plain point list CSV (header `x0,...`; extra `y`/`labeled` columns are ignored).
PointList load_points_csv(const std::filesystem::path& path);

nlohmann::json to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const nlohmann::json& j);

PointCloud load_json(const std::filesystem::path& path);
void save_json(const PointCloud& cloud, const std::filesystem::path& path);

/// Dispatches on extension: `.json` or anything else as CSV.
PointCloud load_cloud(const std::filesystem::path& path, std::vector<std::size_t>* source_rows = nullptr);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

}  // namespace glgp
