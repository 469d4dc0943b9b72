#include "glgp/pointcloud.hpp"

#include "glgp/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace glgp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "not a number: '" + field + "'");
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

PointCloud::PointCloud(PointList points, VectorXd responses, std::optional<int> intrinsic_dim)
    : points_(std::move(points)), responses_(std::move(responses)), intrinsic_dim_(intrinsic_dim) {
  if (points_.cols() < 1) throw ValidationError("point cloud needs ambient dimension >= 1");
  if (points_.rows() < 2) throw ValidationError("point cloud needs at least two points, got " + std::to_string(points_.rows()));
  if (responses_.size() > points_.rows()) throw ValidationError("more responses than points");
  if (!points_.allFinite()) throw ValidationError("non-finite point coordinate");
  if (!responses_.allFinite()) throw ValidationError("non-finite response");
  if (intrinsic_dim_ && *intrinsic_dim_ < 1) throw ValidationError("intrinsic dimension must be positive");
}

PointCloud PointCloud::with_intrinsic_dim(std::optional<int> d) const { return PointCloud(points_, responses_, d); }

bool PointCloud::operator==(const PointCloud& other) const {
  return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
         points_ == other.points_ && responses_.size() == other.responses_.size() &&
         responses_ == other.responses_ && intrinsic_dim_ == other.intrinsic_dim_;
}

SplitCloud split(const PointCloud& cloud) {
  const Index m = cloud.labeled_count();
  return SplitCloud{LabeledPart{cloud.points().topRows(m), cloud.responses()},
                    cloud.points().bottomRows(cloud.unlabeled_count())};
}

PointCloud parse_csv(const std::string& text, std::vector<std::size_t>* source_rows) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.size() < 3 || header[header.size() - 2] != "y" || header.back() != "labeled")
    throw ParseError(line_no == 0 ? 1 : line_no, "header must be x0,...,x{D-1},y,labeled");
  const std::size_t dim = header.size() - 2;

  struct Row {
    std::vector<double> x;
    double y;
    bool labeled;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    Row row;
    row.x.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) row.x.push_back(parse_number(fields[k], line_no));
    const std::string& flag = fields.back();
    if (flag == "1") row.labeled = true;
    else if (flag == "0") row.labeled = false;
    else throw ParseError(line_no, "labeled must be 0 or 1, got '" + flag + "'");
    const std::string& yfield = fields[dim];
    if (row.labeled) {
      if (yfield.empty()) throw ValidationError("line " + std::to_string(line_no) + ": labeled row has no y");
      row.y = parse_number(yfield, line_no);
      if (!std::isfinite(row.y)) throw ValidationError("line " + std::to_string(line_no) + ": labeled row has non-finite y");
    } else {
      row.y = 0.0;
      if (!yfield.empty()) parse_number(yfield, line_no);
    }
    for (double c : row.x)
      if (!std::isfinite(c)) throw ParseError(line_no, "non-finite coordinate");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("empty input: no data rows");

  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_partition(order.begin(), order.end(), [&](std::size_t i) { return rows[i].labeled; });
  const auto m = static_cast<Index>(std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.labeled; }));

  PointList pts(static_cast<Index>(rows.size()), static_cast<Index>(dim));
  VectorXd y(m);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Row& r = rows[order[k]];
    for (std::size_t c = 0; c < dim; ++c) pts(static_cast<Index>(k), static_cast<Index>(c)) = r.x[c];
    if (static_cast<Index>(k) < m) y(static_cast<Index>(k)) = r.y;
  }
  if (source_rows) *source_rows = order;
  return PointCloud(std::move(pts), std::move(y));
}

PointCloud load_csv(const std::filesystem::path& path, std::vector<std::size_t>* source_rows) {
  return parse_csv(read_file(path), source_rows);
}

std::string format_csv(const PointCloud& cloud) {
  std::string out;
  for (Index c = 0; c < cloud.dim(); ++c) out += "x" + std::to_string(c) + ",";
  out += "y,labeled\n";
  for (Index i = 0; i < cloud.size(); ++i) {
    for (Index c = 0; c < cloud.dim(); ++c) out += format_double(cloud.points()(i, c)) + ",";
    const bool labeled = i < cloud.labeled_count();
    if (labeled) out += format_double(cloud.responses()(i));
    out += labeled ? ",1\n" : ",0\n";
  }
  return out;
}

void save_csv(const PointCloud& cloud, const std::filesystem::path& path) { write_file(path, format_csv(cloud)); }

PointList load_points_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  std::size_t dim = 0;
  while (dim < header.size() && header[dim] == "x" + std::to_string(dim)) ++dim;
  if (dim == 0) throw ParseError(line_no == 0 ? 1 : line_no, "header must start with x0");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    std::vector<double> x;
    for (std::size_t k = 0; k < dim; ++k) x.push_back(parse_number(fields[k], line_no));
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw ValidationError("empty input: no data rows");
  PointList pts(static_cast<Index>(rows.size()), static_cast<Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < dim; ++c) pts(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  if (!pts.allFinite()) throw ValidationError("non-finite coordinate");
  return pts;
}

nlohmann::json to_json(const PointCloud& cloud) {
  nlohmann::json j;
  j["schema"] = 1;
  j["dim"] = cloud.dim();
  nlohmann::json pts = nlohmann::json::array();
  for (Index i = 0; i < cloud.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < cloud.dim(); ++c) row.push_back(cloud.points()(i, c));
    pts.push_back(std::move(row));
  }
  j["points"] = std::move(pts);
  j["responses"] = std::vector<double>(cloud.responses().data(), cloud.responses().data() + cloud.responses().size());
  j["labeled_count"] = cloud.labeled_count();
  if (cloud.intrinsic_dim()) j["intrinsic_dim"] = *cloud.intrinsic_dim();
  return j;
}

PointCloud cloud_from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dim").get<Index>();
    const auto& pts = j.at("points");
    const auto y = j.at("responses").get<std::vector<double>>();
    const auto m = j.at("labeled_count").get<Index>();
    if (static_cast<Index>(y.size()) != m) throw ValidationError("responses length differs from labeled_count");
    if (pts.empty()) throw ValidationError("empty input: no points");
    PointList p(static_cast<Index>(pts.size()), dim);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (static_cast<Index>(pts[i].size()) != dim)
        throw ValidationError("point " + std::to_string(i) + " has wrong dimension");
      for (Index c = 0; c < dim; ++c) p(static_cast<Index>(i), c) = pts[i][static_cast<std::size_t>(c)].get<double>();
    }
    std::optional<int> d;
    if (j.contains("intrinsic_dim") && !j["intrinsic_dim"].is_null()) d = j["intrinsic_dim"].get<int>();
    return PointCloud(std::move(p), Eigen::Map<const VectorXd>(y.data(), static_cast<Index>(y.size())), d);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed point cloud JSON: ") + e.what());
  }
}

PointCloud load_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
  return cloud_from_json(j);
}

void save_json(const PointCloud& cloud, const std::filesystem::path& path) { write_file(path, to_json(cloud).dump(1)); }

PointCloud load_cloud(const std::filesystem::path& path, std::vector<std::size_t>* source_rows) {
  if (path.extension() == ".json") {
    PointCloud c = load_json(path);
    if (source_rows) {
      source_rows->resize(static_cast<std::size_t>(c.size()));
      for (std::size_t i = 0; i < source_rows->size(); ++i) (*source_rows)[i] = i;
    }
    return c;
  }
  return load_csv(path, source_rows);
}

}  // namespace glgp
