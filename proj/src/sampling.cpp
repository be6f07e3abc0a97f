#include "conecap/sampling.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "conecap/parallel.hpp"

namespace conecap {

namespace {

constexpr std::uint64_t kDefaultAttemptsPerPoint = 10000;

void append_double(std::string& out, double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

}  // namespace

Eigen::MatrixXd sample_sphere(int n, int count, std::uint64_t seed, int threads) {
  if (n < 2) throw InvalidInputError("sample_sphere: dimension must be at least 2");
  if (count < 1) throw InvalidInputError("sample_sphere: count must be positive");
  Eigen::MatrixXd pts(n, count);
  parallel_for(count, threads, [&](std::int64_t j) {
    RngStream rng(seed, stream_tag::kSpherePoint, static_cast<std::uint64_t>(j));
    pts.col(static_cast<int>(j)) = random_unit(n, rng).coords();
  });
  return pts;
}

ConeCloud sample_cone_cap(const PolyhedralCone& cone, int count,
                          std::uint64_t seed,
                          std::uint64_t max_attempts_per_point, int threads) {
  if (count < 1)
    throw InvalidInputError("sample_cone_cap: count must be positive");
  const std::uint64_t budget =
      max_attempts_per_point == 0 ? kDefaultAttemptsPerPoint : max_attempts_per_point;
  const int n = cone.dim();

  Eigen::MatrixXd pts(n, count);
  std::vector<std::uint64_t> attempts(static_cast<std::size_t>(count), 0);
  std::vector<char> accepted(static_cast<std::size_t>(count), 0);

  parallel_for(count, threads, [&](std::int64_t j) {
    RngStream rng(seed, stream_tag::kCapPoint, static_cast<std::uint64_t>(j));
    std::uint64_t used = 0;
    while (used < budget) {
      ++used;
      const UnitVector cand = random_unit(n, rng);
      if (cone.min_margin(cand.coords()) >= 0.0) {
        pts.col(static_cast<int>(j)) = cand.coords();
        accepted[static_cast<std::size_t>(j)] = 1;
        break;
      }
    }
    attempts[static_cast<std::size_t>(j)] = used;
  });

  const std::uint64_t total_attempts =
      std::accumulate(attempts.begin(), attempts.end(), std::uint64_t{0});
  const int n_ok = static_cast<int>(
      std::count(accepted.begin(), accepted.end(), char{1}));

  if (n_ok < count) {
    ConeCloud partial;
    partial.points.resize(n, n_ok);
    int k = 0;
    for (int j = 0; j < count; ++j)
      if (accepted[static_cast<std::size_t>(j)]) partial.points.col(k++) = pts.col(j);
    partial.measure_estimate =
        total_attempts == 0 ? 0.0 : static_cast<double>(n_ok) / static_cast<double>(total_attempts);
    partial.attempts = total_attempts;
    partial.seed = seed;
    throw LowAcceptanceError(
        "sample_cone_cap: attempt budget exhausted before the cloud filled "
        "(accepted " + std::to_string(n_ok) + " of " + std::to_string(count) + ")",
        std::move(partial));
  }

  ConeCloud cloud;
  cloud.points = std::move(pts);
  cloud.measure_estimate =
      static_cast<double>(count) / static_cast<double>(total_attempts);
  cloud.attempts = total_attempts;
  cloud.seed = seed;
  return cloud;
}

ConeCloud make_cloud(Eigen::MatrixXd points, double measure_estimate) {
  if (points.rows() < 2 || points.cols() < 1)
    throw InvalidInputError("make_cloud: need at least one point in dimension >= 2");
  if (!(measure_estimate > 0.0) || measure_estimate > 1.0)
    throw InvalidInputError("make_cloud: measure estimate must lie in (0, 1]");
  for (int j = 0; j < points.cols(); ++j) {
    const double norm = points.col(j).norm();
    if (std::abs(norm - 1.0) > 1e-9)
      throw InvalidInputError("make_cloud: column " + std::to_string(j) +
                              " is not a unit vector");
    points.col(j) /= norm;
  }
  ConeCloud cloud;
  cloud.points = std::move(points);
  cloud.measure_estimate = measure_estimate;
  cloud.attempts = 0;
  cloud.seed = 0;
  return cloud;
}

ConeCloud rotate_cloud(const ConeCloud& cloud, const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() != cloud.dim())
    throw InvalidInputError("rotate_cloud: matrix shape does not match the cloud");
  const Eigen::MatrixXd gram = m.transpose() * m;
  const double defect =
      (gram - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
  if (defect > 1e-8)
    throw InvalidInputError("rotate_cloud: matrix is not orthogonal within 1e-8");
  ConeCloud out = cloud;
  out.points = m * cloud.points;
  for (int j = 0; j < out.points.cols(); ++j) out.points.col(j).normalize();
  return out;
}

void write_cloud_csv(std::ostream& os, const ConeCloud& cloud) {
  std::string text;
  text.reserve(static_cast<std::size_t>(cloud.size()) * 20u + 64u);
  text += "dim,n_points,measure_estimate\n";
  text += std::to_string(cloud.dim());
  text += ',';
  text += std::to_string(cloud.size());
  text += ',';
  append_double(text, cloud.measure_estimate);
  text += '\n';
  for (int j = 0; j < cloud.size(); ++j) {
    for (int i = 0; i < cloud.dim(); ++i) {
      if (i) text += ',';
      append_double(text, cloud.points(i, j));
    }
    text += '\n';
  }
  os << text;
}

}  // namespace conecap
