#pragma once

#include <cstdint>
#include <iosfwd>

#include "conecap/cone.hpp"

namespace conecap {

/// Fixed uniform sample of the cap K on the unit sphere, together with the
/// acceptance-rate estimate of the cap's normalized surface measure.
struct ConeCloud {
  Eigen::MatrixXd points;         // dim x size, unit columns, all inside K
  double measure_estimate = 1.0;  // accepted / attempted
  std::uint64_t attempts = 0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
};

/// Rejection sampling exhausted its attempt budget before filling the
/// requested cloud. Carries the points accepted so far, in index order.
class LowAcceptanceError : public Error {
 public:
  LowAcceptanceError(const std::string& what, ConeCloud partial_cloud)
      : Error(what), partial(std::move(partial_cloud)) {}
  ConeCloud partial;
};

/// count uniform points on the unit sphere in R^n, one column each. Every
/// point has its own random substream, so the result depends only on the
/// seed, never on the thread count.
Eigen::MatrixXd sample_sphere(int n, int count, std::uint64_t seed,
                              int threads = 1);

/// Uniform cloud on the cap of K by per-point rejection from the sphere.
/// Candidates are accepted on nonnegative margin (tolerance zero). The
/// attempt budget is max_attempts_per_point per cloud index (0 selects the
/// default of 1e4); indices that exhaust it make the call throw
/// LowAcceptanceError carrying the partial cloud.
ConeCloud sample_cone_cap(const PolyhedralCone& cone, int count,
                          std::uint64_t seed,
                          std::uint64_t max_attempts_per_point = 0,
                          int threads = 1);

/// Wraps externally constructed points as a cloud (used for hand-built
/// fixtures and single-point evaluations). Columns must be unit vectors.
ConeCloud make_cloud(Eigen::MatrixXd points, double measure_estimate = 1.0);

/// Applies an orthogonal matrix to every point of the cloud. The measure
/// estimate carries over unchanged; membership transports to the rotated
/// cone. Throws InvalidInputError if m is not orthogonal within 1e-8.
ConeCloud rotate_cloud(const ConeCloud& cloud, const Eigen::MatrixXd& m);

/// CSV export: header line "dim,n_points,measure_estimate", one line with
/// those values, then one point per line. Shortest-round-trip floats.
void write_cloud_csv(std::ostream& os, const ConeCloud& cloud);

}  // namespace conecap
