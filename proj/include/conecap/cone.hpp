#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "conecap/sphere.hpp"

namespace conecap {

/// An iterative numerical procedure exceeded its iteration cap. Carries the
/// best iterate reached so the caller can inspect how far it got.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, Eigen::VectorXd best)
      : Error(what), best_iterate(std::move(best)) {}
  Eigen::VectorXd best_iterate;
};

/// Nonnegative coefficients expressing a dual-cone point as a combination
/// of the cone's halfspace normals, plus the distance from the query point
/// to the dual cone. Coefficients on the active set are exact zeros.
struct DualCoefficients {
  Eigen::VectorXd alpha;
  double residual = 0.0;
};

struct DualProjection {
  Eigen::VectorXd point;
  DualCoefficients coeffs;
};

/// Direction maximizing the smallest constraint margin, with the margin it
/// attains. A strictly positive margin certifies a nonempty interior.
struct InteriorMargin {
  UnitVector direction;
  double margin = 0.0;
};

/// Closed convex polyhedral cone K = {v : <v, a_i> >= 0 for all i}, held as
/// the matrix of its unit halfspace normals a_i. The dual cone is the conic
/// hull of the normals. K always contains 0 and never contains -a_i, so it
/// is proper by construction.
class PolyhedralCone {
 public:
  /// Builds from halfspace normals. Normals are renormalized and
  /// near-duplicates (inner product above 1 - 1e-12) are dropped.
  static PolyhedralCone from_normals(const std::vector<UnitVector>& normals);

  /// Version-space cone of a labeled sample: normals y_i * x_i, so that
  /// membership of v means sign-consistency of v with every label.
  static PolyhedralCone from_labeled_sample(const std::vector<UnitVector>& points,
                                            const std::vector<int>& labels);

  int dim() const { return static_cast<int>(a_.rows()); }
  int num_normals() const { return static_cast<int>(a_.cols()); }
  /// dim x m matrix of unit normal columns, duplicates removed.
  const Eigen::MatrixXd& normals() const { return a_; }

  /// Smallest constraint margin min_i <v, a_i>.
  double min_margin(const Eigen::VectorXd& v) const;
  bool contains(const Eigen::VectorXd& v, double tol = 0.0) const;

  /// Euclidean projection of w onto the dual cone cone{a_1, ..., a_m},
  /// computed by Lawson-Hanson active-set nonnegative least squares
  /// (stationarity tolerance 1e-10, iteration cap 100 * m). Throws
  /// NumericalError with the best iterate if the cap is hit.
  DualProjection project_dual(const Eigen::VectorXd& w) const;

  /// Euclidean projection of w onto K itself, via the Moreau identity
  /// P_K(w) = w + P_dual(-w).
  Eigen::VectorXd project_primal(const Eigen::VectorXd& w) const;

  /// Unit direction from w toward its projection on K; every point of K
  /// has nonnegative inner product with it while w has a strictly smaller
  /// one. Requires w outside K (margin below -1e-9), else PreconditionError.
  UnitVector separating_direction(const UnitVector& w) const;

  /// Maximizes min_i <v, a_i> over unit v by projected subgradient ascent
  /// with restarts, tracking the best iterate seen. A nonpositive margin
  /// means no interior direction was found; it is reported, not thrown.
  InteriorMargin interior_margin(int steps = 500, int restarts = 64,
                                 std::uint64_t seed = 0) const;

 private:
  explicit PolyhedralCone(Eigen::MatrixXd a) : a_(std::move(a)) {}
  Eigen::MatrixXd a_;
};

}  // namespace conecap
