#pragma once

#include <Eigen/Core>
#include <utility>

#include "conecap/errors.hpp"
#include "conecap/rng.hpp"

namespace conecap {

/// Point on the unit sphere in R^n. Construction rejects vectors whose
/// norm deviates from 1 by more than 1e-9 and renormalizes the rest, so a
/// held value is always unit to machine precision.
class UnitVector {
 public:
  explicit UnitVector(Eigen::VectorXd v);

  /// Normalizes an arbitrary nonzero vector (no tolerance check).
  static UnitVector normalized(Eigen::VectorXd v);

  /// Standard basis vector e_i in R^n.
  static UnitVector axis(int n, int i);

  const Eigen::VectorXd& coords() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double dot(const UnitVector& other) const { return v_.dot(other.v_); }

 private:
  struct Unchecked {};
  UnitVector(Eigen::VectorXd v, Unchecked) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

/// Geodesic (angular) distance acos(<a, b>), with the inner product
/// clamped to [-1, 1] before acos. Always in [0, pi].
double geodesic_distance(const UnitVector& a, const UnitVector& b);

/// Midpoint normalize(a + b) of the minimizing geodesic between a and b.
/// Throws DegenerateGeodesicError when <a, b> < -1 + 1e-9, where the
/// minimizing geodesic is not unique.
UnitVector geodesic_midpoint(const UnitVector& a, const UnitVector& b);

/// Orthogonal reflection, in either of the two forms the symmetry
/// arguments use: across the hyperplane orthogonal to a unit direction
/// (x -> x - 2<x,z>z), or across the axis spanned by a unit direction
/// (x -> 2<x,w>w - x).
class Reflection {
 public:
  enum class Kind { Hyperplane, Axis };

  Reflection(Kind kind, UnitVector direction)
      : kind_(kind), dir_(std::move(direction)) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  UnitVector apply(const UnitVector& p) const;

  Kind kind() const { return kind_; }
  const UnitVector& direction() const { return dir_; }

 private:
  Kind kind_;
  UnitVector dir_;
};

/// Vector of n independent standard normal draws from the given stream.
Eigen::VectorXd gaussian_vector(int n, RngStream& rng);

/// Uniform point on the unit sphere in R^n.
UnitVector random_unit(int n, RngStream& rng);

/// Haar-distributed rotation in SO(n): QR of a Gaussian matrix with the
/// R-diagonal sign fix, then a final column flip when det = -1.
Eigen::MatrixXd random_rotation(int n, RngStream& rng);

}  // namespace conecap
