#include "conecap/sphere.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace conecap {

UnitVector::UnitVector(Eigen::VectorXd v) : v_(std::move(v)) {
  if (v_.size() < 2)
    throw InvalidInputError("UnitVector: dimension must be at least 2");
  const double norm = v_.norm();
  if (std::abs(norm - 1.0) > 1e-9)
    throw InvalidInputError("UnitVector: norm deviates from 1 by more than 1e-9");
  v_ /= norm;
}

UnitVector UnitVector::normalized(Eigen::VectorXd v) {
  if (v.size() < 2)
    throw InvalidInputError("UnitVector: dimension must be at least 2");
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw InvalidInputError("UnitVector: cannot normalize a zero or non-finite vector");
  v /= norm;
  return UnitVector(std::move(v), Unchecked{});
}

UnitVector UnitVector::axis(int n, int i) {
  if (n < 2 || i < 0 || i >= n)
    throw InvalidInputError("UnitVector::axis: index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[i] = 1.0;
  return UnitVector(std::move(v), Unchecked{});
}

double geodesic_distance(const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim())
    throw InvalidInputError("geodesic_distance: dimension mismatch");
  double d = a.dot(b);
  d = std::min(1.0, std::max(-1.0, d));
  return std::acos(d);
}

UnitVector geodesic_midpoint(const UnitVector& a, const UnitVector& b) {
  if (a.dim() != b.dim())
    throw InvalidInputError("geodesic_midpoint: dimension mismatch");
  if (a.dot(b) < -1.0 + 1e-9)
    throw DegenerateGeodesicError(
        "geodesic_midpoint: endpoints are antipodal within tolerance");
  return UnitVector::normalized(a.coords() + b.coords());
}

Eigen::VectorXd Reflection::apply(const Eigen::VectorXd& x) const {
  if (x.size() != dir_.coords().size())
    throw InvalidInputError("Reflection::apply: dimension mismatch");
  const double s = dir_.coords().dot(x);
  if (kind_ == Kind::Hyperplane) return x - 2.0 * s * dir_.coords();
  return 2.0 * s * dir_.coords() - x;
}

UnitVector Reflection::apply(const UnitVector& p) const {
  // Reflections are isometries, so the image of a unit vector is unit up
  // to roundoff; normalize without re-running the tolerance check.
  return UnitVector::normalized(apply(p.coords()));
}

Eigen::VectorXd gaussian_vector(int n, RngStream& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

UnitVector random_unit(int n, RngStream& rng) {
  if (n < 2) throw InvalidInputError("random_unit: dimension must be at least 2");
  while (true) {
    Eigen::VectorXd v = gaussian_vector(n, rng);
    if (v.norm() > 1e-12) return UnitVector::normalized(std::move(v));
  }
}

Eigen::MatrixXd random_rotation(int n, RngStream& rng) {
  if (n < 2)
    throw InvalidInputError("random_rotation: dimension must be at least 2");
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing the signs of the R diagonal makes Q Haar-distributed on O(n).
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (q.determinant() < 0.0) q.col(n - 1) = -q.col(n - 1);
  return q;
}

}  // namespace conecap
