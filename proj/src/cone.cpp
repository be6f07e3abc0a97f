#include "conecap/cone.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace conecap {

namespace {

constexpr double kStationarityTol = 1e-10;

// Lawson-Hanson active-set method for min_{alpha >= 0} ||A alpha - b||.
// Coefficients outside the passive set stay exact zeros. Returns false if
// the iteration cap is reached before the stationarity test passes.
bool nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter,
          Eigen::VectorXd& alpha) {
  const int m = static_cast<int>(A.cols());
  alpha = Eigen::VectorXd::Zero(m);
  std::vector<char> passive(static_cast<std::size_t>(m), 0);
  std::vector<int> pset;
  Eigen::VectorXd resid = b;
  int iter = 0;

  while (true) {
    // Outer step: pick the most positive gradient component among the
    // active coordinates; stationary when none exceeds the tolerance.
    const Eigen::VectorXd w = A.transpose() * resid;
    int enter = -1;
    double best = kStationarityTol;
    for (int j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) return true;
    passive[static_cast<std::size_t>(enter)] = 1;
    pset.push_back(enter);

    // Inner step: unconstrained least squares on the passive set, walking
    // back toward the previous iterate while any coefficient is negative.
    while (true) {
      if (++iter > max_iter) return false;
      const int p = static_cast<int>(pset.size());
      Eigen::MatrixXd Ap(A.rows(), p);
      for (int k = 0; k < p; ++k) Ap.col(k) = A.col(pset[static_cast<std::size_t>(k)]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(b);

      double step = 1.0;
      for (int k = 0; k < p; ++k) {
        if (z[k] <= 0.0) {
          const double ak = alpha[pset[static_cast<std::size_t>(k)]];
          const double denom = ak - z[k];
          const double t = denom > 0.0 ? ak / denom : 0.0;
          step = std::min(step, t);
        }
      }

      if (step >= 1.0) {
        for (int k = 0; k < p; ++k) alpha[pset[static_cast<std::size_t>(k)]] = z[k];
        break;
      }

      for (int k = 0; k < p; ++k) {
        const int j = pset[static_cast<std::size_t>(k)];
        alpha[j] += step * (z[k] - alpha[j]);
      }
      // Coordinates driven to (or past) zero leave the passive set and are
      // snapped to exact zero.
      std::vector<int> kept;
      kept.reserve(pset.size());
      for (int j : pset) {
        if (alpha[j] <= 1e-14) {
          alpha[j] = 0.0;
          passive[static_cast<std::size_t>(j)] = 0;
        } else {
          kept.push_back(j);
        }
      }
      pset = std::move(kept);
      if (pset.empty()) break;
    }
    resid = b - A * alpha;
  }
}

}  // namespace

PolyhedralCone PolyhedralCone::from_normals(const std::vector<UnitVector>& normals) {
  if (normals.empty())
    throw InvalidInputError("PolyhedralCone: at least one halfspace normal required");
  const int n = normals.front().dim();
  if (n < 2) throw InvalidInputError("PolyhedralCone: dimension must be at least 2");
  std::vector<const UnitVector*> kept;
  for (const UnitVector& a : normals) {
    if (a.dim() != n)
      throw InvalidInputError("PolyhedralCone: normals have mixed dimensions");
    bool dup = false;
    for (const UnitVector* b : kept) {
      if (a.dot(*b) > 1.0 - 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(&a);
  }
  Eigen::MatrixXd a(n, static_cast<int>(kept.size()));
  for (int j = 0; j < static_cast<int>(kept.size()); ++j)
    a.col(j) = kept[static_cast<std::size_t>(j)]->coords();
  return PolyhedralCone(std::move(a));
}

PolyhedralCone PolyhedralCone::from_labeled_sample(
    const std::vector<UnitVector>& points, const std::vector<int>& labels) {
  if (points.empty())
    throw InvalidInputError("PolyhedralCone: labeled sample is empty");
  if (points.size() != labels.size())
    throw InvalidInputError("PolyhedralCone: points and labels differ in length");
  std::vector<UnitVector> normals;
  normals.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1)
      throw InvalidInputError("PolyhedralCone: labels must be +1 or -1");
    normals.push_back(UnitVector::normalized(labels[i] * points[i].coords()));
  }
  return from_normals(normals);
}

double PolyhedralCone::min_margin(const Eigen::VectorXd& v) const {
  if (v.size() != a_.rows())
    throw InvalidInputError("PolyhedralCone: dimension mismatch");
  return (a_.transpose() * v).minCoeff();
}

bool PolyhedralCone::contains(const Eigen::VectorXd& v, double tol) const {
  return min_margin(v) >= -tol;
}

DualProjection PolyhedralCone::project_dual(const Eigen::VectorXd& w) const {
  if (w.size() != a_.rows())
    throw InvalidInputError("PolyhedralCone: dimension mismatch");
  Eigen::VectorXd alpha;
  const int cap = 100 * num_normals();
  const bool ok = nnls(a_, w, cap, alpha);
  Eigen::VectorXd point = a_ * alpha;
  if (!ok)
    throw NumericalError("project_dual: active-set iteration cap reached",
                         std::move(point));
  DualProjection out;
  out.point = std::move(point);
  out.coeffs.alpha = std::move(alpha);
  out.coeffs.residual = (w - out.point).norm();
  return out;
}

Eigen::VectorXd PolyhedralCone::project_primal(const Eigen::VectorXd& w) const {
  return w + project_dual(-w).point;
}

UnitVector PolyhedralCone::separating_direction(const UnitVector& w) const {
  if (min_margin(w.coords()) >= -1e-9)
    throw PreconditionError(
        "separating_direction: point is inside the cone within tolerance");
  const Eigen::VectorXd p = project_primal(w.coords());
  // With margin < -1e-9 the distance to K is at least 1e-9, so the
  // difference is safely normalizable.
  return UnitVector::normalized(p - w.coords());
}

InteriorMargin PolyhedralCone::interior_margin(int steps, int restarts,
                                               std::uint64_t seed) const {
  if (steps < 1 || restarts < 1)
    throw InvalidInputError("interior_margin: steps and restarts must be positive");
  const int n = dim();
  Eigen::VectorXd best_v;
  double best_margin = -std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    RngStream rng(seed, stream_tag::kMargin, static_cast<std::uint64_t>(r));
    Eigen::VectorXd v = random_unit(n, rng).coords();
    for (int t = 1; t <= steps; ++t) {
      const Eigen::VectorXd margins = a_.transpose() * v;
      int imin = 0;
      margins.minCoeff(&imin);
      if (margins[imin] > best_margin) {
        best_margin = margins[imin];
        best_v = v;
      }
      const double eta = 1.0 / std::sqrt(static_cast<double>(t));
      Eigen::VectorXd next = v + eta * a_.col(imin);
      const double norm = next.norm();
      if (norm < 1e-12) continue;  // ascent step cancelled the iterate; keep v
      v = next / norm;
    }
    const double final_margin = min_margin(v);
    if (final_margin > best_margin) {
      best_margin = final_margin;
      best_v = v;
    }
  }
  return InteriorMargin{UnitVector::normalized(std::move(best_v)), best_margin};
}

}  // namespace conecap
