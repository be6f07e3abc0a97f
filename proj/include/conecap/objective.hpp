#pragma once

#include <optional>
#include <utility>

#include "conecap/sampling.hpp"

namespace conecap {

/// Integrand shape g applied to the angular distance. All three are
/// nondecreasing on [0, pi] with g(0) = 0.
enum class GKind {
  Identity,        // g(t) = t
  Square,          // g(t) = t^2
  TwoOneMinusCos,  // g(t) = 2(1 - cos t)
};

struct GValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Evaluates g and g' at t. The domain is [0, pi] with 1e-9 slack on both
/// ends; inputs within the slack are clamped, anything further throws.
GValue g_eval(GKind g, double t);

/// Monte Carlo estimate of the cap functional at w over a fixed cloud.
struct PsiEstimate {
  double value = 0.0;         // mean of g(distance) over the cloud
  double scaled_value = 0.0;  // value times the cloud's measure estimate
  double std_error = 0.0;     // sample standard deviation / sqrt(size)
};

PsiEstimate psi_saa(const UnitVector& w, const ConeCloud& cloud, GKind g);

/// Riemannian gradient of the cloud estimate at w, tangent to the sphere.
/// Terms with |<w, y>| > 1 - clamp sit numerically on the distance kink
/// and are dropped; their count is reported.
struct PsiGradient {
  Eigen::VectorXd grad;
  int dropped = 0;
};

PsiGradient psi_grad_saa(const UnitVector& w, const ConeCloud& cloud, GKind g,
                         double clamp = 1e-9);

/// Exact value of the cap functional on the circle: the normalized integral
/// of g(angular distance to theta) over the arc [phi0, phi1], divided by
/// 2 pi. The integrand's kinks (angles at distance 0 or pi from theta) are
/// split before adaptive quadrature, so the result is accurate to ~1e-10.
/// Requires phi0 < phi1 and phi1 - phi0 <= pi.
double psi_exact_2d(double theta, double phi0, double phi1, GKind g);

/// Recovers the angular interval [phi0, phi1] of a planar cone's cap, with
/// endpoints located by bisection to ~1e-12. Empty when the cone has no
/// interior direction. Only defined for dim == 2.
std::optional<std::pair<double, double>> cone_arc_2d(const PolyhedralCone& cone);

}  // namespace conecap
