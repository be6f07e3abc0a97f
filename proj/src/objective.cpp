#include "conecap/objective.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace conecap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double simpson_halves(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Adaptive Simpson with Richardson correction. The integrands here are
// smooth on each piece (kinks are split off by the caller), so the depth
// cap is never reached in practice.
template <class F>
double adapt(const F& f, double a, double b, double fa, double fb, double fm,
             double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_halves(a, m, fa, flm, fm);
  const double right = simpson_halves(m, b, fm, frm, fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol)
    return left + right + err / 15.0;
  return adapt(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = simpson_halves(a, b, fa, fm, fb);
  return adapt(f, a, b, fa, fb, fm, whole, tol, 48);
}

Eigen::ArrayXd clamped_dots(const UnitVector& w, const ConeCloud& cloud) {
  if (cloud.size() < 1)
    throw InvalidInputError("cap functional: cloud is empty");
  if (w.dim() != cloud.dim())
    throw InvalidInputError("cap functional: dimension mismatch");
  Eigen::ArrayXd d = (cloud.points.transpose() * w.coords()).array();
  return d.min(1.0).max(-1.0);
}

}  // namespace

GValue g_eval(GKind g, double t) {
  if (!std::isfinite(t) || t < -1e-9 || t > kPi + 1e-9)
    throw InvalidInputError("g_eval: argument outside [0, pi] beyond tolerance");
  t = std::min(kPi, std::max(0.0, t));
  switch (g) {
    case GKind::Identity:
      return GValue{t, 1.0};
    case GKind::Square:
      return GValue{t * t, 2.0 * t};
    case GKind::TwoOneMinusCos:
      return GValue{2.0 * (1.0 - std::cos(t)), 2.0 * std::sin(t)};
  }
  throw InvalidInputError("g_eval: unknown integrand kind");
}

PsiEstimate psi_saa(const UnitVector& w, const ConeCloud& cloud, GKind g) {
  const Eigen::ArrayXd d = clamped_dots(w, cloud);
  const auto n = static_cast<double>(d.size());
  Eigen::ArrayXd gv;
  switch (g) {
    case GKind::Identity:
      gv = d.acos();
      break;
    case GKind::Square:
      gv = d.acos().square();
      break;
    case GKind::TwoOneMinusCos:
      // g(acos d) collapses to 2 - 2d; no trig needed.
      gv = 2.0 - 2.0 * d;
      break;
  }
  PsiEstimate est;
  est.value = gv.mean();
  est.scaled_value = est.value * cloud.measure_estimate;
  if (d.size() > 1) {
    const double var = (gv - est.value).square().sum() / (n - 1.0);
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

PsiGradient psi_grad_saa(const UnitVector& w, const ConeCloud& cloud, GKind g,
                         double clamp) {
  if (!(clamp > 0.0) || clamp > 1e-6)
    throw InvalidInputError("psi_grad_saa: clamp must lie in (0, 1e-6]");
  const Eigen::ArrayXd d = clamped_dots(w, cloud);
  const auto n = static_cast<double>(d.size());

  const auto keep = d.abs() <= 1.0 - clamp;
  // Derivative coefficients g'(t_j)/sin(t_j) with t_j = acos(d_j). The
  // floor under the square root only touches terms that are dropped anyway.
  const Eigen::ArrayXd sin_t = (1.0 - d.square()).max(1e-30).sqrt();
  Eigen::ArrayXd c;
  switch (g) {
    case GKind::Identity:
      c = sin_t.inverse();
      break;
    case GKind::Square:
      c = 2.0 * d.acos() / sin_t;
      break;
    case GKind::TwoOneMinusCos:
      c = Eigen::ArrayXd::Constant(d.size(), 2.0);
      break;
  }
  c = keep.select(c, 0.0);

  const Eigen::VectorXd yc = cloud.points * c.matrix();
  const double along = (c * d).sum();
  Eigen::VectorXd grad = -(yc - along * w.coords()) / n;
  grad -= w.coords() * w.coords().dot(grad);

  PsiGradient out;
  out.grad = std::move(grad);
  out.dropped = static_cast<int>(d.size() - keep.count());
  return out;
}

double psi_exact_2d(double theta, double phi0, double phi1, GKind g) {
  if (!std::isfinite(theta) || !std::isfinite(phi0) || !std::isfinite(phi1))
    throw InvalidInputError("psi_exact_2d: non-finite argument");
  if (!(phi0 < phi1))
    throw InvalidInputError("psi_exact_2d: arc must have positive length");
  if (phi1 - phi0 > kPi + 1e-12)
    throw InvalidInputError("psi_exact_2d: arc longer than pi is not a cap");

  const auto f = [&](double phi) {
    const double dist = std::abs(std::remainder(theta - phi, 2.0 * kPi));
    return g_eval(g, dist).value;
  };

  // The distance function kinks where theta - phi is a multiple of pi.
  std::vector<double> cuts{phi0};
  const auto kmin = static_cast<long>(std::ceil((theta - phi1) / kPi)) - 1;
  const auto kmax = static_cast<long>(std::floor((theta - phi0) / kPi)) + 1;
  for (long k = kmin; k <= kmax; ++k) {
    const double c = theta - static_cast<double>(k) * kPi;
    if (phi0 + 1e-13 < c && c < phi1 - 1e-13) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(phi1);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate(f, cuts[i], cuts[i + 1], 1e-13);
  return total / (2.0 * kPi);
}

std::optional<std::pair<double, double>> cone_arc_2d(const PolyhedralCone& cone) {
  if (cone.dim() != 2)
    throw InvalidInputError("cone_arc_2d: cone must live in the plane");
  const InteriorMargin im = cone.interior_margin();
  if (im.margin <= 1e-12) return std::nullopt;

  const double center = std::atan2(im.direction.coords()[1], im.direction.coords()[0]);
  const auto margin_at = [&](double phi) {
    return cone.min_margin(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
  };

  // The cap is a single arc around the interior direction, and the margin
  // stays negative past each endpoint for the rest of the half-turn, so a
  // plain bisection on [0, pi] lands on the endpoint.
  const auto boundary_offset = [&](double sign) {
    double lo = 0.0, hi = kPi;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (margin_at(center + sign * mid) >= 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  const double t_minus = boundary_offset(-1.0);
  const double t_plus = boundary_offset(1.0);
  return std::make_pair(center - t_minus, center + t_plus);
}

}  // namespace conecap
