#include <cmath>

#include "conecap/objective.hpp"
#include "conecap/sampling.hpp"
#include "doctest.h"

using namespace conecap;

namespace {

constexpr double kPi = 3.14159265358979323846;

PolyhedralCone quadrant() {
  return PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0), UnitVector::axis(2, 1)});
}

UnitVector planar(double theta) {
  return UnitVector(Eigen::Vector2d(std::cos(theta), std::sin(theta)));
}

}  // namespace

TEST_CASE("distance transforms match their closed forms") {
  const double ts[] = {0.0, 0.4, kPi / 2.0, 2.5, kPi};
  for (const double t : ts) {
    CHECK(g_eval(GKind::Identity, t).value == t);
    CHECK(g_eval(GKind::Identity, t).derivative == 1.0);
    CHECK(g_eval(GKind::Square, t).value == doctest::Approx(t * t).epsilon(1e-15));
    CHECK(g_eval(GKind::Square, t).derivative ==
          doctest::Approx(2.0 * t).epsilon(1e-15));
    CHECK(g_eval(GKind::TwoOneMinusCos, t).value ==
          doctest::Approx(2.0 * (1.0 - std::cos(t))).epsilon(1e-15));
    CHECK(g_eval(GKind::TwoOneMinusCos, t).derivative ==
          doctest::Approx(2.0 * std::sin(t)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(g_eval(GKind::Identity, -0.01), InvalidInputError);
  CHECK_THROWS_AS(g_eval(GKind::Square, kPi + 0.01), InvalidInputError);
  // Round-off slack just outside the domain clamps instead of throwing.
  CHECK(g_eval(GKind::Identity, -5e-10).value == 0.0);
  CHECK(g_eval(GKind::Identity, kPi + 5e-10).value == kPi);
}

TEST_CASE("sample average objective on hand clouds") {
  Eigen::MatrixXd pts(2, 2);
  pts << 1.0, 0.0, 0.0, 1.0;
  const ConeCloud cloud = make_cloud(pts, 0.25);

  const double theta = 0.3;
  const PsiEstimate est = psi_saa(planar(theta), cloud, GKind::Identity);
  const double g1 = theta, g2 = kPi / 2.0 - theta;
  CHECK(est.value == doctest::Approx((g1 + g2) / 2.0).epsilon(1e-14));
  CHECK(est.scaled_value == doctest::Approx(est.value * 0.25).epsilon(1e-15));
  CHECK(est.std_error == doctest::Approx(std::abs(g1 - g2) / 2.0).epsilon(1e-12));

  Eigen::MatrixXd single(2, 1);
  single << 1.0, 0.0;
  const ConeCloud one = make_cloud(single, 1.0);
  CHECK(psi_saa(planar(0.8), one, GKind::Identity).value ==
        doctest::Approx(0.8).epsilon(1e-13));
  CHECK(psi_saa(planar(0.8), one, GKind::Identity).std_error == 0.0);

  ConeCloud empty;
  empty.points.resize(2, 0);
  CHECK_THROWS_AS(psi_saa(planar(0.1), empty, GKind::Identity),
                  InvalidInputError);
  CHECK_THROWS_AS(psi_saa(UnitVector::axis(3, 0), cloud, GKind::Identity),
                  InvalidInputError);
}

TEST_CASE("gradients are tangent and match finite differences") {
  const ConeCloud cloud = sample_cone_cap(quadrant(), 400, 21);
  RngStream rng(21, stream_tag::kCheck, 920);
  for (int i = 0; i < 12; ++i) {
    const GKind g = static_cast<GKind>(i % 3);
    UnitVector w = random_unit(2, rng);
    const Eigen::ArrayXd dots = (cloud.points.transpose() * w.coords()).array();
    if (dots.abs().maxCoeff() > 1.0 - 1e-6) continue;
    const PsiGradient grad = psi_grad_saa(w, cloud, g);
    CHECK(std::abs(grad.grad.dot(w.coords())) < 1e-12);
    CHECK(grad.dropped == 0);

    Eigen::Vector2d dir(-w.coords()[1], w.coords()[0]);
    const double h = 1e-6;
    const auto shifted = [&](double s) {
      return psi_saa(UnitVector::normalized(w.coords() + s * dir), cloud, g).value;
    };
    const double fd = (shifted(h) - shifted(-h)) / (2.0 * h);
    CHECK(std::abs(fd - grad.grad.dot(dir)) < 1e-6);
  }
}

TEST_CASE("kink terms are dropped instead of poisoning the gradient") {
  Eigen::MatrixXd pts(2, 2);
  pts << 1.0, 0.0, 0.0, 1.0;
  const ConeCloud cloud = make_cloud(pts, 1.0);
  const PsiGradient at_kink =
      psi_grad_saa(UnitVector::axis(2, 0), cloud, GKind::Identity);
  CHECK(at_kink.dropped == 1);
  CHECK(at_kink.grad.allFinite());

  CHECK_THROWS_AS(psi_grad_saa(planar(0.5), cloud, GKind::Identity, 0.0),
                  InvalidInputError);
  CHECK_THROWS_AS(psi_grad_saa(planar(0.5), cloud, GKind::Identity, 1e-3),
                  InvalidInputError);
  CHECK_NOTHROW(psi_grad_saa(planar(0.5), cloud, GKind::Identity, 1e-7));
}

TEST_CASE("cosine-shaped objective has a zero gradient at the mean") {
  const ConeCloud cloud = sample_cone_cap(quadrant(), 600, 22);
  const UnitVector mean = UnitVector::normalized(cloud.points.rowwise().mean());
  const PsiGradient grad = psi_grad_saa(mean, cloud, GKind::TwoOneMinusCos);
  CHECK(grad.grad.norm() < 1e-13);
}

TEST_CASE("planar exact values match hand integrals") {
  const double quarter = kPi / 2.0;
  CHECK(psi_exact_2d(kPi / 4.0, 0.0, quarter, GKind::Identity) ==
        doctest::Approx(kPi / 32.0).epsilon(1e-12));
  CHECK(psi_exact_2d(0.0, 0.0, quarter, GKind::Identity) ==
        doctest::Approx(kPi / 16.0).epsilon(1e-12));
  CHECK(psi_exact_2d(kPi / 4.0, 0.0, quarter, GKind::Square) ==
        doctest::Approx(kPi * kPi / 192.0).epsilon(1e-12));
  CHECK(psi_exact_2d(kPi / 4.0, 0.0, quarter, GKind::TwoOneMinusCos) ==
        doctest::Approx((kPi - 2.0 * std::sqrt(2.0)) / (2.0 * kPi))
            .epsilon(1e-12));

  // Contributions over adjacent arcs add up.
  const double whole = psi_exact_2d(0.9, -0.4, 1.8, GKind::Square);
  const double split = psi_exact_2d(0.9, -0.4, 0.7, GKind::Square) +
                       psi_exact_2d(0.9, 0.7, 1.8, GKind::Square);
  CHECK(whole == doctest::Approx(split).epsilon(1e-12));

  CHECK_THROWS_AS(psi_exact_2d(0.0, 1.0, 0.5, GKind::Identity),
                  InvalidInputError);
  CHECK_THROWS_AS(psi_exact_2d(0.0, 0.0, kPi + 0.1, GKind::Identity),
                  InvalidInputError);
}

TEST_CASE("planar integration handles the distance kink") {
  // theta - phi crosses -pi inside this arc, so the integrand folds back.
  const double phi0 = 0.2, phi1 = 0.9, theta = -2.9;
  const int steps = 400000;
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double phi = phi0 + (phi1 - phi0) * (k + 0.5) / steps;
    acc += std::abs(std::remainder(theta - phi, 2.0 * kPi));
  }
  acc = acc * ((phi1 - phi0) / steps) / (2.0 * kPi);
  CHECK(psi_exact_2d(theta, phi0, phi1, GKind::Identity) ==
        doctest::Approx(acc).epsilon(1e-9));
}

TEST_CASE("planar cap arcs are recovered from normals") {
  const auto arc = cone_arc_2d(quadrant());
  REQUIRE(arc.has_value());
  CHECK(arc->first == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(arc->second == doctest::Approx(kPi / 2.0).epsilon(1e-9));

  const PolyhedralCone tilted = PolyhedralCone::from_normals(
      {planar(1.9 - kPi / 2.0), planar(0.7 + kPi / 2.0)});
  const auto tarc = cone_arc_2d(tilted);
  REQUIRE(tarc.has_value());
  CHECK(std::abs(std::remainder(tarc->first - 0.7, 2.0 * kPi)) < 1e-9);
  CHECK(std::abs(std::remainder(tarc->second - 1.9, 2.0 * kPi)) < 1e-9);

  const PolyhedralCone empty = PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0), planar(kPi)});
  CHECK_FALSE(cone_arc_2d(empty).has_value());

  const PolyhedralCone solid = PolyhedralCone::from_normals(
      {UnitVector::axis(3, 0)});
  CHECK_THROWS_AS(cone_arc_2d(solid), InvalidInputError);
}
