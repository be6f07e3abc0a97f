#include <cmath>

#include "conecap/cone.hpp"
#include "doctest.h"

using namespace conecap;

namespace {

PolyhedralCone quadrant() {
  return PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0), UnitVector::axis(2, 1)});
}

PolyhedralCone random_cone(int n, int m, RngStream& rng) {
  std::vector<UnitVector> normals;
  for (int i = 0; i < m; ++i) normals.push_back(random_unit(n, rng));
  return PolyhedralCone::from_normals(normals);
}

}  // namespace

TEST_CASE("cone construction validates and deduplicates") {
  CHECK_THROWS_AS(PolyhedralCone::from_normals({}), InvalidInputError);
  CHECK_THROWS_AS(PolyhedralCone::from_normals(
                      {UnitVector::axis(2, 0), UnitVector::axis(3, 0)}),
                  InvalidInputError);

  const PolyhedralCone dedup = PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0), UnitVector::axis(2, 0), UnitVector::axis(2, 1)});
  CHECK(dedup.num_normals() == 2);
  CHECK(dedup.dim() == 2);

  // A nearly parallel normal collapses onto the first one.
  const PolyhedralCone near_dup = PolyhedralCone::from_normals(
      {UnitVector::axis(3, 0),
       UnitVector::normalized(Eigen::Vector3d(1.0, 1e-13, 0.0))});
  CHECK(near_dup.num_normals() == 1);
}

TEST_CASE("labeled samples induce signed normals") {
  const std::vector<UnitVector> pts = {
      UnitVector::axis(3, 0), UnitVector::axis(3, 1), UnitVector::axis(3, 2)};
  const PolyhedralCone cone = PolyhedralCone::from_labeled_sample(pts, {1, -1, 1});
  CHECK(cone.num_normals() == 3);
  CHECK(cone.min_margin(Eigen::Vector3d(1.0, -1.0, 1.0)) == 1.0);
  CHECK(cone.min_margin(Eigen::Vector3d(1.0, 1.0, 1.0)) == -1.0);
  CHECK_THROWS_AS(PolyhedralCone::from_labeled_sample(pts, {1, 0, 1}),
                  InvalidInputError);
  CHECK_THROWS_AS(PolyhedralCone::from_labeled_sample(pts, {1, -1}),
                  InvalidInputError);
}

TEST_CASE("membership margins on the quadrant") {
  const PolyhedralCone q = quadrant();
  CHECK(q.min_margin(Eigen::Vector2d(3.0, 4.0)) == 3.0);
  CHECK(q.min_margin(Eigen::Vector2d(-1.0, 2.0)) == -1.0);
  CHECK(q.contains(Eigen::Vector2d(0.0, 1.0)));
  CHECK(q.contains(Eigen::Vector2d(0.0, 0.0)));
  CHECK_FALSE(q.contains(Eigen::Vector2d(-1e-6, 1.0)));
  CHECK(q.contains(Eigen::Vector2d(-1e-6, 1.0), 1e-5));
  CHECK_THROWS_AS(q.min_margin(Eigen::Vector3d(1.0, 1.0, 1.0)),
                  InvalidInputError);
}

TEST_CASE("dual projection hand values") {
  const PolyhedralCone q = quadrant();

  const DualProjection opp = q.project_dual(Eigen::Vector2d(-1.0, -1.0));
  CHECK(opp.point.norm() < 1e-14);
  CHECK(opp.coeffs.residual == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  const DualProjection side = q.project_dual(Eigen::Vector2d(-0.5, 1.0));
  CHECK((side.point - Eigen::Vector2d(0.0, 1.0)).norm() < 1e-13);
  CHECK(side.coeffs.residual == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(side.coeffs.alpha[0] == 0.0);  // inactive coordinate is exactly zero

  const DualProjection inside = q.project_dual(Eigen::Vector2d(0.3, 0.4));
  CHECK((inside.point - Eigen::Vector2d(0.3, 0.4)).norm() < 1e-14);
  CHECK(inside.coeffs.residual < 1e-14);
}

TEST_CASE("dual projection satisfies the optimality conditions") {
  RngStream rng(11, stream_tag::kCheck, 910);
  for (int i = 0; i < 120; ++i) {
    const int n = 2 + i % 4;
    const int m = 1 + i % 6;
    const PolyhedralCone cone = random_cone(n, m, rng);
    const Eigen::VectorXd w = 2.0 * gaussian_vector(n, rng);
    const DualProjection proj = cone.project_dual(w);

    for (int k = 0; k < proj.coeffs.alpha.size(); ++k) {
      const double a = proj.coeffs.alpha[k];
      CHECK(a >= 0.0);
      CHECK((a == 0.0 || a > 1e-14));  // coefficients snap to exact zero
    }
    const Eigen::VectorXd gap = w - proj.point;
    CHECK(std::abs(gap.dot(proj.point)) < 1e-8);
    CHECK((cone.normals().transpose() * gap).maxCoeff() < 1e-8);
    CHECK(proj.coeffs.residual == doctest::Approx(gap.norm()).epsilon(1e-12));
    CHECK((proj.point - cone.normals() * proj.coeffs.alpha).norm() < 1e-10);
  }
}

TEST_CASE("dual projection copes with nearly parallel normals") {
  const PolyhedralCone cone = PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0),
       UnitVector::normalized(Eigen::Vector2d(1.0, 1e-3)),
       UnitVector::axis(2, 1)});
  RngStream rng(11, stream_tag::kCheck, 911);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd w = 2.0 * gaussian_vector(2, rng);
    const DualProjection proj = cone.project_dual(w);
    const Eigen::VectorXd gap = w - proj.point;
    CHECK(std::abs(gap.dot(proj.point)) < 1e-6);
    CHECK((cone.normals().transpose() * gap).maxCoeff() < 1e-6);
  }
}

TEST_CASE("primal projection splits orthogonally") {
  const PolyhedralCone q = quadrant();
  CHECK((q.project_primal(Eigen::Vector2d(-1.0, 1.0)) -
         Eigen::Vector2d(0.0, 1.0))
            .norm() < 1e-13);
  CHECK(q.project_primal(Eigen::Vector2d(-2.0, -3.0)).norm() < 1e-13);

  RngStream rng(11, stream_tag::kCheck, 912);
  for (int i = 0; i < 120; ++i) {
    const int n = 2 + i % 4;
    const PolyhedralCone cone = random_cone(n, 1 + i % 6, rng);
    const Eigen::VectorXd w = 2.0 * gaussian_vector(n, rng);
    const Eigen::VectorXd p = cone.project_primal(w);
    CHECK(cone.min_margin(p) > -1e-9);
    CHECK(std::abs((w - p).dot(p)) < 1e-8);
    // The complement w - p is the negative of a dual-cone element.
    CHECK(cone.project_dual(p - w).coeffs.residual < 1e-8);
    CHECK((cone.project_primal(p) - p).norm() < 1e-8);
  }
}

TEST_CASE("separating directions certify exclusion") {
  const PolyhedralCone q = quadrant();
  const UnitVector outside =
      UnitVector::normalized(Eigen::Vector2d(-1.0, -1.0));
  const UnitVector z = q.separating_direction(outside);
  CHECK((z.coords() - Eigen::Vector2d(std::sqrt(0.5), std::sqrt(0.5))).norm() <
        1e-12);
  CHECK(outside.dot(z) == doctest::Approx(-1.0).epsilon(1e-12));

  CHECK_THROWS_AS(
      q.separating_direction(UnitVector::normalized(Eigen::Vector2d(1.0, 1.0))),
      PreconditionError);
  CHECK_THROWS_AS(q.separating_direction(UnitVector::axis(2, 1)),
                  PreconditionError);

  RngStream rng(11, stream_tag::kCheck, 913);
  for (int i = 0; i < 80; ++i) {
    const int n = 2 + i % 4;
    const PolyhedralCone cone = random_cone(n, 1 + i % 6, rng);
    UnitVector w = random_unit(n, rng);
    int tries = 0;
    while (cone.min_margin(w.coords()) >= -1e-6 && tries++ < 100)
      w = random_unit(n, rng);
    if (tries >= 100) continue;
    const UnitVector sep = cone.separating_direction(w);
    CHECK(w.dot(sep) < 0.0);
    CHECK(cone.project_dual(sep.coords()).coeffs.residual < 1e-8);
  }
}

TEST_CASE("interior margins of reference cones") {
  const InteriorMargin qm = quadrant().interior_margin(400, 24, 3);
  CHECK(qm.margin == doctest::Approx(std::sqrt(0.5)).epsilon(0.03));
  CHECK(std::abs(qm.direction.coords()[0] - qm.direction.coords()[1]) < 0.1);

  const PolyhedralCone half =
      PolyhedralCone::from_normals({UnitVector::axis(2, 0)});
  CHECK(half.interior_margin(400, 24, 3).margin > 1.0 - 1e-6);

  const PolyhedralCone orthant = PolyhedralCone::from_normals(
      {UnitVector::axis(3, 0), UnitVector::axis(3, 1), UnitVector::axis(3, 2)});
  CHECK(orthant.interior_margin(400, 24, 3).margin ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(0.03));

  const PolyhedralCone flat = PolyhedralCone::from_normals(
      {UnitVector::axis(2, 0),
       UnitVector::normalized(Eigen::Vector2d(-1.0, 0.0))});
  CHECK(flat.interior_margin(400, 24, 3).margin <= 1e-8);

  // Same seed, same answer.
  const InteriorMargin r1 = orthant.interior_margin(400, 24, 9);
  const InteriorMargin r2 = orthant.interior_margin(400, 24, 9);
  CHECK(r1.margin == r2.margin);
  CHECK(r1.direction.coords() == r2.direction.coords());
}
