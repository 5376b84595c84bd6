#include "akr/acs.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>

using namespace akr;

namespace {

// J_st + x_1 N with N nilpotent and anticommuting with J_st: J^2 = -I exactly.
AlmostComplexStructure affine_structure(double eps) {
  Mat N = Mat::Zero(4, 4);
  N(2, 0) = eps;
  N(3, 1) = -eps;
  const Mat Jst = standard_structure(2);
  return AlmostComplexStructure(
      2, [N, Jst](const Vec& x) { return Mat(Jst + x(0) * N); },
      [N](const Vec&) {
        std::vector<Mat> d(4, Mat::Zero(4, 4));
        d[0] = N;
        return d;
      });
}

}  // namespace

TEST_CASE("standard structure squares to -I") {
  const Mat J = standard_structure(3);
  CHECK((J * J + Mat::Identity(6, 6)).norm() < 1e-15);
  const Mat C = conjugation_matrix(3);
  CHECK((C * J + J * C).norm() < 1e-15);
}

TEST_CASE("grid regions") {
  const GridRegion b = GridRegion::ball(Vec::Zero(2), 1.0, 5);
  CHECK(b.contains(Vec::Zero(2)));
  CHECK_FALSE(b.contains((Vec(2) << 1.0, 0.0).finished()));
  for (const Vec& x : b.points()) CHECK(x.norm() < 1.0);
  const GridRegion p = GridRegion::ball(Vec::Zero(2), 1.0, 5, 1e-4, 0.3);
  CHECK_FALSE(p.contains(Vec::Zero(2)));
  const GridRegion box = GridRegion::box(1, Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), 3);
  CHECK(box.points().size() == 9);
  CHECK_THROWS_AS(GridRegion::box(1, Vec::Constant(2, 1.0), Vec::Constant(2, -1.0), 3), std::invalid_argument);
}

TEST_CASE("structure axiom on conjugated and affine structures") {
  const GridRegion box = GridRegion::box(2, Vec::Constant(4, -1.0), Vec::Constant(4, 1.0), 3);
  const StructureReport a = validate_structure(affine_structure(0.3), box);
  CHECK(a.accepted);
  CHECK(a.max_residual < 1e-14);
  const AlmostComplexStructure bad(2, [](const Vec& x) { return Mat(standard_structure(2) + 0.1 * x(0) * Mat::Identity(4, 4)); });
  const StructureReport r = validate_structure(bad, box);
  CHECK_FALSE(r.accepted);
  CHECK(r.max_residual > 1e-3);
}

TEST_CASE("normalize_at_point conjugates J(p) to J_st") {
  const AlmostComplexStructure J = affine_structure(0.4);
  const Vec p = (Vec(4) << 0.7, 0.1, -0.2, 0.3).finished();
  const CoordinateChart c = normalize_at_point(J, p);
  REQUIRE(c.linear);
  const Mat L = *c.linear;
  CHECK((L * J(p) * L.inverse() - standard_structure(2)).norm() < 1e-12);
  const AlmostComplexStructure Jz = direct_image(J, c);
  CHECK((Jz(Vec::Zero(4)) - standard_structure(2)).norm() < 1e-12);
}

TEST_CASE("direct image by a complex-linear map preserves J_st") {
  // multiplication by a complex 2x2 matrix, realified
  Mat A(4, 4);
  A << 1, -2, 0.5, 0, 2, 1, 0, 0.5, 0, 0, 1, -1, 0, 0, 1, 1;
  const AlmostComplexStructure J = direct_image(AlmostComplexStructure::standard(2), CoordinateChart::affine(A, Vec::Zero(4)));
  const Vec w = (Vec(4) << 0.3, -0.1, 0.2, 0.4).finished();
  CHECK((J(w) - standard_structure(2)).norm() < 1e-12);
}

TEST_CASE("isotropic rescaling shrinks an affine deformation linearly") {
  const AlmostComplexStructure J = affine_structure(0.5);
  const GridRegion ball = GridRegion::ball(Vec::Zero(4), 1.0, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 0.5, 0.1}) {
    const double n2 = deformation_norm(isotropic_rescale(J, lambda), ball, 2);
    CHECK(n2 <= prev);
    prev = n2;
  }
  const double a = deformation_norm(isotropic_rescale(J, 0.5), ball, 2);
  const double b = deformation_norm(isotropic_rescale(J, 0.25), ball, 2);
  CHECK(b <= 0.5 * a + 1e-12);
  CHECK(deformation_norm(isotropic_rescale(J, 1e-3), ball, 2) < 1e-3);
}

TEST_CASE("non-isotropic dilation is J at the dilated point, conjugated") {
  const AlmostComplexStructure J = affine_structure(0.3);
  const double delta = 0.04;
  const AlmostComplexStructure Jd = nonisotropic_dilate(J, delta, 1);
  const Vec w = (Vec(4) << 0.5, -0.3, 0.2, 0.1).finished();
  const Mat D = dilation_matrix(2, delta, 1);
  const Vec x = D.inverse() * w;
  CHECK(std::abs(x(0) - std::sqrt(delta) * w(0)) < 1e-15);
  CHECK(std::abs(x(2) - delta * w(2)) < 1e-15);
  CHECK((Jd(w) - D * J(x) * D.inverse()).norm() < 1e-12);
  CHECK((dilate_point(x, delta, 1) - w).norm() < 1e-14);
}
