#include "akr/disc.hpp"
#include "akr/models.hpp"

#include "doctest.h"

#include <cmath>

using namespace akr;

namespace {

// Independent check of the J-holomorphy: J(f) f_x = f_y by centered differences.
double cr_defect(const JHoloDisc& f, const AlmostComplexStructure& J, double rho) {
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 12; ++k) {
    const Complex z = std::polar(rho, 2 * M_PI * k / 12.0);
    const Vec fx = (f.value(z + h) - f.value(z - h)) / (2 * h);
    const Vec fy = (f.value(z + Complex(0, h)) - f.value(z - Complex(0, h))) / (2 * h);
    worst = std::max(worst, (J(f.value(z)) * fx - fy).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("complex conversions") {
  const Vec x = (Vec(4) << 1, 2, 3, 4).finished();
  const CVec z = to_complex(x);
  CHECK(z(1) == Complex(3, 4));
  CHECK((to_real(z) - x).norm() == 0.0);
  CMat A(2, 2);
  A << Complex(1, 2), Complex(0, -1), Complex(0.5, 0), Complex(2, 1);
  CHECK((real_form(A) * x - to_real(A * z)).norm() < 1e-14);
  CHECK(cr_matrix(standard_structure(2)).norm() < 1e-14);
}

TEST_CASE("cr matrix round trip") {
  CMat Q(2, 2);
  Q << Complex(0.1, 0.05), Complex(0, -0.02), Complex(0.03, 0), Complex(-0.1, 0.1);
  const Mat J = structure_from_cr(Q);
  CHECK((J * J + Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK((cr_matrix(J) - Q).norm() < 1e-12);
}

TEST_CASE("spectral operators on polynomials") {
  const DiscSpectral s(16, 32);
  CMat f(s.radial(), s.angular()), g(s.radial(), s.angular());
  for (int i = 0; i < s.radial(); ++i)
    for (int j = 0; j < s.angular(); ++j) {
      const Complex z = s.point(i, j);
      f(i, j) = z * z + std::conj(z) * z;
      g(i, j) = 1.0;
    }
  const Complex z0(0.3, -0.4);
  CHECK(std::abs(s.evaluate(f, z0) - (z0 * z0 + std::norm(z0))) < 1e-10);
  CHECK(std::abs(s.evaluate(s.d_zeta(f), z0) - (2.0 * z0 + std::conj(z0))) < 1e-8);
  CHECK(std::abs(s.evaluate(s.d_zetabar(f), z0) - z0) < 1e-8);
  const CMat Tg = s.cauchy_green(g);
  CHECK(std::abs(s.value_at_origin(Tg)) < 1e-12);
  CHECK((s.d_zetabar(Tg) - g).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("standard structure discs are affine and exact after one iteration") {
  const AlmostComplexStructure J = AlmostComplexStructure::standard(2);
  const Vec p = (Vec(4) << 0.1, 0.2, -0.3, 0.0).finished();
  const Vec v = (Vec(4) << 0.5, 0.0, 0.2, -0.1).finished();
  const JHoloDisc f = solve_disc(J, p, v, DiscGrid{16, 32, 0.3});
  CHECK(f.iterations <= 1);
  CHECK(f.residual < 1e-12);
  const Complex z(0.1, 0.2);
  const Vec expect = p + z.real() * v + z.imag() * (standard_structure(2) * v);
  CHECK((f.value(z) - expect).norm() < 1e-12);
}

TEST_CASE("discs for the deformed ball satisfy the CR system") {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.05"}}, false);
  const AlmostComplexStructure& J = m.domain.J;
  const Vec p = Vec::Zero(4);
  const Vec v = (Vec(4) << 1.0, 0.0, 0.0, 0.0).finished();
  const JHoloDisc f = solve_disc(J, p, v, DiscGrid{16, 32, 0.3}, {1e-12, 50, 0, false});
  CHECK(f.residual < 1e-8);
  CHECK(f.iterations <= 50);
  CHECK(disc_residual(f, J) < 1e-8);
  CHECK((f.value(0.0) - p).norm() < 1e-12);
  CHECK(cr_defect(f, J, 0.15) < 1e-7);
  CHECK(cr_defect(f, J, 0.28) < 1e-7);
}

TEST_CASE("second jet of a disc") {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.1"}, {"profile", "linear"}}, false);
  const AlmostComplexStructure& J = m.domain.J;
  const Vec p = (Vec(4) << 0.2, -0.1, 0.1, 0.3).finished();
  const Vec v = (Vec(4) << 0.3, 0.4, -0.2, 0.1).finished();
  const SecondJet jet = second_jet(J, p, v);
  CHECK((jet.fy - J(p) * v).norm() < 1e-14);
  CHECK(jet.fxx.norm() < 1e-14);
  // oracle: differentiating J(f) f_x = f_y along x and y at 0
  const double h = 1e-6;
  const Mat dJx = (J(p + h * v) - J(p - h * v)) / (2 * h);
  CHECK((jet.fxy - (dJx * v + J(p) * jet.fxx)).norm() < 1e-6);
  const JHoloDisc f = solve_disc(J, p, v, DiscGrid{16, 32, 0.2}, {1e-13, 50, 0, false});
  const SecondJet measured = measured_jet(f);
  CHECK((measured.fx - v).norm() < 1e-8);
  CHECK((measured.laplacian - jet.laplacian).norm() < 1e-5);
}
