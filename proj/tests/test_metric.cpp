#include "akr/metric.hpp"
#include "akr/models.hpp"

#include "doctest.h"

#include <cmath>

using namespace akr;

namespace {

Vec e(int d, int k, double s = 1.0) {
  Vec v = Vec::Zero(d);
  v(k) = s;
  return v;
}

}  // namespace

TEST_CASE("unit disc: upper bound at the center is |v|") {
  const ModelInstance m = build_model("unit-ball", {{"n", "1"}});
  const UpperBound ub = kr_upper(m.domain, Vec::Zero(2), e(2, 0));
  REQUIRE(ub.finite());
  CHECK(ub.alpha == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(ub.witness);
}

TEST_CASE("unit ball: normal and tangential upper bounds") {
  const ModelInstance m = build_model("unit-ball");
  const double t = 0.5;
  const Vec p = e(4, 2, t);
  // closed forms for the ball: 1/(1-t^2) normal, (1-t^2)^{-1/2} tangential
  const UpperBound nrm = kr_upper(m.domain, p, e(4, 2));
  const UpperBound tan = kr_upper(m.domain, p, e(4, 0));
  CHECK(nrm.alpha == doctest::Approx(1.0 / (1 - t * t)).epsilon(0.02));
  CHECK(tan.alpha == doctest::Approx(1.0 / std::sqrt(1 - t * t)).epsilon(0.02));
  CHECK(nrm.alpha >= 1.0 / (1 - t * t) * (1 - 1e-6));
  const UpperBound twice = kr_upper(m.domain, p, e(4, 2, 2.0));
  CHECK(twice.alpha == doctest::Approx(2.0 * nrm.alpha).epsilon(1e-3));
}

TEST_CASE("lower bounds sit below the upper bounds on the ball") {
  const ModelInstance m = build_model("unit-ball");
  const DomainSpec& D = m.domain;
  const ScalarField u = D.rho;
  const GridRegion U = GridRegion::ball(Vec::Zero(4), 1.2, 9);
  const Vec p = e(4, 2, -0.3);
  const LowerCertificate cert = certify_lower(D, u, U, {p});
  REQUIRE(cert.certified);
  CHECK(cert.center_index(p) == 0);
  CHECK(cert.center_index(Vec::Zero(4)) == -1);
  for (const Vec& v : {e(4, 0), e(4, 2), Vec(e(4, 1) + e(4, 3))}) {
    const double lo = kr_lower_sibony(D, p, v, cert);
    const double up = kr_upper(D, p, v).alpha;
    CHECK(lo > 0.0);
    CHECK(lo <= up);
    CHECK(kr_lower_sibony(D, p, 2.0 * v, cert) == doctest::Approx(2.0 * lo));
  }
  CHECK(localization_factor(D, U, U, p, cert) == 1.0);
}

TEST_CASE("boundary bracket matches its closed form on the ball") {
  const ModelInstance m = build_model("unit-ball");
  const Vec p = e(4, 2, 0.6);
  const Vec v = (Vec(4) << 0.3, -0.2, 0.5, 0.1).finished();
  // rho = |z|^2 - 1, del rho(v) = 2 <v, p>_C conjugated onto the real form
  const Complex zp(p(2), p(3)), zv(v(2), v(3)), wv(v(0), v(1));
  const Complex drho = 2.0 * (std::conj(Complex(p(0), p(1))) * wv + std::conj(zp) * zv);
  const double r = p.squaredNorm() - 1.0;
  CHECK(boundary_bracket(m.domain, p, v) == doctest::Approx(std::norm(drho) / (r * r) + v.squaredNorm() / std::abs(r)));
}

TEST_CASE("calibration picks the smallest ratio") {
  const ModelInstance m = build_model("unit-ball");
  std::vector<CalibrationSample> s;
  for (double t : {0.2, 0.5, 0.8}) {
    const Vec p = e(4, 2, t);
    s.push_back({p, e(4, 2), 0.1 * std::sqrt(boundary_bracket(m.domain, p, e(4, 2)))});
  }
  s[1].lower *= 0.5;
  const Calibration c = calibrate_constant(m.domain, s);
  CHECK(c.argmin == 1);
  CHECK(c.c == doctest::Approx(0.05));
}

TEST_CASE("distance bounds bracket the Poincare distance") {
  const ModelInstance m = build_model("unit-ball", {{"n", "1"}});
  const Vec p = Vec::Zero(2), q = e(2, 0, 0.5);
  DistanceOptions opt;
  opt.steps = 16;
  opt.lower_constant = 1.0;  // K >= |v| on the unit disc
  const DistanceBounds b = distance_bounds(m.domain, p, q, {straight_path(p, q)}, opt);
  const double exact = std::atanh(0.5);
  CHECK(b.lower <= exact);
  CHECK(b.upper >= exact * (1 - 1e-6));
  CHECK(b.upper == doctest::Approx(exact).epsilon(0.01));
  CHECK(b.paths_used == 1);
}

TEST_CASE("fitted slope") {
  CHECK(fitted_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
}

TEST_CASE("sibony constant") {
  CHECK(sibony_constant(0.0, 5.0, 1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(sibony_constant(-0.5, 2.0, 1.0) == doctest::Approx(std::exp(-0.5 - 1.0)));
}
