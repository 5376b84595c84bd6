#include "akr/models.hpp"
#include "akr/scaling.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace akr;

namespace {

Vec random_vec(std::mt19937_64& rng, int d, double s) {
  std::uniform_real_distribution<double> u(-s, s);
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = u(rng);
  return x;
}

}  // namespace

TEST_CASE("foot points on the ball") {
  const ModelInstance m = build_model("unit-ball");
  const Vec p = (Vec(4) << 0.1, 0.0, -0.5, 0.2).finished();
  const FootPoint f = nearest_boundary(m.domain, p);
  CHECK((f.q - p / p.norm()).norm() < 1e-10);
  CHECK(f.delta == doctest::Approx(1.0 - p.norm()));
  const FootPoint a = adapted_foot_point(m.domain, p);
  CHECK((a.q - f.q).norm() < 1e-8);
}

TEST_CASE("the Siegel model is invariant under the scaling") {
  const ModelInstance m = build_model("siegel-model");
  const double alpha = 0.1;
  const ScalingSequence seq = scaling_sequence(m.domain, m.interior, {0.5, 0.1, 0.01}, alpha);
  CHECK(seq.limit_kind == "J_st");
  REQUIRE(seq.steps.size() == 3);
  const ScalarField prof = limit_profile(2);
  std::mt19937_64 rng(3);
  for (const ScaleStep& s : seq.steps) {
    CHECK((s.anchor - (Vec(4) << 0, 0, -alpha, 0).finished()).norm() < 1e-9);
    for (int k = 0; k < 5; ++k) {
      const Vec w = random_vec(rng, 4, 1.0);
      // Re w_n + |w'|^2 written out
      const double exact = w(2) + w(0) * w(0) + w(1) * w(1);
      CHECK(s.G.rho(w) == doctest::Approx(exact).epsilon(1e-8));
      CHECK(prof(w) == doctest::Approx(exact).epsilon(1e-14));
      CHECK(s.R(w) == doctest::Approx(exact + exact * exact).epsilon(1e-8));
    }
    CHECK(std::abs(s.R(s.anchor) - (-alpha + alpha * alpha)) < 1e-10);
  }
}

TEST_CASE("levi form of R at the origin of the Siegel model") {
  const ModelInstance m = build_model("siegel-model");
  const ScalingSequence seq = scaling_sequence(m.domain, m.interior, {0.1});
  const ScaleStep& s = seq.steps.front();
  const Vec v = (Vec(4) << 0.3, -0.4, 0.5, 0.2).finished();
  const double expect = v.head(2).squaredNorm() + 0.5 * v.tail(2).squaredNorm();
  CHECK(levi_form(s.R, s.G.J, Vec::Zero(4), v) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("scaled structures: boundary normalization and Levi invariance") {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.05"}}, false);
  const Vec p0 = (Vec(4) << 0, 0, -0.995, 0).finished();
  const ScalingSequence seq = geometric_sequence(m.domain, p0, 4);
  REQUIRE(seq.steps.size() == 4);
  const BoundaryChart& c = seq.chart;
  CHECK(std::abs(c.rho_n(Vec::Zero(4))) < 1e-12);
  CHECK((c.rho_n.gradient(Vec::Zero(4)) - Vec::Unit(4, 2)).norm() < 1e-8);
  CHECK((c.J_T(Vec::Zero(4)) - standard_structure(2)).norm() < 1e-10);
  std::mt19937_64 rng(5);
  for (const ScaleStep& s : seq.steps) {
    CHECK(s.delta == doctest::Approx(0.005 * std::pow(0.5, s.nu)).epsilon(1e-6));
    CHECK(s.G.rho(s.anchor) < 0.0);
    for (int k = 0; k < 3; ++k) {
      const Vec x = p0 + random_vec(rng, 4, 0.004);
      const Vec v = random_vec(rng, 4, 1.0);
      CHECK(levi_invariance_residual(m.domain.rho, m.domain.J, s.M, x, v) < 1e-6);
    }
  }
  const ConvergenceReport r = convergence_report(seq);
  CHECK(r.rows.size() == 4);
  CHECK(r.monotone);
  CHECK(r.decay_exponent > 0.3);
}

TEST_CASE("exponential defining function") {
  const ScalarField rho = linear_field((Vec(2) << 1.0, 0.0).finished(), -0.5);
  const ScalarField u = exponential_defining(rho, 2.0);
  const Vec x = (Vec(2) << 0.2, 0.7).finished();
  CHECK(u(x) == doctest::Approx(std::expm1(2.0 * (0.2 - 0.5))));
  CHECK(u.gradient(x)(0) == doctest::Approx(2.0 * std::exp(2.0 * (0.2 - 0.5))));
}
