#include "akr/field.hpp"

#include "doctest.h"

#include <cmath>

using namespace akr;

namespace {

// Independent oracle: centered differences of a plain lambda.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-4) {
  const int d = static_cast<int>(x.size());
  Mat H(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += h, pp(j) += h;
      pm(i) += h, pm(j) -= h;
      mp(i) -= h, mp(j) += h;
      mm(i) -= h, mm(j) -= h;
      H(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
    }
  return H;
}

}  // namespace

TEST_CASE("jet arithmetic matches finite differences of the composed function") {
  const Vec x = (Vec(4) << 0.3, -0.2, 0.5, 0.1).finished();
  auto plain = [](const Vec& y) { return std::exp(0.5 * y.squaredNorm()) * std::log(2.0 + y(0)) + std::sqrt(1.0 + y(2) * y(2)); };
  ScalarField f = ScalarField::analytic(4, [](const Vec& y) {
    const Jet2 r2 = squared_distance(y, Vec::Zero(4));
    const Jet2 z = Jet2::coordinate(y, 2);
    return exp(r2 * 0.5) * log(2.0 + Jet2::coordinate(y, 0)) + sqrt(1.0 + square(z));
  });
  const Jet2 j = f.jet(x);
  CHECK(j.value == doctest::Approx(plain(x)).epsilon(1e-14));
  CHECK((j.grad - fd_gradient(plain, x)).norm() < 1e-8);
  CHECK((j.hess - fd_hessian(plain, x)).norm() < 1e-5);
}

TEST_CASE("reciprocal and quotient rules") {
  const Vec x = (Vec(2) << 0.7, -0.4).finished();
  auto plain = [](const Vec& y) { return y(0) / (1.0 + y(1) * y(1)); };
  ScalarField f = ScalarField::analytic(2, [](const Vec& y) {
    return Jet2::coordinate(y, 0) / (1.0 + square(Jet2::coordinate(y, 1)));
  });
  CHECK((f.gradient(x) - fd_gradient(plain, x)).norm() < 1e-9);
  CHECK((f.hessian(x) - fd_hessian(plain, x)).norm() < 1e-5);
}

TEST_CASE("sampled fields use centered differences with O(h^2) error") {
  auto plain = [](const Vec& y) { return std::sin(y(0)) * std::cos(y(1)); };
  const Vec x = (Vec(2) << 0.4, 0.9).finished();
  Mat exact(2, 2);
  exact << -std::sin(0.4) * std::cos(0.9), -std::cos(0.4) * std::sin(0.9), -std::cos(0.4) * std::sin(0.9),
      -std::sin(0.4) * std::cos(0.9);
  const double e1 = (ScalarField::sampled(2, plain, 1e-2).hessian(x) - exact).norm();
  const double e2 = (ScalarField::sampled(2, plain, 5e-3).hessian(x) - exact).norm();
  CHECK(e1 < 1e-4);
  CHECK(e2 < e1 / 3.0);
  CHECK_FALSE(ScalarField::sampled(2, plain).analytic_derivatives());
}

TEST_CASE("pullback_affine applies the chain rule") {
  Mat A(2, 2);
  A << 2.0, 1.0, 0.0, 3.0;
  const Vec b = (Vec(2) << 0.1, -0.2).finished();
  ScalarField u = squared_norm_field(2, Vec::Zero(2));
  ScalarField v = u.pullback_affine(A, b);
  const Vec y = (Vec(2) << 0.3, 0.5).finished();
  CHECK(v(y) == doctest::Approx((A * y + b).squaredNorm()));
  CHECK((v.hessian(y) - 2.0 * A.transpose() * A).norm() < 1e-12);
}

TEST_CASE("map, combine and field arithmetic") {
  ScalarField u = linear_field((Vec(2) << 1.0, 2.0).finished(), 0.5);
  ScalarField w = u.map([](const Jet2& j) { return j + square(j); });
  const Vec x = (Vec(2) << 0.2, -0.1).finished();
  const double t = 0.2 - 0.2 + 0.5;
  CHECK(w(x) == doctest::Approx(t + t * t));
  ScalarField s = (u + u) * 0.5 - u;
  CHECK(std::abs(s(x)) < 1e-15);
  ScalarField c = ScalarField::combine(u, squared_norm_field(2, Vec::Zero(2)), [](const Jet2& a, const Jet2& b) { return a * b; });
  CHECK(c(x) == doctest::Approx(t * x.squaredNorm()));
}

TEST_CASE("norm_field has unit gradient away from the center") {
  ScalarField r = norm_field(3, Vec::Zero(3));
  const Vec x = (Vec(3) << 0.3, 0.4, 1.2).finished();
  CHECK(r.gradient(x).norm() == doctest::Approx(1.0));
  CHECK(r(x) == doctest::Approx(1.3));
}

TEST_CASE("format_point") { CHECK(format_point((Vec(2) << 1.0, -0.5).finished()) == "(1, -0.5)"); }
