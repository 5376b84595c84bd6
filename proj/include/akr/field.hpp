#pragma once

// Second-order jets and scalar fields on real coordinate space R^{2n}.
//
// Coordinates are ordered (x_1, y_1, ..., x_n, y_n) with z_k = x_k + i y_k.
// Every field exposes a jet (value, gradient, Hessian). Fields built from
// analytic rules propagate exact derivatives through the arithmetic below;
// fields built from a bare value rule fall back to centered differences.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace akr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_point(const Vec& x);

struct Jet2 {
  double value = 0.0;
  Vec grad;
  Mat hess;

  Jet2() = default;
  Jet2(double v, Vec g, Mat h) : value(v), grad(std::move(g)), hess(std::move(h)) {}

  static Jet2 constant(double c, int dim) {
    return {c, Vec::Zero(dim), Mat::Zero(dim, dim)};
  }
  static Jet2 coordinate(const Vec& x, int i) {
    Vec g = Vec::Zero(x.size());
    g(i) = 1.0;
    return {x(i), std::move(g), Mat::Zero(x.size(), x.size())};
  }
  int dim() const { return static_cast<int>(grad.size()); }
};

// Chain rule for phi(a) given phi, phi', phi'' at a.value.
inline Jet2 compose(const Jet2& a, double f0, double f1, double f2) {
  return {f0, f1 * a.grad, f1 * a.hess + f2 * a.grad * a.grad.transpose()};
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.value + b.value, a.grad + b.grad, a.hess + b.hess};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.value - b.value, a.grad - b.grad, a.hess - b.hess};
}
inline Jet2 operator-(const Jet2& a) { return {-a.value, -a.grad, -a.hess}; }
inline Jet2 operator+(const Jet2& a, double c) { return {a.value + c, a.grad, a.hess}; }
inline Jet2 operator+(double c, const Jet2& a) { return a + c; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.value - c, a.grad, a.hess}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.value * c, a.grad * c, a.hess * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return a * c; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Mat cross = a.grad * b.grad.transpose();
  return {a.value * b.value, a.value * b.grad + b.value * a.grad,
          a.value * b.hess + b.value * a.hess + cross + cross.transpose()};
}

Jet2 exp(const Jet2& a);
Jet2 log(const Jet2& a);
Jet2 sqrt(const Jet2& a);
Jet2 square(const Jet2& a);
Jet2 reciprocal(const Jet2& a);
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

// |x - c|^2 as a jet.
Jet2 squared_distance(const Vec& x, const Vec& c);
// |x - c| as a jet; undefined at x = c.
Jet2 distance(const Vec& x, const Vec& c);

class ScalarField {
 public:
  using JetRule = std::function<Jet2(const Vec&)>;
  using ValueRule = std::function<double(const Vec&)>;

  ScalarField() = default;

  static ScalarField analytic(int dim, JetRule rule);
  // Derivatives by centered differences with step h.
  static ScalarField sampled(int dim, ValueRule rule, double h = 1e-3);

  int dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(jet_rule_) || static_cast<bool>(value_rule_); }
  bool analytic_derivatives() const { return analytic_; }
  double fd_step() const { return h_; }

  double operator()(const Vec& x) const;
  Jet2 jet(const Vec& x) const;
  Vec gradient(const Vec& x) const { return jet(x).grad; }
  Mat hessian(const Vec& x) const { return jet(x).hess; }

  // Same field with a cheaper value-only evaluator for operator().
  ScalarField with_value(ValueRule fast) const;

  // y -> u(A y + b).
  ScalarField pullback_affine(const Mat& A, const Vec& b) const;
  // Pointwise jet transform, e.g. [](const Jet2& j) { return j + square(j); }.
  ScalarField map(std::function<Jet2(const Jet2&)> op) const;
  static ScalarField combine(const ScalarField& a, const ScalarField& b,
                             std::function<Jet2(const Jet2&, const Jet2&)> op);

  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(double s) const;

 private:
  int dim_ = 0;
  bool analytic_ = false;
  double h_ = 1e-3;
  JetRule jet_rule_;
  ValueRule value_rule_;
};

// Frequently used fields.
ScalarField squared_norm_field(int dim, const Vec& center);
ScalarField norm_field(int dim, const Vec& center);
ScalarField linear_field(const Vec& coefficients, double offset = 0.0);

}  // namespace akr
