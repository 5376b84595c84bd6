#include "akr/field.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace akr {

std::string format_point(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x(i));
    os << (i ? ", " : "") << buf;
  }
  os << ")";
  return os.str();
}

Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value);
  return compose(a, e, e, e);
}

Jet2 log(const Jet2& a) {
  if (!(a.value > 0.0)) throw NumericalError("log of nonpositive jet value");
  const double inv = 1.0 / a.value;
  return compose(a, std::log(a.value), inv, -inv * inv);
}

Jet2 sqrt(const Jet2& a) {
  if (!(a.value > 0.0)) throw NumericalError("sqrt of nonpositive jet value");
  const double s = std::sqrt(a.value);
  return compose(a, s, 0.5 / s, -0.25 / (s * a.value));
}

Jet2 square(const Jet2& a) { return compose(a, a.value * a.value, 2.0 * a.value, 2.0); }

Jet2 reciprocal(const Jet2& a) {
  if (a.value == 0.0) throw NumericalError("reciprocal of zero jet value");
  const double inv = 1.0 / a.value;
  return compose(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet2 squared_distance(const Vec& x, const Vec& c) {
  const Vec d = x - c;
  const int n = static_cast<int>(x.size());
  return {d.squaredNorm(), 2.0 * d, 2.0 * Mat::Identity(n, n)};
}

Jet2 distance(const Vec& x, const Vec& c) { return sqrt(squared_distance(x, c)); }

ScalarField ScalarField::analytic(int dim, JetRule rule) {
  ScalarField f;
  f.dim_ = dim;
  f.analytic_ = true;
  f.jet_rule_ = std::move(rule);
  return f;
}

ScalarField ScalarField::sampled(int dim, ValueRule rule, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  ScalarField f;
  f.dim_ = dim;
  f.analytic_ = false;
  f.h_ = h;
  f.value_rule_ = std::move(rule);
  return f;
}

ScalarField ScalarField::with_value(ValueRule fast) const {
  ScalarField f = *this;
  f.value_rule_ = std::move(fast);
  return f;
}

double ScalarField::operator()(const Vec& x) const {
  if (value_rule_) return value_rule_(x);
  return jet_rule_(x).value;
}

Jet2 ScalarField::jet(const Vec& x) const {
  if (jet_rule_) return jet_rule_(x);
  const int n = dim_;
  const double h = h_;
  const double f0 = value_rule_(x);
  Vec g(n);
  Mat H(n, n);
  Vec xp = x, xm = x;
  std::vector<double> fp(n), fm(n);
  for (int i = 0; i < n; ++i) {
    xp(i) += h;
    xm(i) -= h;
    fp[i] = value_rule_(xp);
    fm[i] = value_rule_(xm);
    xp(i) = x(i);
    xm(i) = x(i);
    g(i) = (fp[i] - fm[i]) / (2.0 * h);
    H(i, i) = (fp[i] - 2.0 * f0 + fm[i]) / (h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vec y = x;
      y(i) += h;
      y(j) += h;
      const double fpp = value_rule_(y);
      y(j) -= 2.0 * h;
      const double fpm = value_rule_(y);
      y(i) -= 2.0 * h;
      const double fmm = value_rule_(y);
      y(j) += 2.0 * h;
      const double fmp = value_rule_(y);
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return {f0, std::move(g), std::move(H)};
}

ScalarField ScalarField::pullback_affine(const Mat& A, const Vec& b) const {
  ScalarField base = *this;
  const int new_dim = static_cast<int>(A.cols());
  ScalarField f;
  f.dim_ = new_dim;
  f.analytic_ = analytic_;
  f.h_ = h_;
  f.jet_rule_ = [base, A, b](const Vec& y) {
    Jet2 j = base.jet(A * y + b);
    return Jet2{j.value, A.transpose() * j.grad, A.transpose() * j.hess * A};
  };
  if (value_rule_) f.value_rule_ = [base, A, b](const Vec& y) { return base(A * y + b); };
  return f;
}

ScalarField ScalarField::map(std::function<Jet2(const Jet2&)> op) const {
  ScalarField base = *this;
  ScalarField f;
  f.dim_ = dim_;
  f.analytic_ = analytic_;
  f.h_ = h_;
  f.jet_rule_ = [base, op](const Vec& x) { return op(base.jet(x)); };
  return f;
}

ScalarField ScalarField::combine(const ScalarField& a, const ScalarField& b,
                                 std::function<Jet2(const Jet2&, const Jet2&)> op) {
  if (a.dim() != b.dim()) throw std::invalid_argument("field dimensions differ");
  ScalarField f;
  f.dim_ = a.dim();
  f.analytic_ = a.analytic_ && b.analytic_;
  f.h_ = std::min(a.h_, b.h_);
  f.jet_rule_ = [a, b, op](const Vec& x) { return op(a.jet(x), b.jet(x)); };
  return f;
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  return combine(*this, o, [](const Jet2& p, const Jet2& q) { return p + q; });
}
ScalarField ScalarField::operator-(const ScalarField& o) const {
  return combine(*this, o, [](const Jet2& p, const Jet2& q) { return p - q; });
}
ScalarField ScalarField::operator*(double s) const {
  return map([s](const Jet2& j) { return j * s; });
}

ScalarField squared_norm_field(int dim, const Vec& center) {
  return ScalarField::analytic(dim, [center](const Vec& x) { return squared_distance(x, center); });
}

ScalarField norm_field(int dim, const Vec& center) {
  return ScalarField::analytic(dim, [center](const Vec& x) { return distance(x, center); });
}

ScalarField linear_field(const Vec& coefficients, double offset) {
  const int n = static_cast<int>(coefficients.size());
  return ScalarField::analytic(n, [coefficients, offset, n](const Vec& x) {
    return Jet2{coefficients.dot(x) + offset, coefficients, Mat::Zero(n, n)};
  });
}

}  // namespace akr
