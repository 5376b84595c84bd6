#include "akr/acs.hpp"

#include <algorithm>
#include <cmath>

namespace akr {

Mat standard_structure(int n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    J(2 * k + 1, 2 * k) = 1.0;
    J(2 * k, 2 * k + 1) = -1.0;
  }
  return J;
}

Mat conjugation_matrix(int n) {
  Mat C = Mat::Identity(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) C(2 * k + 1, 2 * k + 1) = -1.0;
  return C;
}

// ---------------------------------------------------------------- GridRegion

GridRegion GridRegion::box(int n, const Vec& lo, const Vec& hi, int count, double h) {
  GridRegion g;
  g.n = n;
  g.lo = lo;
  g.hi = hi;
  g.counts.assign(2 * n, count);
  g.h = h;
  g.shape = Shape::Box;
  g.center = 0.5 * (lo + hi);
  g.validate();
  return g;
}

GridRegion GridRegion::ball(const Vec& center, double outer, int count, double h, double inner) {
  GridRegion g;
  g.n = static_cast<int>(center.size()) / 2;
  g.lo = center.array() - outer;
  g.hi = center.array() + outer;
  g.counts.assign(center.size(), count);
  g.h = h;
  g.shape = Shape::Ball;
  g.center = center;
  g.outer_radius = outer;
  g.inner_radius = inner;
  g.validate();
  return g;
}

void GridRegion::validate() const {
  const int d = real_dim();
  if (n < 1) throw std::invalid_argument("grid region: complex dimension must be >= 1");
  if (lo.size() != d || hi.size() != d || static_cast<int>(counts.size()) != d)
    throw std::invalid_argument("grid region: box and counts must have 2n entries");
  for (int i = 0; i < d; ++i) {
    if (counts[i] < 3) throw std::invalid_argument("grid region: need >= 3 samples per axis");
    if (!(hi(i) > lo(i))) throw std::invalid_argument("grid region: empty box");
  }
  if (!(h > 0.0)) throw std::invalid_argument("grid region: step h must be positive");
  if (shape == Shape::Ball && !(outer_radius > inner_radius && inner_radius >= 0.0))
    throw std::invalid_argument("grid region: ball radii must satisfy 0 <= inner < outer");
}

bool GridRegion::contains(const Vec& x) const {
  if (shape == Shape::Box) {
    for (int i = 0; i < x.size(); ++i)
      if (x(i) < lo(i) || x(i) > hi(i)) return false;
    return true;
  }
  const double r = (x - center).norm();
  return r < outer_radius && (inner_radius > 0.0 ? r > inner_radius : true);
}

std::vector<Vec> GridRegion::points() const {
  validate();
  const int d = real_dim();
  std::vector<Vec> out;
  std::vector<int> idx(d, 0);
  Vec x(d);
  while (true) {
    for (int i = 0; i < d; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / (counts[i] - 1);
    if (contains(x)) out.push_back(x);
    int k = 0;
    while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == d) break;
  }
  if (out.empty()) throw std::invalid_argument("grid region: no samples inside the region");
  return out;
}

GridRegion GridRegion::refined(int extra_per_axis) const {
  GridRegion g = *this;
  for (int& c : g.counts) c += extra_per_axis;
  return g;
}

// --------------------------------------------------------------- structures

AlmostComplexStructure::AlmostComplexStructure(int n, Rule rule, DerivativeRule derivative,
                                               Smoothness smoothness, double fd_step)
    : n_(n),
      rule_(std::move(rule)),
      derivative_(std::move(derivative)),
      smoothness_(smoothness),
      fd_step_(fd_step) {
  if (n < 1) throw std::invalid_argument("structure: complex dimension must be >= 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("structure: fd step must be positive");
}

AlmostComplexStructure AlmostComplexStructure::standard(int n) {
  const Mat J = standard_structure(n);
  const int d = 2 * n;
  return AlmostComplexStructure(
      n, [J](const Vec&) { return J; },
      [d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(d, d)); });
}

AlmostComplexStructure AlmostComplexStructure::constant(const Mat& J) {
  const int d = static_cast<int>(J.rows());
  if (d % 2 != 0 || J.cols() != d) throw std::invalid_argument("structure matrix must be 2n x 2n");
  return AlmostComplexStructure(
      d / 2, [J](const Vec&) { return J; },
      [d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(d, d)); });
}

AlmostComplexStructure AlmostComplexStructure::conjugated(int n, Rule P, DerivativeRule dP) {
  const Mat Jst = standard_structure(n);
  auto rule = [P, Jst](const Vec& x) {
    const Mat p = P(x);
    return Mat(p * Jst * p.inverse());
  };
  auto deriv = [P, dP, Jst](const Vec& x) {
    const Mat p = P(x);
    const Mat pinv = p.inverse();
    const Mat J = p * Jst * pinv;
    std::vector<Mat> d = dP(x);
    for (Mat& m : d) {
      const Mat a = m * pinv;
      m = a * J - J * a;
    }
    return d;
  };
  return AlmostComplexStructure(n, rule, deriv);
}

std::vector<Mat> AlmostComplexStructure::derivative(const Vec& x) const {
  if (derivative_) return derivative_(x);
  const int d = real_dim();
  std::vector<Mat> out(d);
  Vec xp = x, xm = x;
  for (int k = 0; k < d; ++k) {
    xp(k) += fd_step_;
    xm(k) -= fd_step_;
    out[k] = (rule_(xp) - rule_(xm)) / (2.0 * fd_step_);
    xp(k) = x(k);
    xm(k) = x(k);
  }
  return out;
}

Mat AlmostComplexStructure::derivative_along(const Vec& x, const Vec& w) const {
  const std::vector<Mat> d = derivative(x);
  Mat out = Mat::Zero(real_dim(), real_dim());
  for (int k = 0; k < real_dim(); ++k)
    if (w(k) != 0.0) out += w(k) * d[k];
  return out;
}

Mat AlmostComplexStructure::second_derivative(const Vec& x, int i, int j, double h) const {
  Vec xp = x, xm = x;
  xp(j) += h;
  xm(j) -= h;
  return (derivative(xp)[i] - derivative(xm)[i]) / (2.0 * h);
}

// ------------------------------------------------------------------- charts

CoordinateChart CoordinateChart::affine(const Mat& L, const Vec& center) {
  const Mat Linv = L.inverse();
  CoordinateChart c;
  c.real_dim = static_cast<int>(L.rows());
  c.center = center;
  c.forward = [L, center](const Vec& x) { return Vec(L * (x - center)); };
  c.inverse = [Linv, center](const Vec& w) { return Vec(Linv * w + center); };
  c.jacobian = [L](const Vec&) { return L; };
  c.inverse_jacobian = [Linv](const Vec&) { return Linv; };
  c.linear = L;
  return c;
}

CoordinateChart CoordinateChart::identity(int real_dim) {
  return affine(Mat::Identity(real_dim, real_dim), Vec::Zero(real_dim));
}

CoordinateChart compose(const CoordinateChart& c2, const CoordinateChart& c1) {
  if (!c1.is_affine() || !c2.is_affine())
    throw std::invalid_argument("compose: only affine charts are supported");
  // c2(c1(x)) = L2 (L1 (x - p1) - p2) = L2 L1 (x - (p1 + L1^{-1} p2))
  const Mat L = (*c2.linear) * (*c1.linear);
  const Vec p = c1.center + c1.linear->inverse() * c2.center;
  return CoordinateChart::affine(L, p);
}

StructureReport validate_structure(const AlmostComplexStructure& J, const GridRegion& region,
                                   double tol) {
  if (region.real_dim() != J.real_dim())
    throw std::invalid_argument("validate_structure: region dimension mismatch");
  StructureReport rep;
  rep.tolerance = tol;
  const int d = J.real_dim();
  const Mat I = Mat::Identity(d, d);
  for (const Vec& x : region.points()) {
    Mat m;
    try {
      m = J(x);
    } catch (const std::exception& e) {
      throw NumericalError("structure evaluation failed at " + format_point(x) + ": " + e.what());
    }
    if (!m.allFinite()) throw NumericalError("structure not finite at " + format_point(x));
    const double r = (m * m + I).cwiseAbs().maxCoeff();
    if (rep.worst_point.size() == 0 || r > rep.max_residual) {
      rep.max_residual = r;
      rep.worst_point = x;
    }
  }
  rep.accepted = rep.max_residual <= tol;
  return rep;
}

CoordinateChart normalize_at_point(const AlmostComplexStructure& J, const Vec& p, double tol) {
  const int d = J.real_dim();
  const Mat Jp = J(p);
  const double residual = (Jp * Jp + Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  if (residual > tol)
    throw std::invalid_argument("normalize_at_point: J(p) fails the structure axiom at " +
                                format_point(p));
  // Columns b_1, J b_1, b_3, J b_3, ... with each b_{2k+1} taken from the
  // standard basis and orthogonalized against the J-invariant span so far.
  Mat P(d, d);
  int filled = 0;
  while (filled < d) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_vec;
    for (int e = 0; e < d; ++e) {
      Vec b = Vec::Unit(d, e);
      if (filled > 0) {
        const Eigen::HouseholderQR<Mat> qr(P.leftCols(filled));
        const Mat Q = qr.householderQ() * Mat::Identity(d, filled);
        b -= Q * (Q.transpose() * b);
      }
      const double nb = b.norm();
      if (nb > best_norm + 1e-12) {
        best = e;
        best_norm = nb;
        best_vec = b;
      }
    }
    if (best < 0 || best_norm < 1e-10)
      throw NumericalError("normalize_at_point: degenerate basis at " + format_point(p));
    if (filled > 0) best_vec /= best_norm;
    P.col(filled) = best_vec;
    P.col(filled + 1) = Jp * best_vec;
    filled += 2;
  }
  return CoordinateChart::affine(P.inverse(), p);
}

AlmostComplexStructure direct_image(const AlmostComplexStructure& J, const CoordinateChart& chart) {
  const int n = J.complex_dim();
  if (chart.is_affine()) {
    const Mat L = *chart.linear;
    const Mat Linv = L.inverse();
    if (!Linv.allFinite()) throw NumericalError("direct_image: singular chart");
    const Vec c = chart.center;
    auto rule = [J, L, Linv, c](const Vec& w) {
      return Mat(L * J(Linv * w + c) * Linv);
    };
    AlmostComplexStructure::DerivativeRule deriv;
    deriv = [J, L, Linv, c](const Vec& w) {
      const std::vector<Mat> dJ = J.derivative(Linv * w + c);
      const int d = static_cast<int>(L.rows());
      std::vector<Mat> out(d, Mat::Zero(d, d));
      for (int k = 0; k < d; ++k) {
        Mat acc = Mat::Zero(d, d);
        for (int i = 0; i < d; ++i)
          if (Linv(i, k) != 0.0) acc += Linv(i, k) * dJ[i];
        out[k] = L * acc * Linv;
      }
      return out;
    };
    return AlmostComplexStructure(n, rule, deriv, J.smoothness(), J.fd_step());
  }
  auto rule = [J, chart](const Vec& w) {
    const Vec x = chart.inverse(w);
    Mat dz;
    if (chart.inverse_jacobian) {
      const Mat di = chart.inverse_jacobian(w);
      Eigen::FullPivLU<Mat> lu(di);
      if (!lu.isInvertible()) throw NumericalError("direct_image: singular Jacobian at " + format_point(x));
      return Mat(lu.solve(Mat::Identity(di.rows(), di.cols())) * J(x) * di);
    }
    dz = chart.jacobian(x);
    Eigen::FullPivLU<Mat> lu(dz);
    if (!lu.isInvertible()) throw NumericalError("direct_image: singular Jacobian at " + format_point(x));
    return Mat(dz * J(x) * lu.inverse());
  };
  return AlmostComplexStructure(n, rule, {}, J.smoothness(), J.fd_step());
}

AlmostComplexStructure isotropic_rescale(const AlmostComplexStructure& J, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("isotropic_rescale: lambda must be positive");
  const int d = J.real_dim();
  return direct_image(J, CoordinateChart::affine(Mat::Identity(d, d) / lambda, Vec::Zero(d)));
}

Mat dilation_matrix(int n, double delta, int split) {
  if (!(delta > 0.0)) throw std::invalid_argument("dilation: delta must be positive");
  if (split < 0 || split >= n) throw std::invalid_argument("dilation: split index out of range");
  Mat L = Mat::Identity(2 * n, 2 * n) / std::sqrt(delta);
  L(2 * split, 2 * split) = 1.0 / delta;
  L(2 * split + 1, 2 * split + 1) = 1.0 / delta;
  return L;
}

Vec dilate_point(const Vec& z, double delta, int split) {
  return dilation_matrix(static_cast<int>(z.size()) / 2, delta, split) * z;
}

AlmostComplexStructure nonisotropic_dilate(const AlmostComplexStructure& J, double delta,
                                           int split) {
  const Mat L = dilation_matrix(J.complex_dim(), delta, split);
  return direct_image(J, CoordinateChart::affine(L, Vec::Zero(J.real_dim())));
}

double deformation_norm(const AlmostComplexStructure& J, const GridRegion& region, int order) {
  if (order < 0 || order > 2) throw std::invalid_argument("deformation_norm: order must be 0, 1 or 2");
  if (region.real_dim() != J.real_dim())
    throw std::invalid_argument("deformation_norm: region dimension mismatch");
  const int d = J.real_dim();
  const double h = region.h;
  if (order > 0) {
    for (int i = 0; i < d; ++i) {
      const double spacing = (region.hi(i) - region.lo(i)) / (region.counts[i] - 1);
      if (2.0 * h >= spacing)
        throw std::invalid_argument("deformation_norm: grid too coarse for order-k differences");
    }
  }
  const Mat Jst = standard_structure(J.complex_dim());
  double out = 0.0;
  for (const Vec& x : region.points()) {
    out = std::max(out, (J(x) - Jst).cwiseAbs().maxCoeff());
    if (order >= 1) {
      for (const Mat& m : J.derivative(x)) out = std::max(out, m.cwiseAbs().maxCoeff());
    }
    if (order >= 2) {
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          out = std::max(out, J.second_derivative(x, i, j, h).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

}  // namespace akr
