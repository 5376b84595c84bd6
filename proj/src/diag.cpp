#include "akr/disc.hpp"

#include <cmath>
#include <sstream>

namespace akr {

namespace {

struct Leaf {
  CVec center;
  CVec W;
  std::vector<CMat> modes;
  const DiscSpectral* sp = nullptr;

  CVec value(Complex xi) const {
    const CMat E = sp->evaluation_functional(xi);
    CVec z = center + W * xi;
    for (std::size_t k = 0; k < modes.size(); ++k) z(k) += E.cwiseProduct(modes[k]).sum();
    return z;
  }
};

// Leaves through the points w e_{other} of the transversal axis, tangent to e_axis.
class LeafFamily {
 public:
  LeafFamily(const AlmostComplexStructure& J, int axis, const DiagonalizeOptions& opt, double R)
      : axis_(axis) {
    const int L = opt.labels;
    for (int j = 0; j < L; ++j) {
      labels_.push_back(R * std::cos(M_PI * j / (L - 1)));
      double w = j % 2 ? -1.0 : 1.0;
      if (j == 0 || j == L - 1) w *= 0.5;
      weights_.push_back(w);
    }
    sp_ = DiscSpectral::cached(opt.grid.radial, opt.grid.angular);
    Vec v = Vec::Zero(4);
    v(2 * axis) = opt.leaf_scale;
    W_ = to_complex(v);
    SolveOptions so;
    so.tol = opt.tol;
    so.max_iterations = 80;
    modes_.resize(L * L);
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        const Vec p = to_real(center_for(Complex(labels_[a], labels_[b])));
        DiscAttempt at = attempt_disc(J, p, v, opt.grid, so);
        if (at.status != SolveStatus::Converged && !(at.disc.residual <= 1e-9)) {
          throw NumericalError("diagonalize_dim4: leaf through " + format_point(p) +
                               " failed: " + at.diagnostic);
        }
        for (const CMat& c : at.disc.correction) modes_[a * L + b].push_back(sp_->modes(c));
      }
  }

  Leaf leaf(Complex w) const {
    const Eigen::VectorXd la = weights_for(w.real()), lb = weights_for(w.imag());
    const int L = static_cast<int>(labels_.size());
    Leaf out;
    out.center = center_for(w);
    out.W = W_;
    out.sp = sp_.get();
    out.modes.assign(2, CMat::Zero(sp_->radial(), sp_->angular() - 1));
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        const double c = la(a) * lb(b);
        if (c == 0.0) continue;
        for (int k = 0; k < 2; ++k) out.modes[k] += c * modes_[a * L + b][k];
      }
    return out;
  }

 private:
  CVec center_for(Complex w) const {
    CVec c = CVec::Zero(2);
    c(1 - axis_) = w;
    return c;
  }

  Eigen::VectorXd weights_for(double x) const {
    const int L = static_cast<int>(labels_.size());
    Eigen::VectorXd row(L);
    for (int j = 0; j < L; ++j) {
      if (std::abs(x - labels_[j]) < 1e-15) {
        row.setZero();
        row(j) = 1.0;
        return row;
      }
      row(j) = weights_[j] / (x - labels_[j]);
    }
    return row / row.sum();
  }

  int axis_;
  std::vector<double> labels_, weights_;
  std::shared_ptr<const DiscSpectral> sp_;
  CVec W_;
  std::vector<std::vector<CMat>> modes_;
};

Complex clamp_unit(Complex z) {
  const double r = std::abs(z);
  return r > 0.98 ? z * (0.98 / r) : z;
}

// Point on leaf1(Z2) and leaf2(Z1).
Vec intersect(const LeafFamily& f1, const LeafFamily& f2, const Vec& Z, double scale) {
  const CVec z = to_complex(Z);
  const Leaf l1 = f1.leaf(z(1)), l2 = f2.leaf(z(0));
  Complex xi1 = clamp_unit(z(0) / scale), xi2 = clamp_unit(z(1) / scale);
  auto F = [&](Complex a, Complex b) { return to_real(l1.value(a) - l2.value(b)); };
  Vec r = F(xi1, xi2);
  for (int it = 0; it < 40 && r.norm() > 1e-15; ++it) {
    const double h = 1e-7;
    Mat D(4, 4);
    const Complex dirs[4] = {{h, 0}, {0, h}, {h, 0}, {0, h}};
    for (int k = 0; k < 4; ++k) {
      const Vec rp = k < 2 ? F(xi1 + dirs[k], xi2) : F(xi1, xi2 + dirs[k]);
      const Vec rm = k < 2 ? F(xi1 - dirs[k], xi2) : F(xi1, xi2 - dirs[k]);
      D.col(k) = (rp - rm) / (2.0 * h);
    }
    const Vec step = D.fullPivLu().solve(-r);
    if (!step.allFinite()) throw NumericalError("diagonalize_dim4: singular intersection");
    xi1 = clamp_unit(xi1 + Complex(step(0), step(1)));
    xi2 = clamp_unit(xi2 + Complex(step(2), step(3)));
    r = F(xi1, xi2);
    if (step.norm() < 1e-15) break;
  }
  if (r.norm() > 1e-10)
    throw NumericalError("diagonalize_dim4: leaves do not meet near " + format_point(Z));
  return to_real(l1.value(xi1));
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& map, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Mat D(d, d);
  Vec xp = x, xm = x;
  for (int k = 0; k < d; ++k) {
    xp(k) += h;
    xm(k) -= h;
    D.col(k) = (map(xp) - map(xm)) / (2.0 * h);
    xp(k) = xm(k) = x(k);
  }
  return D;
}

}  // namespace

double off_diagonal_norm(const AlmostComplexStructure& J, const GridRegion& region) {
  if (J.complex_dim() != 2) throw std::invalid_argument("off_diagonal_norm: needs n = 2");
  double out = 0.0;
  for (const Vec& x : region.points()) {
    const Mat m = J(x);
    out = std::max({out, m.block(0, 2, 2, 2).cwiseAbs().maxCoeff(),
                    m.block(2, 0, 2, 2).cwiseAbs().maxCoeff()});
  }
  return out;
}

DiagonalChart diagonalize_dim4(const AlmostComplexStructure& J, const Vec& q, double radius,
                               const DiagonalizeOptions& options) {
  if (J.complex_dim() != 2) throw std::invalid_argument("diagonalize_dim4: needs complex dimension 2");
  if (!(radius > 0.0)) throw std::invalid_argument("diagonalize_dim4: radius must be positive");
  if (options.labels < 3) throw std::invalid_argument("diagonalize_dim4: need at least 3 labels");
  const CoordinateChart normal = normalize_at_point(J, q);
  const Mat L = *normal.linear;
  const Mat Linv = L.inverse();
  const AlmostComplexStructure J0 = direct_image(J, normal);

  DiagonalizeOptions opt = options;
  opt.label_radius = std::max(options.label_radius, 1.2 * radius);
  opt.leaf_scale = std::max(options.leaf_scale, 2.0 * radius);
  auto f1 = std::make_shared<LeafFamily>(J0, 0, opt, opt.label_radius);
  auto f2 = std::make_shared<LeafFamily>(J0, 1, opt, opt.label_radius);
  const double scale = opt.leaf_scale;

  auto phi_inv = [f1, f2, scale](const Vec& Z) { return intersect(*f1, *f2, Z, scale); };
  DiagonalChart out;
  CoordinateChart& c = out.chart;
  c.real_dim = 4;
  c.center = q;
  c.inverse = [phi_inv, Linv, q](const Vec& Z) { return Vec(q + Linv * phi_inv(Z)); };
  c.inverse_jacobian = [phi_inv, Linv](const Vec& Z) {
    return Mat(Linv * fd_jacobian(phi_inv, Z, 1e-5));
  };
  c.forward = [phi_inv, L, q](const Vec& x) {
    const Vec y = L * (x - q);
    Vec Z = y;
    for (int it = 0; it < 30; ++it) {
      const Vec r = phi_inv(Z) - y;
      if (r.norm() < 1e-14) break;
      Z -= fd_jacobian(phi_inv, Z, 1e-6).fullPivLu().solve(r);
    }
    return Z;
  };
  c.jacobian = [phi_inv, L, c](const Vec& x) {
    const Vec Z = c.forward(x);
    return Mat(fd_jacobian(phi_inv, Z, 1e-5).inverse() * L);
  };

  const AlmostComplexStructure image = direct_image(J, c);
  const GridRegion probe = GridRegion::ball(Vec::Zero(4), radius, 5);
  double off = off_diagonal_norm(image, probe);
  off = std::max(off, (image(Vec::Zero(4)) - standard_structure(2)).cwiseAbs().maxCoeff());
  out.off_diagonal = off;
  out.measured_radius = radius;
  if (off > options.diag_tol) {
    std::ostringstream os;
    os << "diagonalize_dim4: measured off-diagonal " << off << " exceeds " << options.diag_tol;
    throw NumericalError(os.str());
  }
  return out;
}

}  // namespace akr
