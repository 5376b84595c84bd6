#include "akr/disc.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace akr {

CVec to_complex(const Vec& x) {
  if (x.size() % 2) throw std::invalid_argument("to_complex: odd real dimension");
  const int n = static_cast<int>(x.size()) / 2;
  CVec z(n);
  for (int k = 0; k < n; ++k) z(k) = Complex(x(2 * k), x(2 * k + 1));
  return z;
}

Vec to_real(const CVec& z) {
  Vec x(2 * z.size());
  for (int k = 0; k < z.size(); ++k) {
    x(2 * k) = z(k).real();
    x(2 * k + 1) = z(k).imag();
  }
  return x;
}

Mat real_form(const CMat& A) {
  Mat R(2 * A.rows(), 2 * A.cols());
  for (int k = 0; k < A.rows(); ++k)
    for (int l = 0; l < A.cols(); ++l) {
      R(2 * k, 2 * l) = A(k, l).real();
      R(2 * k, 2 * l + 1) = -A(k, l).imag();
      R(2 * k + 1, 2 * l) = A(k, l).imag();
      R(2 * k + 1, 2 * l + 1) = A(k, l).real();
    }
  return R;
}

void DiscGrid::validate() const {
  if (radial < 4) throw std::invalid_argument("DiscGrid: need at least 4 radial nodes");
  if (angular < 8 || (angular & (angular - 1)))
    throw std::invalid_argument("DiscGrid: angular count must be a power of two >= 8");
  if (!(radius > 0.0)) throw std::invalid_argument("DiscGrid: radius must be positive");
}

// ------------------------------------------------------------------ CR data

CMat cr_matrix(const Mat& J) {
  const int d = static_cast<int>(J.rows());
  const int n = d / 2;
  const Mat I = Mat::Identity(d, d);
  const Mat K = standard_structure(n) * J;
  Eigen::FullPivLU<Mat> lu(I - K);
  if (!lu.isInvertible() || lu.rcond() < 1e-10)
    throw NumericalError("cr_matrix: structure too far from J_st (I - J_st J singular)");
  const Mat M = -(I + K) * lu.inverse();
  const Mat R = M * conjugation_matrix(n);
  CMat Q(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) Q(k, l) = Complex(R(2 * k, 2 * l), R(2 * k + 1, 2 * l));
  const double nrm = Eigen::JacobiSVD<CMat>(Q).singularValues()(0);
  if (!(nrm < 1.0)) {
    std::ostringstream os;
    os << "cr_matrix: anti-linear part not dominated, |Q| = " << nrm;
    throw NumericalError(os.str());
  }
  return Q;
}

Mat structure_from_cr(const CMat& Q) {
  const int n = static_cast<int>(Q.rows());
  const int d = 2 * n;
  const Mat I = Mat::Identity(d, d);
  const Mat M = real_form(Q) * conjugation_matrix(n);
  Eigen::FullPivLU<Mat> lu(M - I);
  if (!lu.isInvertible()) throw NumericalError("structure_from_cr: |Q| too large");
  const Mat K = (I + M) * lu.inverse();
  return -standard_structure(n) * K;
}

CRCoefficients cr_coefficients(const AlmostComplexStructure& J) {
  CRCoefficients out;
  out.n = J.complex_dim();
  out.Q = [J](const Vec& x) { return cr_matrix(J(x)); };
  return out;
}

// ------------------------------------------------------------------ spectral

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.resize(m);
  w.resize(m);
  for (int i = 0; i < m; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

DiscSpectral::DiscSpectral(int radial, int angular) : nr_(radial), nt_(angular) {
  DiscGrid{radial, angular, 1.0}.validate();
  r_.resize(nr_);
  bary_w_.resize(nr_);
  for (int i = 0; i < nr_; ++i) {
    const double a = (2.0 * i + 1.0) * M_PI / (2.0 * nr_);
    r_[i] = 0.5 * (1.0 - std::cos(a));
    bary_w_[i] = (i % 2 ? -1.0 : 1.0) * std::sin(a);
  }
  diff_ = Mat::Zero(nr_, nr_);
  for (int i = 0; i < nr_; ++i) {
    double s = 0.0;
    for (int j = 0; j < nr_; ++j) {
      if (i == j) continue;
      diff_(i, j) = (bary_w_[j] / bary_w_[i]) / (r_[i] - r_[j]);
      s += diff_(i, j);
    }
    diff_(i, i) = -s;
  }

  std::vector<double> gx, gw, hx, hw;
  gauss_legendre(24, gx, gw);
  gauss_legendre(48, hx, hw);
  const int slots = nt_ - 1;  // modes m in (-nt/2, nt/2)
  cauchy_.assign(slots, Mat());
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    if (mode_slot(m + 1) < 0) continue;  // input mode not representable
    Mat W = Mat::Zero(nr_, nr_);
    for (int i = 0; i < nr_; ++i) {
      const double r = r_[i];
      if (m >= 0) {
        // -2 int_r^1 g(s) (r/s)^m ds on geometric panels
        double a = r;
        while (a < 1.0) {
          const double b = std::min(2.0 * a, 1.0);
          for (std::size_t q = 0; q < gx.size(); ++q) {
            const double s = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
            const double wt = 0.5 * (b - a) * gw[q] * std::pow(r / s, m);
            W.row(i) += (-2.0 * wt) * barycentric_row(s).transpose();
          }
          a = b;
        }
      } else {
        // 2 int_0^r g(s) (s/r)^{|m|} ds
        for (std::size_t q = 0; q < hx.size(); ++q) {
          const double s = 0.5 * r * (1.0 + hx[q]);
          const double wt = 0.5 * r * hw[q] * std::pow(s / r, -m);
          W.row(i) += (2.0 * wt) * barycentric_row(s).transpose();
        }
      }
    }
    cauchy_[mode_slot(m)] = W;
  }
}

std::shared_ptr<const DiscSpectral> DiscSpectral::cached(int radial, int angular) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const DiscSpectral>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{radial, angular}];
  if (!slot) slot = std::make_shared<DiscSpectral>(radial, angular);
  return slot;
}

double DiscSpectral::angle(int j) const { return 2.0 * M_PI * j / nt_; }

Complex DiscSpectral::point(int i, int j) const { return std::polar(r_[i], angle(j)); }

int DiscSpectral::signed_mode(int k) const { return k < nt_ / 2 ? k : k - nt_; }

int DiscSpectral::mode_slot(int m) const {
  if (m <= -nt_ / 2 || m >= nt_ / 2) return -1;
  return m + nt_ / 2 - 1;
}

Eigen::VectorXd DiscSpectral::barycentric_row(double r) const {
  Eigen::VectorXd row(nr_);
  for (int j = 0; j < nr_; ++j) {
    if (std::abs(r - r_[j]) < 1e-15) {
      row.setZero();
      row(j) = 1.0;
      return row;
    }
    row(j) = bary_w_[j] / (r - r_[j]);
  }
  return row / row.sum();
}

CMat DiscSpectral::to_modes(const CMat& f) const {
  // column slot(m) holds the coefficient of e^{i m theta}
  Eigen::FFT<double> fft;
  CMat c = CMat::Zero(nr_, nt_ - 1);
  std::vector<Complex> in(nt_), out(nt_);
  for (int i = 0; i < nr_; ++i) {
    for (int j = 0; j < nt_; ++j) in[j] = f(i, j);
    fft.fwd(out, in);
    for (int k = 0; k < nt_; ++k) {
      const int s = mode_slot(signed_mode(k));
      if (s >= 0) c(i, s) = out[k] / static_cast<double>(nt_);
    }
  }
  return c;
}

CMat DiscSpectral::from_modes(const CMat& c) const {
  Eigen::FFT<double> fft;
  CMat f(nr_, nt_);
  std::vector<Complex> in(nt_), out(nt_);
  for (int i = 0; i < nr_; ++i) {
    for (int k = 0; k < nt_; ++k) {
      const int s = mode_slot(signed_mode(k));
      in[k] = s >= 0 ? c(i, s) * static_cast<double>(nt_) : Complex(0.0);
    }
    fft.inv(out, in);
    for (int j = 0; j < nt_; ++j) f(i, j) = out[j];
  }
  return f;
}

CMat DiscSpectral::cauchy_green(const CMat& g) const {
  const CMat gc = to_modes(g);
  CMat uc = CMat::Zero(nr_, nt_ - 1);
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    const int in = mode_slot(m + 1);
    if (in < 0) continue;
    uc.col(mode_slot(m)) = cauchy_[mode_slot(m)].cast<Complex>() * gc.col(in);
  }
  CMat u = from_modes(uc);
  // fix the additive constant
  const Complex u0 = barycentric_row(0.0).cast<Complex>().dot(uc.col(mode_slot(0)));
  u.array() -= u0;
  return u;
}

CMat DiscSpectral::d_zeta(const CMat& f) const {
  const CMat c = to_modes(f);
  const CMat dc = diff_.cast<Complex>() * c;
  CMat out = CMat::Zero(nr_, nt_ - 1);
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    const int t = mode_slot(m - 1);
    if (t < 0) continue;
    const int s = mode_slot(m);
    for (int i = 0; i < nr_; ++i) out(i, t) = 0.5 * (dc(i, s) + double(m) * c(i, s) / r_[i]);
  }
  return from_modes(out);
}

CMat DiscSpectral::d_zetabar(const CMat& f) const {
  const CMat c = to_modes(f);
  const CMat dc = diff_.cast<Complex>() * c;
  CMat out = CMat::Zero(nr_, nt_ - 1);
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    const int t = mode_slot(m + 1);
    if (t < 0) continue;
    const int s = mode_slot(m);
    for (int i = 0; i < nr_; ++i) out(i, t) = 0.5 * (dc(i, s) - double(m) * c(i, s) / r_[i]);
  }
  return from_modes(out);
}

Complex DiscSpectral::evaluate(const CMat& f, Complex zeta) const {
  const double r = std::abs(zeta);
  if (r > 1.0 + 1e-12) throw std::invalid_argument("DiscSpectral::evaluate: point outside the unit disc");
  const CMat c = to_modes(f);
  const Eigen::VectorXcd row = barycentric_row(r).cast<Complex>();
  const double th = std::arg(zeta);
  Complex out = 0.0;
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    const Complex cm = (row.transpose() * c.col(mode_slot(m)))(0);
    if (m != 0 && r == 0.0) continue;
    out += cm * std::polar(1.0, m * th);
  }
  return out;
}

CMat DiscSpectral::evaluation_functional(Complex zeta) const {
  const double r = std::abs(zeta);
  if (r > 1.0 + 1e-12) throw std::invalid_argument("DiscSpectral: point outside the unit disc");
  const Eigen::VectorXd row = barycentric_row(r);
  const double th = std::arg(zeta);
  CMat E = CMat::Zero(nr_, nt_ - 1);
  for (int m = -nt_ / 2 + 1; m <= nt_ / 2 - 1; ++m) {
    if (m != 0 && r == 0.0) continue;
    E.col(mode_slot(m)) = row.cast<Complex>() * std::polar(1.0, m * th);
  }
  return E;
}

Complex DiscSpectral::value_at_origin(const CMat& f) const {
  const CMat c = to_modes(f);
  return (barycentric_row(0.0).cast<Complex>().transpose() * c.col(mode_slot(0)))(0);
}

// ------------------------------------------------------------------ discs

namespace {

CVec seed_value(const CVec& W, Complex beta, Complex xi) { return W * (xi / (1.0 + beta * xi)); }
CVec seed_derivative(const CVec& W, Complex beta, Complex xi) {
  const Complex d = 1.0 + beta * xi;
  return W / (d * d);
}

}  // namespace

Vec JHoloDisc::unit_value(Complex xi) const {
  CVec z = to_complex(center) + seed_value(to_complex(grid.radius * velocity), beta, xi);
  for (int k = 0; k < n(); ++k) z(k) += spectral->evaluate(correction[k], xi);
  return to_real(z);
}

Vec JHoloDisc::value(Complex zeta) const { return unit_value(zeta / grid.radius); }

std::vector<Vec> JHoloDisc::node_values() const {
  const CVec W = to_complex(grid.radius * velocity);
  const CVec c = to_complex(center);
  std::vector<Vec> out;
  for (int i = 0; i < spectral->radial(); ++i)
    for (int j = 0; j < spectral->angular(); ++j) {
      CVec z = c + seed_value(W, beta, spectral->point(i, j));
      for (int k = 0; k < n(); ++k) z(k) += correction[k](i, j);
      out.push_back(to_real(z));
    }
  return out;
}

std::vector<Vec> JHoloDisc::rim_values(int count) const {
  // modes evaluated once at r = 1, then summed per angle
  const CVec W = to_complex(grid.radius * velocity);
  const CVec c = to_complex(center);
  const int slots = spectral->angular() - 1;
  const CMat E1 = spectral->evaluation_functional(Complex(1.0, 0.0));
  std::vector<Eigen::VectorXcd> a;
  const Eigen::VectorXcd row = E1.col(slots / 2);  // m = 0 column holds the radial row
  for (int k = 0; k < n(); ++k) a.push_back(spectral->modes(correction[k]).transpose() * row);
  std::vector<Vec> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    const double th = 2.0 * M_PI * j / count;
    const Complex xi = std::polar(1.0, th);
    CVec z = c + seed_value(W, beta, xi);
    for (int k = 0; k < n(); ++k) {
      Complex s = 0.0;
      for (int m = 0; m < slots; ++m) s += a[k](m) * std::polar(1.0, (m - slots / 2) * th);
      z(k) += s;
    }
    out.push_back(to_real(z));
  }
  return out;
}

std::vector<CMat> JHoloDisc::unit_d_zeta() const {
  const CVec W = to_complex(grid.radius * velocity);
  std::vector<CMat> out;
  for (int k = 0; k < n(); ++k) {
    CMat d = spectral->d_zeta(correction[k]);
    for (int i = 0; i < spectral->radial(); ++i)
      for (int j = 0; j < spectral->angular(); ++j)
        d(i, j) += seed_derivative(W, beta, spectral->point(i, j))(k);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<CMat> JHoloDisc::unit_d_zetabar() const {
  std::vector<CMat> out;
  for (int k = 0; k < n(); ++k) out.push_back(spectral->d_zetabar(correction[k]));
  return out;
}

namespace {

// sup over nodes of |F_zetabar + Q(F) conj(F_zeta)|, and -Q(F) conj(F_zeta) per component.
double residual_and_rhs(const JHoloDisc& f, const AlmostComplexStructure& J, std::vector<CMat>* rhs,
                        std::string* failure) {
  const DiscSpectral& sp = *f.spectral;
  const int n = f.n();
  const std::vector<Vec> x = f.node_values();
  const std::vector<CMat> fz = f.unit_d_zeta();
  const std::vector<CMat> fzb = f.unit_d_zetabar();
  if (rhs) rhs->assign(n, CMat::Zero(sp.radial(), sp.angular()));
  double res = 0.0;
  int idx = 0;
  for (int i = 0; i < sp.radial(); ++i)
    for (int j = 0; j < sp.angular(); ++j, ++idx) {
      if (!x[idx].allFinite()) {
        if (failure) *failure = "disc left the chart (non-finite value)";
        return std::numeric_limits<double>::infinity();
      }
      CMat Q;
      try {
        Q = cr_matrix(J(x[idx]));
      } catch (const std::exception& e) {
        if (failure) *failure = std::string(e.what()) + " at " + format_point(x[idx]);
        return std::numeric_limits<double>::infinity();
      }
      CVec dz(n), dzb(n);
      for (int k = 0; k < n; ++k) {
        dz(k) = fz[k](i, j);
        dzb(k) = fzb[k](i, j);
      }
      const CVec g = -Q * dz.conjugate();
      res = std::max(res, (dzb - g).norm());
      if (rhs)
        for (int k = 0; k < n; ++k) (*rhs)[k](i, j) = g(k);
    }
  return res;
}

}  // namespace

DiscAttempt attempt_disc(const AlmostComplexStructure& J, const Vec& p, const Vec& v,
                         const DiscGrid& grid, const SolveOptions& options) {
  grid.validate();
  if (p.size() != J.real_dim() || v.size() != J.real_dim())
    throw std::invalid_argument("solve_disc: dimension mismatch");
  DiscAttempt out;
  JHoloDisc& f = out.disc;
  f.grid = grid;
  f.center = p;
  f.velocity = v;
  f.beta = options.beta;
  f.spectral = DiscSpectral::cached(grid.radial, grid.angular);
  const DiscSpectral& sp = *f.spectral;
  const int n = J.complex_dim();
  f.correction.assign(n, CMat::Zero(sp.radial(), sp.angular()));
  CMat xi(sp.radial(), sp.angular());
  for (int i = 0; i < sp.radial(); ++i)
    for (int j = 0; j < sp.angular(); ++j) xi(i, j) = sp.point(i, j);

  int rising = 0, since_best = 0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<CMat> best_correction = f.correction;
  auto finish_with_best = [&](SolveStatus status, const std::string& why) {
    out.status = status;
    out.diagnostic = why;
    if (best < f.residual) {
      f.correction = best_correction;
      f.residual = best;
    }
    return out;
  };
  for (int it = 0;; ++it) {
    std::vector<CMat> g;
    std::string failure;
    const double res = residual_and_rhs(f, J, &g, &failure);
    f.residual = res;
    f.iterations = it;
    if (!std::isfinite(res)) {
      out.status = SolveStatus::DomainEscape;
      out.diagnostic = failure;
      return out;
    }
    if (!f.residual_history.empty() && res > f.residual_history.back()) ++rising;
    else rising = 0;
    f.residual_history.push_back(res);
    if (res < best) {
      best = res;
      best_correction = f.correction;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (res <= options.tol) {
      out.status = SolveStatus::Converged;
      return out;
    }
    std::ostringstream os;
    if (rising >= 5 && res > 2.0 * best) {
      os << "residual rose over 5 successive iterates, last " << res << ", best " << best;
      return finish_with_best(SolveStatus::NonContraction, os.str());
    }
    if (since_best >= 8) {
      os << "residual stalled at " << best << " above tolerance " << options.tol
         << " (discretization floor)";
      return finish_with_best(SolveStatus::IterationLimit, os.str());
    }
    if (it >= options.max_iterations) {
      os << "no convergence in " << it << " iterations, residual " << res;
      return finish_with_best(SolveStatus::IterationLimit, os.str());
    }
    for (int k = 0; k < n; ++k) {
      const CMat w = sp.cauchy_green(g[k]);
      const Complex w0 = sp.value_at_origin(w);
      const Complex wx0 = sp.value_at_origin(sp.d_zeta(w)) + sp.value_at_origin(g[k]);
      f.correction[k] = (w.array() - w0 - xi.array() * wx0).matrix();
    }
  }
}

JHoloDisc solve_disc(const AlmostComplexStructure& J, const Vec& p, const Vec& v,
                     const DiscGrid& grid, const SolveOptions& options) {
  DiscGrid g = grid;
  std::string trail;
  for (int halvings = 0;; ++halvings) {
    DiscAttempt a = attempt_disc(J, p, v, g, options);
    if (a.status == SolveStatus::Converged) return std::move(a.disc);
    std::ostringstream os;
    os << " [radius " << g.radius << ": " << a.diagnostic << "]";
    trail += os.str();
    if (a.status != SolveStatus::NonContraction || !options.allow_halving ||
        halvings >= options.max_halvings)
      throw NumericalError("solve_disc failed at " + format_point(p) + trail);
    g.radius *= 0.5;
  }
}

double disc_residual(const JHoloDisc& f, const AlmostComplexStructure& J) {
  return residual_and_rhs(f, J, nullptr, nullptr);
}

SecondJet second_jet(const AlmostComplexStructure& J, const Vec& p, const Vec& v) {
  SecondJet s;
  const Mat Jp = J(p);
  s.f0 = p;
  s.fx = v;
  s.fy = Jp * v;
  s.fxx = Vec::Zero(v.size());
  s.fxy = J.derivative_along(p, v) * v;
  s.laplacian = J.derivative_along(p, s.fy) * v + Jp * s.fxy;
  s.fyy = s.laplacian - s.fxx;
  const Complex I(0.0, 1.0);
  const CVec cx = to_complex(s.fx), cy = to_complex(s.fy);
  s.f_zeta = 0.5 * (cx - I * cy);
  s.f_zetabar = 0.5 * (cx + I * cy);
  s.f_zetazeta = 0.25 * (to_complex(s.fxx) - to_complex(s.fyy) - 2.0 * I * to_complex(s.fxy));
  s.f_zetazetabar = 0.25 * to_complex(s.laplacian);
  return s;
}

SecondJet measured_jet(const JHoloDisc& f) {
  const DiscSpectral& sp = *f.spectral;
  const int n = f.n();
  const double rho = f.grid.radius;
  const CVec W = to_complex(rho * f.velocity);
  CVec z(n), zb(n), zz(n), zzb(n), zbzb(n);
  for (int k = 0; k < n; ++k) {
    const CMat& c = f.correction[k];
    const CMat cz = sp.d_zeta(c), czb = sp.d_zetabar(c);
    z(k) = W(k) + sp.value_at_origin(cz);
    zb(k) = sp.value_at_origin(czb);
    zz(k) = -2.0 * f.beta * W(k) + sp.value_at_origin(sp.d_zeta(cz));
    zzb(k) = sp.value_at_origin(sp.d_zetabar(cz));
    zbzb(k) = sp.value_at_origin(sp.d_zetabar(czb));
  }
  z /= rho;
  zb /= rho;
  zz /= rho * rho;
  zzb /= rho * rho;
  zbzb /= rho * rho;
  const Complex I(0.0, 1.0);
  SecondJet s;
  s.f0 = f.unit_value(0.0);
  s.fx = to_real(z + zb);
  s.fy = to_real(I * (z - zb));
  s.fxx = to_real(zz + 2.0 * zzb + zbzb);
  s.fyy = to_real(-zz + 2.0 * zzb - zbzb);
  s.fxy = to_real(I * (zz - zbzb));
  s.laplacian = to_real(4.0 * zzb);
  s.f_zeta = z;
  s.f_zetabar = zb;
  s.f_zetazeta = zz;
  s.f_zetazetabar = zzb;
  return s;
}

}  // namespace akr
