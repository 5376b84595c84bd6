#include "akr/scaling.hpp"

#include <cmath>
#include <sstream>

namespace akr {

namespace {

ScalarField scaled_field(const ScalarField& f, double c) {
  return f.map([c](const Jet2& j) { return j * c; }).with_value([f, c](const Vec& x) { return c * f(x); });
}

Vec adapted_normal(const Vec& g, const Mat& J) {
  const Vec k = J.transpose() * g;
  const double s = g.dot(J * g);
  const double t = k.squaredNorm();
  Vec m = t * g - s * k;
  if (m.dot(g) < 0.0) m = -m;
  return m.normalized();
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

FootPoint nearest_boundary(const DomainSpec& D, const Vec& p, double tol) {
  const int d = D.real_dim();
  Vec x = p;
  for (int it = 0; it < 50; ++it) {
    const Jet2 j = D.rho.jet(x);
    const double g2 = j.grad.squaredNorm();
    if (!(g2 > 0.0)) throw NumericalError("nearest_boundary: grad rho vanishes at " + format_point(x));
    x -= j.value / g2 * j.grad;
    if (std::abs(j.value) < 1e-6) break;
  }
  Jet2 j = D.rho.jet(x);
  double mu = -(x - p).dot(j.grad) / j.grad.squaredNorm();
  FootPoint out;
  for (int it = 0; it < 60; ++it) {
    j = D.rho.jet(x);
    Vec F(d + 1);
    F.head(d) = x - p + mu * j.grad;
    F(d) = j.value;
    out.iterations = it;
    if (F.norm() < tol) break;
    Mat Jac = Mat::Zero(d + 1, d + 1);
    Jac.topLeftCorner(d, d) = Mat::Identity(d, d) + mu * j.hess;
    Jac.topRightCorner(d, 1) = j.grad;
    Jac.bottomLeftCorner(1, d) = j.grad.transpose();
    const Vec step = Jac.fullPivLu().solve(-F);
    if (!step.allFinite()) throw NumericalError("nearest_boundary: singular Lagrange system");
    x += step.head(d);
    mu += step(d);
    if (step.norm() < tol) break;
  }
  if (std::abs(D.rho(x)) > 1e-10) throw NumericalError("nearest_boundary: no convergence from " + format_point(p));
  out.q = x;
  out.delta = (p - x).norm();
  out.normal = D.rho.gradient(x).normalized();
  return out;
}

FootPoint adapted_foot_point(const DomainSpec& D, const Vec& p, double tol) {
  if (!D.contains(p)) throw std::invalid_argument("adapted_foot_point: p must lie in D");
  const int d = D.real_dim();
  const FootPoint start = nearest_boundary(D, p, tol);
  auto residual = [&](const Vec& u) {
    const Vec q = u.head(d);
    const Vec m = adapted_normal(D.rho.gradient(q), D.J(q));
    Vec F(d + 1);
    F.head(d) = q - u(d) * m - p;
    F(d) = D.rho(q);
    return F;
  };
  Vec u(d + 1);
  u.head(d) = start.q;
  u(d) = start.delta;
  FootPoint out;
  Vec F = residual(u);
  for (int it = 0; it < 40 && F.norm() > tol; ++it) {
    const double h = 1e-7;
    Mat Jac(d + 1, d + 1);
    for (int k = 0; k <= d; ++k) {
      Vec up = u, um = u;
      up(k) += h;
      um(k) -= h;
      Jac.col(k) = (residual(up) - residual(um)) / (2.0 * h);
    }
    const Vec step = Jac.fullPivLu().solve(-F);
    if (!step.allFinite()) throw NumericalError("adapted_foot_point: singular system");
    u += step;
    F = residual(u);
    out.iterations = it + 1;
    if (step.norm() < tol) break;
  }
  if (F.norm() > 1e-9) throw NumericalError("adapted_foot_point: no convergence from " + format_point(p));
  out.q = u.head(d);
  out.delta = u(d);
  out.normal = adapted_normal(D.rho.gradient(out.q), D.J(out.q));
  return out;
}

BoundaryChart boundary_normalize(const DomainSpec& D, const Vec& q, const Vec& normal,
                                 bool normalize_structure) {
  const int n = D.n(), d = 2 * n, t = d - 2;
  const Mat Jq = normalize_structure ? D.J(q) : standard_structure(n);
  const Vec g = D.rho.gradient(q);
  const double gamma = g.dot(normal);
  if (!(gamma > 0.0)) throw std::invalid_argument("boundary_normalize: normal must point out of D");
  if (std::abs(g.dot(Jq * normal)) > 1e-8 * g.norm())
    throw std::invalid_argument("boundary_normalize: normal is not adapted to J(q)");

  // Orthonormal basis of the span of g and J^T g; the complex tangent space is its complement.
  Mat span(d, 2);
  span << g, Jq.transpose() * g;
  Eigen::HouseholderQR<Mat> qr(span);
  Mat chosen = Mat(qr.householderQ()).leftCols(2);
  Mat Linv(d, d);
  for (int k = 0; k < t / 2; ++k) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_vec;
    for (int i = 0; i < d; ++i) {
      Vec e = Vec::Unit(d, i);
      e -= chosen * (chosen.transpose() * e);
      if (e.norm() > best_norm) {
        best_norm = e.norm();
        best = i;
        best_vec = e;
      }
    }
    if (best < 0 || best_norm < 1e-8) throw NumericalError("boundary_normalize: degenerate tangent space");
    const Vec b = best_vec / best_norm;
    Linv.col(2 * k) = b;
    Linv.col(2 * k + 1) = Jq * b;
    Mat grown(d, chosen.cols() + 2);
    grown << chosen, b, Jq * b;
    chosen = Eigen::HouseholderQR<Mat>(grown).householderQ() * Mat::Identity(d, grown.cols());
  }
  Linv.col(t) = normal;
  Linv.col(t + 1) = Jq * normal;
  Mat T = Linv.inverse();

  BoundaryChart out;
  out.q = q;
  out.normal = normal;
  out.gamma = gamma;
  if (t > 0) {
    const ScalarField base = scaled_field(D.rho.pullback_affine(T.inverse(), q), 1.0 / gamma);
    const Mat Hs = base.hessian(Vec::Zero(d)).topLeftCorner(t, t);
    const Mat Jt = standard_structure(t / 2);
    const Mat Hh = 0.5 * (Hs + Jt.transpose() * Hs * Jt);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * Hh);
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw NumericalError("boundary_normalize: Levi form of rho is not positive at " + format_point(q));
    const Mat A = es.operatorSqrt();
    Mat S = Mat::Identity(d, d);
    S.topLeftCorner(t, t) = A;
    T = S * T;
  }
  out.T = T;
  out.rho_n = scaled_field(D.rho.pullback_affine(T.inverse(), q), 1.0 / gamma);
  out.J_T = direct_image(D.J, CoordinateChart::affine(T, q));
  const Mat H = out.rho_n.hessian(Vec::Zero(d));
  out.tangential_hessian = H.topLeftCorner(t, t);
  out.quadratic_residual = t > 0 ? 0.5 * max_abs(out.tangential_hessian - 2.0 * Mat::Identity(t, t)) : 0.0;
  return out;
}

RescaledDefining rescaled_defining(const ScalarField& rho_n, const Mat& Lambda, double delta, double alpha) {
  if (!(delta > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("rescaled_defining: delta and alpha must be positive");
  RescaledDefining out;
  const int d = static_cast<int>(Lambda.rows());
  out.rho_tilde = scaled_field(rho_n.pullback_affine(Lambda.inverse(), Vec::Zero(d)), alpha / delta);
  const ScalarField rt = out.rho_tilde;
  out.R = rt.map([](const Jet2& j) { return j + square(j); }).with_value([rt](const Vec& x) {
    const double r = rt(x);
    return r + r * r;
  });
  return out;
}

ScalarField limit_profile(int n) {
  const int d = 2 * n;
  return ScalarField::analytic(d, [d](const Vec& x) {
    Jet2 j = Jet2::coordinate(x, d - 2);
    for (int i = 0; i < d - 2; ++i) {
      j.value += x(i) * x(i);
      j.grad(i) = 2.0 * x(i);
      j.hess(i, i) = 2.0;
    }
    return j;
  });
}

ScaleStep scale_step(const BoundaryChart& chart, const DomainSpec& D, const Vec& p, double delta,
                     double alpha, int nu) {
  const int n = D.n(), d = 2 * n;
  ScaleStep st;
  st.nu = nu;
  st.p = p;
  st.delta = delta;
  const double s = std::sqrt(alpha / delta);
  st.Lambda = Mat::Identity(d, d);
  for (int i = 0; i < d - 2; ++i) st.Lambda(i, i) = s;
  st.Lambda(d - 2, d - 2) = st.Lambda(d - 1, d - 1) = s * s;
  st.M = st.Lambda * chart.T;
  st.anchor = st.M * (p - chart.q);
  const Eigen::JacobiSVD<Mat> svd(st.M);
  st.chart_norm = svd.singularValues().maxCoeff();
  st.inverse_norm = 1.0 / svd.singularValues().minCoeff();
  const RescaledDefining rd = rescaled_defining(chart.rho_n, st.Lambda, delta, alpha);
  st.R = rd.R;
  st.G.name = D.name + " scaled nu=" + std::to_string(nu);
  st.G.rho = rd.rho_tilde;
  st.G.J = direct_image(D.J, CoordinateChart::affine(st.M, chart.q));
  st.G.region = GridRegion::ball(Vec::Zero(d), 1.0, 7);
  return st;
}

AlmostComplexStructure limit_structure(const BoundaryChart& chart) {
  const int n = chart.J_T.complex_dim(), d = 2 * n, t = d - 2;
  const std::vector<Mat> dJ = chart.J_T.derivative(Vec::Zero(d));
  std::vector<Mat> blocks(d, Mat::Zero(d, d));
  for (int k = 0; k < t; ++k) blocks[k].block(t, 0, 2, t) = dJ[k].block(t, 0, 2, t);
  const Mat Jst = standard_structure(n);
  return AlmostComplexStructure(
      n,
      [blocks, Jst, t](const Vec& w) {
        Mat m = Jst;
        for (int k = 0; k < t; ++k) m += w(k) * blocks[k];
        return m;
      },
      [blocks](const Vec&) { return blocks; });
}

ScalingSequence scaling_sequence(const DomainSpec& D, const Vec& p0, const std::vector<double>& deltas,
                                 double alpha) {
  if (deltas.empty()) throw std::invalid_argument("scaling_sequence: no steps");
  const FootPoint fp = adapted_foot_point(D, p0);
  ScalingSequence seq;
  seq.alpha = alpha;
  seq.chart = boundary_normalize(D, fp.q, fp.normal);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double delta = deltas[k];
    const Vec p = fp.q - delta * fp.normal;
    if (!D.contains(p)) throw std::invalid_argument("scaling_sequence: point leaves D at delta " + std::to_string(delta));
    seq.steps.push_back(scale_step(seq.chart, D, p, delta, alpha, static_cast<int>(k) + 1));
  }
  seq.limit = limit_structure(seq.chart);
  double size = 0.0;
  for (const Mat& b : seq.limit.derivative(Vec::Zero(D.real_dim()))) size = std::max(size, max_abs(b));
  seq.limit_kind = size < 1e-12 ? "J_st" : "J0";
  return seq;
}

ScalingSequence geometric_sequence(const DomainSpec& D, const Vec& p0, int steps, double alpha) {
  if (steps < 1) throw std::invalid_argument("geometric_sequence: steps must be positive");
  const FootPoint fp = adapted_foot_point(D, p0);
  std::vector<double> deltas;
  for (int nu = 1; nu <= steps; ++nu) deltas.push_back(std::ldexp(fp.delta, -nu));
  return scaling_sequence(D, p0, deltas, alpha);
}

ConvergenceReport convergence_report(const ScalingSequence& seq, double radius, int count) {
  ConvergenceReport out;
  out.limit_kind = seq.limit_kind;
  if (seq.steps.empty()) return out;
  const ScaleStep& first = seq.steps.front();
  const int n = first.G.n(), d = 2 * n;
  const Vec a = first.anchor;
  const GridRegion box = GridRegion::box(n, a.array() - radius, a.array() + radius, count);
  std::vector<Vec> K;
  for (const Vec& w : box.points()) {
    bool in = true;
    for (int k = 0; k < n; ++k) in = in && std::hypot(w(2 * k) - a(2 * k), w(2 * k + 1) - a(2 * k + 1)) <= radius + 1e-12;
    if (in) K.push_back(w);
  }
  const ScalarField prof = limit_profile(n);
  std::vector<double> logd, logc;
  for (const ScaleStep& st : seq.steps) {
    ConvergenceRow row;
    row.nu = st.nu;
    row.delta = st.delta;
    for (const Vec& w : K) {
      row.c0 = std::max(row.c0, max_abs(st.G.J(w) - seq.limit(w)));
      const std::vector<Mat> a1 = st.G.J.derivative(w), b1 = seq.limit.derivative(w);
      for (int k = 0; k < d; ++k) row.c1 = std::max(row.c1, max_abs(a1[k] - b1[k]));
      const Jet2 r = st.G.rho.jet(w), l = prof.jet(w);
      row.rho_c2 = std::max({row.rho_c2, std::abs(r.value - l.value), max_abs(r.grad - l.grad), max_abs(r.hess - l.hess)});
    }
    out.rows.push_back(row);
    if (row.c0 > 0.0) {
      logd.push_back(std::log(row.delta));
      logc.push_back(std::log(row.c0));
    }
  }
  out.monotone = true;
  for (std::size_t k = 1; k < out.rows.size(); ++k)
    if (!(out.rows[k].c0 < out.rows[k - 1].c0)) out.monotone = false;
  if (logd.size() >= 2) out.decay_exponent = fitted_slope(logd, logc);
  return out;
}

double levi_invariance_residual(const ScalarField& rho, const AlmostComplexStructure& J, const Mat& M,
                                const Vec& x, const Vec& v) {
  const int d = static_cast<int>(M.rows());
  const Mat Minv = M.inverse();
  const AlmostComplexStructure JM = direct_image(J, CoordinateChart::affine(M, Vec::Zero(d)));
  const ScalarField pulled = rho.pullback_affine(Minv, Vec::Zero(d));
  return std::abs(levi_form(rho, J, x, Minv * v) - levi_form(pulled, JM, M * x, v));
}

ScalarField exponential_defining(const ScalarField& rho, double K) {
  if (!(K > 0.0)) throw std::invalid_argument("exponential_defining: K must be positive");
  return rho
      .map([K](const Jet2& j) {
        Jet2 e = exp(j * K);
        e.value -= 1.0;
        return e;
      })
      .with_value([rho, K](const Vec& x) { return std::expm1(K * rho(x)); });
}

ScaledCertificate certify_scaled(const ScalingSequence& seq, const LowerOptions& options, double v0_radius,
                                 double u_radius, double K) {
  ScaledCertificate out;
  out.v0_radius = v0_radius;
  out.u_radius = u_radius;
  out.K = K;
  if (seq.steps.empty()) {
    out.diagnostic = "empty sequence";
    return out;
  }
  const int d = seq.steps.front().G.real_dim();
  double cmin = kInfinity;
  for (const ScaleStep& st : seq.steps) {
    const GridRegion V0 = GridRegion::ball(st.anchor, v0_radius, options.grid, options.h);
    const PencilMinimum pm =
        pencil_minimum(st.R, squared_norm_field(d, st.anchor), st.G.J, V0, {}, options.polish_starts);
    if (!(pm.value > 0.0)) {
      out.diagnostic = "step nu=" + std::to_string(st.nu) + ": R is not strictly psh at " +
                       format_point(pm.worst_point);
      return out;
    }
    out.margins.push_back(pm.value);
    cmin = std::min(cmin, pm.value);
  }
  out.C = 0.5 * cmin;
  for (const ScaleStep& st : seq.steps) {
    const GridRegion V0 = GridRegion::ball(st.anchor, v0_radius, options.grid, options.h);
    PshCertificate chk = certify_psh(st.R - squared_norm_field(d, st.anchor) * out.C, st.G.J, V0);
    if (!chk.passed) {
      out.diagnostic = "step nu=" + std::to_string(st.nu) + ": R - C|w|^2 fails at " + format_point(chk.worst_point);
      return out;
    }
    out.checks.push_back(std::move(chk));
    const GridRegion U = GridRegion::ball(st.anchor, u_radius, options.grid, options.h);
    // K rho_tilde(anchor) = -K alpha at every step
    const double ra = st.G.rho(st.anchor);
    if (!(ra < 0.0)) {
      out.diagnostic = "step nu=" + std::to_string(st.nu) + ": anchor outside the scaled domain";
      return out;
    }
    const double Kn = K * seq.alpha / std::abs(ra);
    out.exponents.push_back(Kn);
    LowerCertificate c = certify_lower(st.G, exponential_defining(st.G.rho, Kn), U, {st.anchor}, options);
    if (!c.certified) {
      out.diagnostic = "step nu=" + std::to_string(st.nu) + ": " + c.diagnostic;
      return out;
    }
    out.c = out.steps.empty() ? c.c : std::min(out.c, c.c);
    out.B = std::max(out.B, c.B);
    out.steps.push_back(std::move(c));
  }
  out.certified = true;
  return out;
}

double kr_lower_scaled(const ScalingSequence& seq, int index, const Vec& v, const ScaledCertificate& cert) {
  if (!cert.certified) throw std::invalid_argument("kr_lower_scaled: certificate missing: " + cert.diagnostic);
  if (index < 0 || index >= static_cast<int>(seq.steps.size()) || index >= static_cast<int>(cert.steps.size()))
    throw std::invalid_argument("kr_lower_scaled: step index out of range");
  const ScaleStep& st = seq.steps[index];
  const LowerCertificate& lc = cert.steps[index];
  const double u = lc.u(st.anchor);
  if (!(u < 0.0)) throw std::invalid_argument("kr_lower_scaled: u(anchor) must be negative");
  return sibony_constant(u, cert.B, cert.c) * (lc.normalizations[0] * (st.M * v)).norm();
}

}  // namespace akr
