#include "akr/forms.hpp"

#include "optimize.hpp"

#include "akr/disc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace akr {

Complex del_J(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p, const Vec& v) {
  const Vec g = u.gradient(p);
  if (!g.allFinite()) throw NumericalError("del_J: gradient not finite at " + format_point(p));
  return {g.dot(v), -g.dot(J(p) * v)};
}

Mat levi_matrix(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p) {
  const Jet2 j = u.jet(p);
  const Mat Jp = J(p);
  const std::vector<Mat> dJ = J.derivative(p);
  const int d = static_cast<int>(p.size());
  // A_ij = d_i theta_j with theta_j = sum_k g_k J_kj
  Mat A = j.hess * Jp;
  for (int i = 0; i < d; ++i) A.row(i) += (j.grad.transpose() * dJ[i]);
  const Mat omega = A - A.transpose();
  const Mat B = -0.25 * omega * Jp;
  Mat S = 0.5 * (B + B.transpose());
  if (!S.allFinite()) throw NumericalError("levi form not finite at " + format_point(p));
  return S;
}

double levi_form(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p, const Vec& v) {
  return v.dot(levi_matrix(u, J, p) * v);
}

double levi_form_extended(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p,
                          const Vec& v, const Mat& A, double h) {
  // Coordinate-free evaluation d theta(X, Y) = X(theta(Y)) - Y(theta(X)) - theta([X, Y])
  // with X = v + A (x - p) and Y = J X, derivatives by centered differences.
  const int d = static_cast<int>(p.size());
  auto X = [&](const Vec& x) { return Vec(v + A * (x - p)); };
  auto Y = [&](const Vec& x) { return Vec(J(x) * X(x)); };
  auto theta = [&](const Vec& x, const Vec& w) { return u.gradient(x).dot(J(x) * w); };
  auto directional = [&](const std::function<double(const Vec&)>& f, const Vec& dir) {
    return (f(p + h * dir) - f(p - h * dir)) / (2.0 * h);
  };
  const Vec Xp = X(p), Yp = Y(p);
  const double xY = directional([&](const Vec& x) { return theta(x, Y(x)); }, Xp);
  const double yX = directional([&](const Vec& x) { return theta(x, X(x)); }, Yp);
  // [X, Y] = DY.X - DX.Y
  Vec DY_X(d), DX_Y(d);
  DY_X = (Y(p + h * Xp) - Y(p - h * Xp)) / (2.0 * h);
  DX_Y = A * Yp;
  const double bracket = theta(p, DY_X - DX_Y);
  return -0.25 * (xY - yX - bracket);
}

double levi_form_via_disc(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p,
                          const Vec& v) {
  const SecondJet jet = second_jet(J, p, v);
  const Jet2 j = u.jet(p);
  const double lap = jet.fx.dot(j.hess * jet.fx) + jet.fy.dot(j.hess * jet.fy) +
                     j.grad.dot(jet.laplacian);
  return 0.25 * lap;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > 12) throw std::invalid_argument("sphere_directions: dimension too large");
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 1; static_cast<int>(out.size()) < count; ++i) {
    Vec g(dim);
    for (int k = 0; k < dim; k += 2) {
      const double u1 = std::max(halton(i, primes[k]), 1e-12);
      const double u2 = k + 1 < dim ? halton(i, primes[k + 1]) : 0.0;
      const double rad = std::sqrt(-2.0 * std::log(u1));
      g(k) = rad * std::cos(2.0 * M_PI * u2);
      if (k + 1 < dim) g(k + 1) = rad * std::sin(2.0 * M_PI * u2);
    }
    const double nrm = g.norm();
    if (nrm > 1e-12) out.push_back(g / nrm);
  }
  return out;
}

namespace {

double min_eigenvalue(const Mat& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Largest c in [0, limit] with pass(c); pass must be monotone decreasing.
double largest_passing(const std::function<bool(double)>& pass, double start, double limit,
                       int steps = 20) {
  if (!pass(0.0)) return -1.0;
  double lo = 0.0, hi = start;
  while (pass(hi)) {
    lo = hi;
    if (hi >= limit) return limit;
    hi = std::min(2.0 * hi, limit);
  }
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (pass(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

std::optional<double> threshold_search(const std::function<bool(double)>& pass, double start,
                                       double limit, bool try_zero, int bisection_steps) {
  if (try_zero && pass(0.0)) return 0.0;
  double lo = 0.0, hi = start;
  while (!pass(hi)) {
    lo = hi;
    if (hi >= limit) return std::nullopt;
    hi = std::min(2.0 * hi, limit);
  }
  for (int i = 0; i < bisection_steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (pass(mid) ? hi : lo) = mid;
  }
  return hi;
}

PshCertificate certify_psh(const ScalarField& u, const AlmostComplexStructure& J,
                           const GridRegion& region, const CertifyOptions& options) {
  if (region.real_dim() != J.real_dim() || u.dim() != J.real_dim())
    throw std::invalid_argument("certify_psh: dimension mismatch");
  const int d = J.real_dim();
  PshCertificate cert;
  cert.region = region;
  cert.directions = options.directions;
  cert.strict = options.strict;
  cert.tolerance = options.tolerance;
  cert.margin_center = options.margin_center.size() ? options.margin_center : Vec::Zero(d);

  const std::vector<Vec> pts = region.points();
  const std::vector<Vec> dirs = sphere_directions(d, options.directions);
  const ScalarField q = squared_norm_field(d, cert.margin_center);
  std::vector<Mat> Su, Sq;
  if (options.strict) {
    Su.reserve(pts.size());
    Sq.reserve(pts.size());
  }
  cert.min_levi = std::numeric_limits<double>::infinity();
  cert.min_levi_sampled = std::numeric_limits<double>::infinity();
  for (const Vec& x : pts) {
    Mat S;
    try {
      S = levi_matrix(u, J, x);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("certify_psh: evaluation failed at ") + format_point(x) +
                           ": " + e.what());
    }
    const double lam = min_eigenvalue(S);
    if (!std::isfinite(lam)) throw NumericalError("certify_psh: non-finite value at " + format_point(x));
    if (lam < cert.min_levi) {
      cert.min_levi = lam;
      cert.worst_point = x;
    }
    for (const Vec& v : dirs) cert.min_levi_sampled = std::min(cert.min_levi_sampled, v.dot(S * v));
    if (options.strict) {
      Su.push_back(std::move(S));
      Sq.push_back(levi_matrix(q, J, x));
    }
  }
  cert.samples = static_cast<int>(pts.size());
  cert.passed = cert.min_levi >= -cert.tolerance;
  if (options.strict) {
    auto pass = [&](double c) {
      for (std::size_t i = 0; i < Su.size(); ++i)
        if (min_eigenvalue(Su[i] - c * Sq[i]) < -cert.tolerance) return false;
      return true;
    };
    cert.margin = std::max(0.0, largest_passing(pass, 1.0, 1.0e6));
    cert.passed = cert.passed && cert.margin > 0.0;
  }
  return cert;
}

PencilMinimum pencil_minimum(const ScalarField& u, const ScalarField& q, const AlmostComplexStructure& J,
                             const GridRegion& region, const std::function<bool(const Vec&)>& admit,
                             int polish_starts) {
  const int d = J.real_dim();
  if (u.dim() != d || q.dim() != d || region.real_dim() != d)
    throw std::invalid_argument("pencil_minimum: dimension mismatch");
  PencilMinimum out;
  auto inside = [&](const Vec& x) { return region.contains(x) && (!admit || admit(x)); };
  auto value = [&](const Vec& x) {
    ++out.evaluations;
    const Mat Sq = levi_matrix(q, J, x);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(levi_matrix(u, J, x), Sq, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalError("pencil_minimum: Levi form of the reference is not positive at " + format_point(x));
    return es.eigenvalues()(0);
  };
  std::vector<std::pair<double, Vec>> samples;
  for (const Vec& x : region.points()) {
    if (admit && !admit(x)) continue;
    const double v = value(x);
    if (!std::isfinite(v)) throw NumericalError("pencil_minimum: non-finite value at " + format_point(x));
    samples.emplace_back(v, x);
  }
  out.samples = static_cast<int>(samples.size());
  if (samples.empty()) throw NumericalError("pencil_minimum: no admissible samples");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out.value = samples.front().first;
  out.worst_point = samples.front().second;
  double spacing = 0.0;
  for (int i = 0; i < d; ++i) spacing = std::max(spacing, (region.hi(i) - region.lo(i)) / (region.counts[i] - 1));
  const int starts = std::min<int>(polish_starts, static_cast<int>(samples.size()));
  for (int k = 0; k < starts; ++k) {
    auto f = [&](const Vec& x) { return inside(x) ? value(x) : std::numeric_limits<double>::infinity(); };
    const detail::NelderMeadResult r =
        detail::nelder_mead(f, samples[k].second, 0.5 * spacing, 60 * d, 1e-10, 1e-6 * spacing);
    if (r.value < out.value) {
      out.value = r.value;
      out.worst_point = r.x;
    }
  }
  return out;
}

ScalarField chirka_function(int dim, double A, const Vec& center) {
  return ScalarField::analytic(dim, [A, center](const Vec& x) {
    const Jet2 r = distance(x, center);
    return log(r) + A * r;
  });
}

ScalarField chirka_function(int dim, double A) { return chirka_function(dim, A, Vec::Zero(dim)); }

namespace {

// Deterministic generic perturbation directions, max entry 1.
std::vector<Mat> perturbation_directions(int d, int count) {
  std::mt19937 gen(20240601u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Mat> out;
  for (int k = 0; k < count; ++k) {
    Mat N(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) N(i, j) = dist(gen);
    out.push_back(N / N.cwiseAbs().maxCoeff());
  }
  return out;
}

AlmostComplexStructure constant_conjugate(const AlmostComplexStructure& J, const Mat& P) {
  const Mat Pinv = P.inverse();
  return AlmostComplexStructure(
      J.complex_dim(), [J, P, Pinv](const Vec& x) { return Mat(P * J(x) * Pinv); },
      [J, P, Pinv](const Vec& x) {
        std::vector<Mat> d = J.derivative(x);
        for (Mat& m : d) m = P * m * Pinv;
        return d;
      });
}

double structure_distance_c2(const AlmostComplexStructure& a, const AlmostComplexStructure& b,
                             const GridRegion& region) {
  const int d = a.real_dim();
  double out = 0.0;
  for (const Vec& x : region.points()) {
    out = std::max(out, (a(x) - b(x)).cwiseAbs().maxCoeff());
    const auto da = a.derivative(x), db = b.derivative(x);
    for (int k = 0; k < d; ++k) out = std::max(out, (da[k] - db[k]).cwiseAbs().maxCoeff());
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        out = std::max(out, (a.second_derivative(x, i, j, region.h) -
                             b.second_derivative(x, i, j, region.h)).cwiseAbs().maxCoeff());
  }
  return out;
}

struct PerturbationBudget {
  double scale = 0.0;
  double lambda0 = 0.0;
};

PerturbationBudget perturbation_budget(const AlmostComplexStructure& J, const GridRegion& region,
                                       int count,
                                       const std::function<bool(const AlmostComplexStructure&)>& pass) {
  const int d = J.real_dim();
  const std::vector<Mat> dirs = perturbation_directions(d, count);
  auto all_pass = [&](double t) {
    if (t == 0.0) return true;
    for (const Mat& N : dirs) {
      const Mat P = Mat::Identity(d, d) + t * N;
      if (std::abs(P.determinant()) < 1e-6) return false;
      try {
        if (!pass(constant_conjugate(J, P))) return false;
      } catch (const NumericalError&) {
        return false;
      }
    }
    return true;
  };
  PerturbationBudget out;
  out.scale = largest_passing(all_pass, 0.005, 0.25);
  if (out.scale <= 0.0) return out;
  // Coarser grid for the distance measurement: it only reports the budget.
  GridRegion coarse = region;
  for (int& c : coarse.counts) c = std::min(c, 5);
  double lam = std::numeric_limits<double>::infinity();
  for (const Mat& N : dirs) {
    const Mat P = Mat::Identity(d, d) + out.scale * N;
    lam = std::min(lam, structure_distance_c2(constant_conjugate(J, P), J, coarse));
  }
  out.lambda0 = lam;
  return out;
}

}  // namespace

ChirkaConstants chirka_constants(const AlmostComplexStructure& J, const GridRegion& region,
                                 double puncture_radius, double A_max, int perturbations) {
  if (!(puncture_radius > 0.0)) throw std::invalid_argument("chirka_constants: puncture radius must be positive");
  GridRegion punctured = region;
  punctured.shape = GridRegion::Shape::Ball;
  if (punctured.outer_radius <= 0.0) {
    punctured.outer_radius = 0.5 * (region.hi - region.lo).minCoeff();
    punctured.center = region.center;
  }
  punctured.inner_radius = std::max(punctured.inner_radius, puncture_radius);
  punctured.validate();
  const int d = J.real_dim();
  const Vec c = punctured.center;
  auto certify_for = [&](const AlmostComplexStructure& S, double A) {
    return certify_psh(chirka_function(d, A, c), S, punctured, {});
  };
  auto pass = [&](double A) { return certify_for(J, A).passed; };
  const auto A = threshold_search(pass, 1.0, A_max, true);
  if (!A) {
    const PshCertificate worst = certify_for(J, A_max);
    throw NumericalError("chirka_constants: no A <= " + std::to_string(A_max) +
                         " works; worst point " + format_point(worst.worst_point));
  }
  ChirkaConstants out;
  out.A = *A;
  out.certificate = certify_for(J, out.A);
  const PerturbationBudget budget = perturbation_budget(
      J, punctured, perturbations,
      [&](const AlmostComplexStructure& S) { return certify_for(S, out.A).passed; });
  out.lambda0 = budget.lambda0;
  out.certificate.lambda0 = out.lambda0;
  return out;
}

// ------------------------------------------------------------------ cutoff

namespace {
double h1(double t) { return t - 6 * t * t * t + 8 * t * t * t * t - 3 * t * t * t * t * t; }
double h1p(double t) { return 1 - 18 * t * t + 32 * t * t * t - 15 * t * t * t * t; }
double h1pp(double t) { return -36 * t + 96 * t * t - 60 * t * t * t; }
double st(double t) { return 10 * t * t * t - 15 * t * t * t * t + 6 * t * t * t * t * t; }
double stp(double t) { return 30 * t * t - 60 * t * t * t + 30 * t * t * t * t; }
double stpp(double t) { return 60 * t - 180 * t * t + 120 * t * t * t; }
}  // namespace

double Cutoff::value(double s) const {
  const double a = r / 3.0, w = r / 3.0;
  if (s <= a) return s;
  if (s >= 2.0 * a) return 1.0;
  const double t = (s - a) / w;
  return a + w * h1(t) + (1.0 - a) * st(t);
}

double Cutoff::d1(double s) const {
  const double a = r / 3.0, w = r / 3.0;
  if (s <= a) return 1.0;
  if (s >= 2.0 * a) return 0.0;
  const double t = (s - a) / w;
  return h1p(t) + (1.0 - a) / w * stp(t);
}

double Cutoff::d2(double s) const {
  const double a = r / 3.0, w = r / 3.0;
  if (s <= a || s >= 2.0 * a) return 0.0;
  const double t = (s - a) / w;
  return (h1pp(t) + (1.0 - a) / w * stpp(t)) / w;
}

Cutoff cutoff_theta(double r) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("cutoff_theta: r must lie in (0, 1)");
  return Cutoff{r};
}

ScalarField log_cutoff_weight(int dim, double r, double A, double B, const Vec& center) {
  if (A < 0.0 || B < 0.0) throw std::invalid_argument("log_cutoff_weight: A and B must be >= 0");
  const Cutoff theta = cutoff_theta(r);
  return ScalarField::analytic(dim, [theta, A, B, center](const Vec& x) {
    const Jet2 s = squared_distance(x, center);
    if (s.value == 0.0) throw NumericalError("log_cutoff_weight: singular at its center");
    Jet2 out = log(theta(s)) + B * s;
    if (A > 0.0) out = out + theta(A * sqrt(s));
    return out;
  });
}

WeightConstants find_weight_constants(const AlmostComplexStructure& J, const GridRegion& region,
                                      double r, double puncture_radius, double B_max, double A_min) {
  if (region.shape != GridRegion::Shape::Ball)
    throw std::invalid_argument("find_weight_constants: region must be a ball");
  const int d = J.real_dim();
  WeightConstants out;
  out.r = r;
  out.center = region.center;
  GridRegion punctured = region;
  punctured.inner_radius = std::max(region.inner_radius, puncture_radius);
  punctured.validate();

  const ChirkaConstants chirka = chirka_constants(J, punctured, puncture_radius);
  out.chirka_A = chirka.A;
  out.lambda0 = chirka.lambda0;
  // log|z|^2 + A|z| = 2 (log|z| + (A/2)|z|)
  out.A = std::max(2.0 * chirka.A, A_min);

  auto certify_for = [&](double B) {
    return certify_psh(log_cutoff_weight(d, r, out.A, B, out.center), J, punctured, {});
  };
  const PencilMinimum pm = pencil_minimum(log_cutoff_weight(d, r, out.A, 0.0, out.center),
                                          squared_norm_field(d, out.center), J, punctured);
  double B = std::max(0.0, -pm.value);
  B += 1e-9 * (1.0 + B);
  if (B > B_max)
    throw NumericalError("find_weight_constants: no B <= " + std::to_string(B_max) + " works; worst point " +
                         format_point(pm.worst_point));
  PshCertificate cert = certify_for(B);
  if (!cert.passed) {
    // the pencil bound is exact at the samples; this only guards the eigen-solver tolerance
    const auto Bs = threshold_search([&](double b) { return certify_for(b).passed; }, std::max(B, 1.0), B_max, false);
    if (!Bs) throw NumericalError("find_weight_constants: weight does not certify; worst point " + format_point(cert.worst_point));
    B = *Bs;
    cert = certify_for(B);
  }
  out.B = B;
  out.certificate = cert;
  out.certificate.lambda0 = out.lambda0;
  return out;
}

ScalarField sibony_weight(const Vec& q, double r, double A, double tau, const ScalarField& u,
                          const GridRegion& U, const std::function<bool(const Vec&)>& in_domain) {
  for (const Vec& x : U.points()) {
    if (in_domain(x) && !(u(x) < 0.0))
      throw std::invalid_argument("sibony_weight: u must be negative on D n U; fails at " +
                                  format_point(x));
  }
  const Cutoff theta = cutoff_theta(r);
  const int dim = u.dim();
  return ScalarField::analytic(dim, [=](const Vec& x) {
    const Jet2 eu = exp(tau * u.jet(x));
    if (!U.contains(x)) return exp(1.0 + tau * u.jet(x));
    const Jet2 s = squared_distance(x, q);
    if (s.value == 0.0) {
      // theta_r(|z-q|^2) = |z-q|^2 near q; the product is |z-q|^2 exp(tau u) + O(|z-q|^3).
      return Jet2{0.0, Vec::Zero(dim), 2.0 * eu.value * Mat::Identity(dim, dim)};
    }
    Jet2 factor = theta(s);
    if (A > 0.0) factor = factor * exp(theta(A * sqrt(s)));
    return factor * eu;
  });
}

}  // namespace akr
