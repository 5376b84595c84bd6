#include "akr/metric.hpp"

#include "optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace akr {

// ----------------------------------------------------------------- domain

bool DomainSpec::contains(const Vec& x) const {
  if (!x.allFinite()) return false;
  const double r = rho(x);
  return std::isfinite(r) && r < 0.0;
}

double DomainSpec::distance_hint(const Vec& p) const {
  const Jet2 j = rho.jet(p);
  // sqrt(|rho|) guards critical points of rho inside D
  return std::abs(j.value) / std::max(j.grad.norm(), std::sqrt(std::abs(j.value)));
}

void DomainSpec::validate() const {
  if (!rho.valid()) throw std::invalid_argument("domain: missing defining function");
  if (rho.dim() != J.real_dim() || region.real_dim() != J.real_dim())
    throw std::invalid_argument("domain: dimension mismatch");
  bool nonempty = false;
  const std::vector<Vec> pts = region.points();
  double spacing = 0.0;
  for (int i = 0; i < region.real_dim(); ++i)
    spacing = std::max(spacing, (region.hi(i) - region.lo(i)) / (region.counts[i] - 1));
  for (const Vec& x : pts) {
    const Jet2 j = rho.jet(x);
    if (j.value < 0.0) nonempty = true;
    // collar of the boundary: |rho| small relative to the grid spacing
    if (std::abs(j.value) <= 0.5 * spacing && !(j.grad.norm() > 1e-8))
      throw std::invalid_argument("domain: grad rho vanishes near the boundary at " + format_point(x));
  }
  if (!nonempty) throw std::invalid_argument("domain: {rho < 0} has no grid samples");
}

// ----------------------------------------------------------------- upper

namespace {

bool inside_all(const DomainSpec& D, const std::vector<Vec>& pts) {
  for (const Vec& x : pts)
    if (!D.contains(x)) return false;
  return true;
}

}  // namespace

std::optional<JHoloDisc> feasible_disc(const DomainSpec& D, const Vec& p, const Vec& w, Complex beta,
                                       const UpperOptions& options, int* solves) {
  DiscGrid g = options.grid;
  g.radius = 1.0;
  SolveOptions so;
  so.tol = options.tol;
  so.allow_halving = false;
  so.beta = beta;
  for (int ref = 0; ref <= options.max_refinements; ++ref) {
    DiscAttempt a = attempt_disc(D.J, p, w, g, so);
    if (solves) ++*solves;
    if (a.status == SolveStatus::Converged) {
      if (!inside_all(D, a.disc.node_values())) return std::nullopt;
      if (!inside_all(D, a.disc.rim_values(options.rim_factor * g.angular))) return std::nullopt;
      return std::move(a.disc);
    }
    if (a.status != SolveStatus::IterationLimit) return std::nullopt;
    g.radial = g.radial + g.radial / 2;
    g.angular *= 2;
  }
  return std::nullopt;
}

namespace {

// Smallest feasible alpha in [lo, hi] given feasibility at hi; log-space bisection.
double bisect_alpha(const std::function<std::optional<JHoloDisc>(double)>& feasible, double lo,
                    double hi, int steps, std::optional<JHoloDisc>& witness) {
  for (int i = 0; i < steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    auto f = feasible(mid);
    if (f) {
      hi = mid;
      witness = std::move(f);
    } else {
      lo = mid;
    }
  }
  return hi;
}

Complex beta_from(const Vec& y, double cap) {
  const double r = y.norm();
  if (r == 0.0) return 0.0;
  const double s = cap * std::tanh(r) / r;
  return {s * y(0), s * y(1)};
}

}  // namespace

UpperBound kr_upper(const DomainSpec& D, const Vec& p, const Vec& v, const UpperOptions& options) {
  if (!D.contains(p)) throw std::invalid_argument("kr_upper: p is not in D: " + format_point(p));
  const double nv = v.norm();
  if (!(nv > 0.0)) throw std::invalid_argument("kr_upper: v must be nonzero");
  UpperBound out;
  const double dist = std::max(D.distance_hint(p), 1e-12);
  auto feasible_at = [&](Complex beta) {
    return [&, beta](double alpha) { return feasible_disc(D, p, v / alpha, beta, options, &out.discs_solved); };
  };
  const auto linear = feasible_at(0.0);

  double lo = 1e-2 * nv / dist, hi = 1e2 * nv / dist;
  std::optional<JHoloDisc> witness = linear(hi);
  for (int e = 0; !witness && e < 6; ++e) {
    lo = hi;
    hi *= 10.0;
    witness = linear(hi);
  }
  if (!witness) {
    out.diagnostic = "no disc stays in D even for alpha = " + std::to_string(hi);
    return out;
  }
  for (int e = 0; e < 6; ++e) {
    auto f = linear(lo);
    if (!f) break;
    hi = lo;
    witness = std::move(f);
    lo /= 10.0;
  }
  double alpha = bisect_alpha(linear, lo, hi, options.bisection_steps, witness);
  Complex beta = 0.0;

  if (options.optimize_beta) {
    const double alpha0 = alpha;
    auto objective = [&](const Vec& y) {
      const Complex b = beta_from(y, options.beta_cap);
      const auto feas = feasible_at(b);
      if (!feas(alpha0)) return 2.0 * alpha0;
      std::optional<JHoloDisc> w;
      return bisect_alpha(feas, alpha0 / 8.0, alpha0, options.beta_bisection_steps, w);
    };
    // coarse polar scan of the seed parameter, then a local simplex search
    Vec start = Vec::Zero(2);
    double best = alpha0;
    for (double frac : {0.3, 0.6, 0.85}) {
      const double r = std::atanh(frac);
      for (int k = 0; k < 8; ++k) {
        const Vec y = Eigen::Vector2d(r * std::cos(M_PI * k / 4.0), r * std::sin(M_PI * k / 4.0));
        const double val = objective(y);
        if (val < best) {
          best = val;
          start = y;
        }
      }
    }
    const Vec y = detail::nelder_mead(objective, start, 0.2, options.max_beta_evaluations).x;
    const Complex b = beta_from(y, options.beta_cap);
    const auto feas = feasible_at(b);
    if (b != Complex(0.0) && feas(alpha0)) {
      std::optional<JHoloDisc> w;
      const double a = bisect_alpha(feas, alpha0 / 8.0, alpha0, options.bisection_steps, w);
      if (w && a < alpha) {
        alpha = a;
        beta = b;
        witness = std::move(w);
      }
    }
  }
  out.alpha = alpha;
  out.beta = beta;
  out.witness = std::move(witness);
  return out;
}

// ----------------------------------------------------------------- lower

int LowerCertificate::center_index(const Vec& q) const {
  for (std::size_t i = 0; i < centers.size(); ++i)
    if (centers[i].size() == q.size() && (centers[i] - q).norm() <= 1e-12 * (1.0 + q.norm()))
      return static_cast<int>(i);
  return -1;
}

double sibony_constant(double u_value, double B, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("sibony_constant: margin c must be positive");
  return std::exp(-0.5 - B * std::abs(u_value) / c);
}

double LowerCertificate::constant(int i, double u_value) const {
  return sibony_constant(u_value, center_B.at(i), center_c.at(i));
}

namespace {

// Euclidean distance from q to the complement of U.
double inner_distance(const GridRegion& U, const Vec& q) {
  if (U.shape == GridRegion::Shape::Ball) return U.outer_radius - (q - U.center).norm();
  double r = kInfinity;
  for (int i = 0; i < U.real_dim(); ++i) r = std::min({r, q(i) - U.lo(i), U.hi(i) - q(i)});
  return r;
}

double min_singular(const Mat& L) { return Eigen::JacobiSVD<Mat>(L).singularValues().minCoeff(); }

double min_constant(const LowerCertificate& cert, double sup_u) {
  double m = kInfinity;
  for (std::size_t i = 0; i < cert.centers.size(); ++i)
    m = std::min(m, cert.constant(static_cast<int>(i), sup_u) * min_singular(cert.normalizations[i]));
  return m;
}

}  // namespace

LowerCertificate certify_lower(const DomainSpec& D, const ScalarField& u, const GridRegion& U,
                               const std::vector<Vec>& centers, const LowerOptions& options) {
  if (centers.empty()) throw std::invalid_argument("certify_lower: no centers");
  if (!(options.r > 0.0 && options.r < 1.0)) throw std::invalid_argument("certify_lower: r must lie in (0, 1)");
  if (!(options.chart_fraction > 0.0 && options.chart_fraction <= 1.0))
    throw std::invalid_argument("certify_lower: chart_fraction must lie in (0, 1]");
  LowerCertificate cert;
  cert.u = u;
  cert.U = U;
  cert.r = options.r;
  const int d = D.real_dim();
  int inside = 0;
  for (const Vec& x : U.points()) {
    if (!D.contains(x)) continue;
    ++inside;
    const double val = u(x);
    if (!(val < 0.0)) {
      cert.diagnostic = "u is not negative on D n U at " + format_point(x);
      return cert;
    }
    cert.L = std::max(cert.L, std::abs(val));
  }
  if (inside == 0) {
    cert.diagnostic = "D n U has no grid samples";
    return cert;
  }
  cert.c = kInfinity;
  const GridRegion unit = GridRegion::ball(Vec::Zero(d), 1.0, options.grid, options.h);
  const ScalarField z2 = squared_norm_field(d, Vec::Zero(d));
  for (const Vec& q : centers) {
    if (!D.contains(q) || !(inner_distance(U, q) > 0.0)) {
      cert.diagnostic = "center outside D n U: " + format_point(q);
      return cert;
    }
    const Mat Lq = *normalize_at_point(D.J, q).linear;
    const double scale = options.chart_fraction * inner_distance(U, q) * min_singular(Lq);
    const Mat Z = Lq / scale;
    const Mat Zinv = Z.inverse();
    const AlmostComplexStructure Jz = direct_image(D.J, CoordinateChart::affine(Z, q));
    const ScalarField uz = u.pullback_affine(Zinv, q);
    PencilMinimum pm;
    try {
      pm = pencil_minimum(uz, z2, Jz, unit, [&](const Vec& z) { return D.contains(Vec(q + Zinv * z)); },
                          options.polish_starts);
    } catch (const NumericalError& e) {
      cert.diagnostic = std::string("margin search failed at center ") + format_point(q) + ": " + e.what();
      return cert;
    }
    if (pm.samples == 0 || !(pm.value > 0.0)) {
      cert.diagnostic = "no strict margin for u at center " + format_point(q) + ", worst point " +
                        format_point(q + Zinv * pm.worst_point);
      return cert;
    }
    WeightConstants w;
    try {
      w = find_weight_constants(Jz, unit, options.r, options.puncture, 1.0e6, options.r);
    } catch (const NumericalError& e) {
      cert.diagnostic = std::string("weight constants failed at center ") + format_point(q) + ": " + e.what();
      return cert;
    }
    cert.c = std::min(cert.c, pm.value);
    cert.B = std::max(cert.B, w.B);
    cert.A = std::max(cert.A, w.A);
    cert.centers.push_back(q);
    cert.normalizations.push_back(Z);
    cert.scales.push_back(scale);
    cert.center_c.push_back(pm.value);
    cert.center_B.push_back(w.B);
    cert.weights.push_back(std::move(w));
  }
  cert.certified = true;
  return cert;
}

double kr_lower_sibony(const DomainSpec& D, const Vec& p, const Vec& v, const LowerCertificate& cert) {
  if (!cert.certified) throw std::invalid_argument("kr_lower_sibony: certificate missing or failed: " + cert.diagnostic);
  const int i = cert.center_index(p);
  if (i < 0) throw std::invalid_argument("kr_lower_sibony: no certificate at " + format_point(p));
  if (!D.contains(p)) throw std::invalid_argument("kr_lower_sibony: p is not in D");
  const double up = cert.u(p);
  if (!(up < 0.0)) throw std::invalid_argument("kr_lower_sibony: u(p) must be negative");
  return cert.constant(i, up) * (cert.normalizations[i] * v).norm();
}

double localization_factor(const DomainSpec& D, const GridRegion& U, const GridRegion& V1,
                           const Vec& p, const LowerCertificate& cert) {
  bool covers = true;
  for (const Vec& x : D.region.points())
    if (D.contains(x) && !U.contains(x)) {
      covers = false;
      break;
    }
  if (covers) return 1.0;
  if (!cert.certified) throw std::invalid_argument("localization_factor: certificate missing: " + cert.diagnostic);
  if (V1.shape != GridRegion::Shape::Ball || U.shape != GridRegion::Shape::Ball)
    throw std::invalid_argument("localization_factor: U and V1 must be balls");
  if ((V1.center - U.center).norm() + V1.outer_radius > U.outer_radius + 1e-12)
    throw std::invalid_argument("localization_factor: V1 must lie in U");
  const double eta = V1.outer_radius - (p - V1.center).norm();
  if (!(eta > 0.0)) throw std::invalid_argument("localization_factor: p must lie in V1");
  double L1 = 0.0;
  for (const Vec& x : V1.points())
    if (D.contains(x)) L1 = std::max(L1, std::abs(cert.u(x)));
  return std::tanh(min_constant(cert, L1) * eta);
}

// ----------------------------------------------------------------- bracket

double boundary_bracket(const DomainSpec& D, const Vec& p, const Vec& v) {
  const double r = D.rho(p);
  if (!(r < 0.0)) throw std::invalid_argument("boundary_estimate: rho(p) must be negative");
  const Complex del = del_J(D.rho, D.J, p, v);
  return std::norm(del) / (r * r) + v.squaredNorm() / std::abs(r);
}

double boundary_estimate(const DomainSpec& D, const Vec& p, const Vec& v, double c) {
  return c * std::sqrt(boundary_bracket(D, p, v));
}

Calibration calibrate_constant(const DomainSpec& D, const std::vector<CalibrationSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("calibrate_constant: no samples");
  Calibration out;
  out.c = kInfinity;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double ratio = samples[i].lower / std::sqrt(boundary_bracket(D, samples[i].p, samples[i].v));
    if (ratio < out.c) {
      out.c = ratio;
      out.argmin = static_cast<int>(i);
    }
  }
  if (out.c <= 0.0) {
    out.c = 0.0;
    out.diagnostic = "a lower bound vanishes at sample " + std::to_string(out.argmin);
  }
  return out;
}

// ----------------------------------------------------------------- distances

Path straight_path(const Vec& p, const Vec& q) {
  return [p, q](double t) { return Vec(p + t * (q - p)); };
}

DistanceBounds distance_bounds(const DomainSpec& D, const Vec& p, const Vec& q,
                               const std::vector<Path>& paths, const DistanceOptions& options) {
  DistanceBounds out;
  out.steps = options.steps;
  if ((p - q).norm() == 0.0) {
    out.upper = 0.0;
    return out;
  }
  if (paths.empty()) throw std::invalid_argument("distance_bounds: no candidate paths");
  if (options.steps < 1) throw std::invalid_argument("distance_bounds: steps must be >= 1");
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const Path& g = paths[k];
    bool ok = true;
    double sum = 0.0;
    for (int j = 0; j <= options.steps && ok; ++j) {
      const double t = static_cast<double>(j) / options.steps;
      const Vec x = g(t);
      if (!D.contains(x)) {
        ok = false;
        break;
      }
      const double h = 1e-6;
      const Vec dx = (g(std::min(t + h, 1.0)) - g(std::max(t - h, 0.0))) /
                     (std::min(t + h, 1.0) - std::max(t - h, 0.0));
      if (dx.norm() == 0.0) continue;
      const UpperBound ub = kr_upper(D, x, dx, options.upper);
      if (!ub.finite()) {
        ok = false;
        break;
      }
      sum += (j == 0 || j == options.steps ? 0.5 : 1.0) * ub.alpha;
    }
    if (!ok) continue;
    ++out.paths_used;
    const double val = sum / options.steps;
    if (val < out.upper) {
      out.upper = val;
      out.best_path = static_cast<int>(k);
    }
  }
  if (out.paths_used == 0) throw NumericalError("distance_bounds: every candidate path leaves D");
  out.lower = options.lower_constant * (p - q).norm();
  return out;
}

HyperbolicityReport hyperbolicity_probe(const DomainSpec& D, const Vec& p, double radius,
                                        const LowerCertificate& cert) {
  if (!cert.certified) throw std::invalid_argument("hyperbolicity_probe: no certificate: " + cert.diagnostic);
  HyperbolicityReport out;
  out.V = GridRegion::ball(p, radius, 5);
  for (const Vec& x : out.V.points()) {
    if (!D.contains(x)) continue;
    ++out.samples;
    out.sup_u = std::max(out.sup_u, std::abs(cert.u(x)));
  }
  if (out.samples == 0) throw std::invalid_argument("hyperbolicity_probe: neighborhood misses D");
  out.C = min_constant(cert, out.sup_u);
  return out;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_slope: need >= 2 pairs");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fitted_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

CompletenessReport completeness_probe(const DomainSpec& D, const Vec& p, const Vec& b,
                                      const std::vector<double>& ts, const CompletenessOptions& options) {
  if (ts.empty()) throw std::invalid_argument("completeness_probe: empty sequence");
  if (!D.contains(p)) throw std::invalid_argument("completeness_probe: p is not in D");
  CompletenessReport out;
  const Vec dir = b - p;
  const double rho_p = D.rho(p);
  auto quad = [&](double t, const std::function<double(const Vec&)>& integrand) {
    // trapezoid in tau = -log(1 - s), ds = (1 - s) dtau
    const double tau_end = -std::log(1.0 - t);
    const int steps = std::max(4, static_cast<int>(std::ceil(options.steps_per_decade * tau_end / std::log(10.0))) + 4);
    double sum = 0.0;
    for (int j = 0; j <= steps; ++j) {
      const double tau = tau_end * j / steps;
      const double s = 1.0 - std::exp(-tau);
      const double wgt = (j == 0 || j == steps) ? 0.5 : 1.0;
      sum += wgt * integrand(p + s * dir) * (1.0 - s);
    }
    return sum * tau_end / steps;
  };
  for (double t : ts) {
    if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("completeness_probe: t must lie in [0, 1)");
    const Vec q = p + t * dir;
    if (!D.contains(q)) throw NumericalError("completeness_probe: ray leaves D at t = " + std::to_string(t));
    const double rq = D.rho(q);
    out.t.push_back(t);
    out.rho.push_back(rq);
    out.lower.push_back(options.c * std::abs(std::log(rq / rho_p)));
    out.bracket_integral.push_back(quad(t, [&](const Vec& x) { return boundary_estimate(D, x, dir, options.c); }));
    if (options.with_upper)
      out.upper.push_back(quad(t, [&](const Vec& x) {
        const UpperBound ub = kr_upper(D, x, dir, options.upper);
        return ub.alpha;
      }));
  }
  out.monotone = true;
  for (std::size_t k = 1; k < out.lower.size(); ++k)
    if (!(out.lower[k] > out.lower[k - 1]) || !(out.bracket_integral[k] > out.bracket_integral[k - 1]))
      out.monotone = false;
  std::vector<double> lx;
  for (double r : out.rho) lx.push_back(std::log(1.0 / std::abs(r)));
  if (out.t.size() >= 2) {
    out.lower_slope = fitted_slope(lx, out.lower);
    if (!out.upper.empty()) {
      std::vector<double> ux;
      for (double t : out.t) ux.push_back(std::log(1.0 / (1.0 - t)));
      out.upper_slope = fitted_slope(ux, out.upper);
    }
  }
  // logarithmic divergence: the bound grows linearly in log(1/|rho|) at a rate bounded below
  out.unbounded = out.monotone && options.c > 0.0 && out.lower_slope >= 0.5 * options.c;
  return out;
}

}  // namespace akr
