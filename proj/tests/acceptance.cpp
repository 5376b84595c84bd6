// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "akr/records.hpp"
#include "akr/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace akr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec e(int d, int k, double s = 1.0) { return s * Vec::Unit(d, k); }

// Every certified lower bound paired with a witnessed upper bound at the same (p, v).
struct Sandwich {
  std::mutex mu;
  int pairs = 0;
  double worst = 0.0;
  std::vector<std::string> violations;

  void add(const std::string& label, double lower, double upper) {
    std::lock_guard<std::mutex> lock(mu);
    ++pairs;
    if (upper > 0.0 && std::isfinite(upper)) worst = std::max(worst, lower / upper);
    if (lower > upper * (1.0 + 1e-9)) violations.push_back(label + ": " + format_number(lower) + " > " + format_number(upper));
  }
};

Sandwich sandwich;
int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << detail << std::endl;
  if (!ok) ++failures;
}

template <class F>
void guarded(int id, const std::string& name, F f) {
  try {
    f();
  } catch (const std::exception& ex) {
    report(id, name, false, std::string("exception: ") + ex.what());
  }
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

int shell(const std::string& args, std::string* text = nullptr) {
  const std::string cmd = std::string(AKR_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return -1;
  char buf[4096];
  std::string out;
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  if (text) *text = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ModelParams ball_table() {
  return {{"rho.0", "2 0 0 0 : 1"}, {"rho.1", "0 2 0 0 : 1"}, {"rho.2", "0 0 2 0 : 1"},
          {"rho.3", "0 0 0 2 : 1"}, {"rho.4", "0 0 0 0 : -1"}};
}

// ------------------------------------------------------------------ 1
void structure_axiom() {
  std::vector<std::pair<std::string, ModelParams>> models = {
      {"unit-ball", {}}, {"siegel-model", {}}, {"deformed-ball", {{"eps", "0.2"}}},
      {"deformed-ball", {{"eps", "0.2"}, {"profile", "linear"}}}, {"diagonal-dim4", {{"eps", "0.2"}}},
      {"table", ball_table()}};
  bool ok = true;
  double worst = 0.0, slowest = 0.0;
  for (const auto& [name, params] : models) {
    const auto t0 = Clock::now();
    const ModelInstance m = build_model(name, params, false);
    const StructureReport r = validate_structure(m.domain.J, m.domain.region);
    const double dt = seconds_since(t0);
    ok = ok && r.accepted && r.max_residual <= 1e-8 && dt < 1.0;
    worst = std::max(worst, r.max_residual);
    slowest = std::max(slowest, dt);
  }
  report(1, "structure axiom", ok,
         std::to_string(models.size()) + " models, max residual " + fmt(worst) + ", slowest " + fmt(slowest) + " s");
}

// ------------------------------------------------------------------ 2
ScalarField random_polynomial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ex(0, 2);
  std::normal_distribution<double> g;
  PolynomialTable t;
  t.n = 2;
  for (int k = 0; k < 8; ++k) {
    PolynomialTerm term;
    int total = 0;
    for (int i = 0; i < 4; ++i) {
      int a = ex(rng);
      if (total + a > 4) a = 0;
      total += a;
      term.exponents.push_back(a);
    }
    term.coefficient = Mat::Constant(1, 1, g(rng));
    t.terms.push_back(term);
  }
  return polynomial_field(t);
}

AlmostComplexStructure random_structure(std::mt19937_64& rng, double eps) {
  std::normal_distribution<double> g;
  std::vector<Mat> A(4);
  for (Mat& a : A) a = Mat::NullaryExpr(4, 4, [&]() { return eps * g(rng); });
  return AlmostComplexStructure::conjugated(
      2,
      [A](const Vec& x) {
        Mat P = Mat::Identity(4, 4);
        for (int k = 0; k < 4; ++k) P += x(k) * A[k];
        return P;
      },
      [A](const Vec&) { return A; });
}

void levi_normalization() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 4;
    Vec p(2 * n), v(2 * n);
    for (int i = 0; i < 2 * n; ++i) p(i) = g(rng), v(i) = g(rng);
    const double l = levi_form(squared_norm_field(2 * n, Vec::Zero(2 * n)), AlmostComplexStructure::standard(n), p, v);
    worst = std::max(worst, std::abs(l - v.squaredNorm()));
  }
  // Formula route on a sampled field with step h against the jet of a solved disc.
  const double h = 1e-3;
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  int bad = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ScalarField f = random_polynomial(rng);
    const AlmostComplexStructure J = random_structure(rng, 0.1);
    Vec p(4), v(4);
    for (int i = 0; i < 4; ++i) p(i) = u(rng), v(i) = g(rng);
    v.normalize();
    const ScalarField sampled = ScalarField::sampled(4, [f](const Vec& x) { return f(x); }, h);
    const double formula = levi_form(sampled, J, p, v);
    const JHoloDisc disc = solve_disc(J, p, v, DiscGrid{16, 32, 0.2}, {1e-13, 50, 0, false});
    const SecondJet jet = measured_jet(disc);
    const Jet2 j = f.jet(p);
    const double route = 0.25 * (jet.fx.dot(j.hess * jet.fx) + jet.fy.dot(j.hess * jet.fy) + j.grad.dot(jet.laplacian));
    const double tol = 10.0 * (h * h + disc.residual);
    worst_ratio = std::max(worst_ratio, std::abs(formula - route) / tol);
    if (std::abs(formula - route) > tol) ++bad;
  }
  report(2, "Levi normalization", worst <= 1e-8 && bad == 0,
         "max |L(|z|^2) - |v|^2| = " + fmt(worst) + " over 100 cases; two routes: " + std::to_string(bad) +
             "/50 outside 10(h^2 + r), worst |diff|/tol = " + fmt(worst_ratio));
}

// ------------------------------------------------------------------ 3
void weight_constants(const fs::path& out) {
  bool ok = true;
  std::ostringstream detail;
  const auto t0 = Clock::now();
  for (const char* eps : {"0", "0.02", "0.05"}) {
    const fs::path d = out / (std::string("certify_") + eps);
    fs::create_directories(d);
    const int code = shell("certify --model deformed-ball --param eps=" + std::string(eps) + " --out " + d.string());
    int replayed = 0;
    for (const char* kind : {"psh", "weight"}) {
      const fs::path cert = d / ("deformed-ball.certify." + std::string(kind) + ".cert");
      std::string text;
      const int v = shell("verify " + cert.string(), &text);
      const bool exact = text.find("drift=0.000e+00") != std::string::npos && text.find("status=pass") != std::string::npos;
      if (v == 0 && exact) ++replayed;
    }
    const VerifyReport w = verify_certificate((d / "deformed-ball.certify.weight.cert").string());
    ok = ok && code == 0 && replayed == 2;
    detail << "eps=" << eps << " weight min Levi " << fmt(w.parsed ? w.recorded_min : 0.0) << " replay " << replayed << "/2; ";
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < 60.0;
  detail << fmt(dt) << " s";
  report(3, "weight constants", ok, detail.str());
}

// ------------------------------------------------------------------ 4
void disc_solver() {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.05"}}, false);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0.0;
  int iters = 0;
  bool ok = true;
  for (int k = 0; k < 6; ++k) {
    Vec p(4), v(4);
    for (int i = 0; i < 4; ++i) p(i) = 0.2 * g(rng), v(i) = g(rng);
    v.normalize();
    const JHoloDisc f = solve_disc(m.domain.J, p, v, DiscGrid{16, 32, 0.3}, {1e-12, 50, 0, false});
    worst = std::max(worst, disc_residual(f, m.domain.J));
    iters = std::max(iters, f.iterations);
    ok = ok && f.grid.radius == 0.3;
  }
  ok = ok && worst <= 1e-8 && iters <= 50;

  const AlmostComplexStructure Jst = AlmostComplexStructure::standard(2);
  const Vec p = (Vec(4) << 0.1, -0.2, 0.3, 0.0).finished(), v = (Vec(4) << 0.6, 0.0, -0.2, 0.5).finished();
  const JHoloDisc s = solve_disc(Jst, p, v, DiscGrid{16, 32, 0.3});
  const Complex z(0.2, -0.1);
  const double affine_err = (s.value(z) - (p + z.real() * v + z.imag() * (standard_structure(2) * v))).norm();
  const bool exact = s.iterations <= 1 && s.residual <= 1e-12 && affine_err < 1e-12;

  // block-diagonal J: discs through 0 tangent to z_2 = 0 have (f_2)_{zeta zetabar}(0) = 0
  double jet2 = 0.0;
  for (const char* eps : {"0.05", "0.2"}) {
    const ModelInstance dm = build_model("diagonal-dim4", {{"eps", eps}}, false);
    for (const Vec& w : {e(4, 0), Vec((Vec(4) << 0.6, 0.8, 0.0, 0.0).finished())}) {
      const JHoloDisc f = solve_disc(dm.domain.J, Vec::Zero(4), w, DiscGrid{16, 32, 0.2}, {1e-13, 50, 0, false});
      jet2 = std::max(jet2, std::abs(measured_jet(f).f_zetazetabar(1)));
      jet2 = std::max(jet2, std::abs(second_jet(dm.domain.J, Vec::Zero(4), w).f_zetazetabar(1)));
    }
  }
  report(4, "disc solver", ok && exact && jet2 <= 1e-6,
         "deformed-ball(0.05) max residual " + fmt(worst) + " in <= " + std::to_string(iters) +
             " iterations; J_st iterations " + std::to_string(s.iterations) + " error " + fmt(affine_err) +
             "; diagonal |(f_2)_zz*(0)| " + fmt(jet2));
}

// ------------------------------------------------------------------ 5
void oracle_anchors() {
  const ModelInstance disc = build_model("unit-ball", {{"n", "1"}});
  const UpperBound k0 = kr_upper(disc.domain, Vec::Zero(2), e(2, 0));
  const LowerCertificate c0 = certify_lower(disc.domain, disc.domain.rho, GridRegion::ball(Vec::Zero(2), 1.2, 9), {Vec::Zero(2)});
  const double l0 = kr_lower_sibony(disc.domain, Vec::Zero(2), e(2, 0), c0);
  sandwich.add("unit disc K(0,1)", l0, k0.alpha);

  const ModelInstance ball = build_model("unit-ball");
  const double t = 0.5;
  const Vec p = e(4, 2, t);
  const UpperBound kn = kr_upper(ball.domain, p, e(4, 2));
  const LowerCertificate cb = certify_lower(ball.domain, ball.domain.rho, GridRegion::ball(Vec::Zero(4), 1.2, 9), {p});
  sandwich.add("ball normal t=0.5", kr_lower_sibony(ball.domain, p, e(4, 2), cb), kn.alpha);
  const double mobius = 1.0 / (1.0 - t * t);

  DistanceOptions opt;
  opt.steps = 16;
  opt.lower_constant = c0.certified ? kr_lower_sibony(disc.domain, Vec::Zero(2), e(2, 0), c0) : 0.0;
  const DistanceBounds db = distance_bounds(disc.domain, Vec::Zero(2), e(2, 0, 0.5), {straight_path(Vec::Zero(2), e(2, 0, 0.5))}, opt);
  const double poincare = std::atanh(0.5);
  sandwich.add("distance lower vs upper", db.lower, db.upper);

  const double e1 = std::abs(k0.alpha - 1.0), e2 = std::abs(kn.alpha / mobius - 1.0), e3 = std::abs(db.upper / poincare - 1.0);
  report(5, "oracle anchors", e1 <= 0.02 && e2 <= 0.05 && e3 <= 0.05,
         "K(0,1) = " + fmt(k0.alpha, 6) + "; ball normal " + fmt(kn.alpha, 6) + " vs " + fmt(mobius, 6) +
             "; distance " + fmt(db.upper, 6) + " vs " + fmt(poincare, 6));
}

// ------------------------------------------------------------------ 6
struct ShapeRun {
  ScaledCertificate cert;
  std::vector<double> inv_rho, normal, tangential;
  double calibrated = 0.0;
};

ShapeRun shape_run(const ModelInstance& m, const ScalingSequence& seq, int grid) {
  LowerOptions o;
  o.grid = grid;
  ShapeRun r;
  r.cert = certify_scaled(seq, o);
  if (!r.cert.certified) throw NumericalError("certify_scaled failed: " + r.cert.diagnostic);
  std::vector<CalibrationSample> samples;
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    const ScaleStep& s = seq.steps[i];
    r.inv_rho.push_back(1.0 / std::abs(m.domain.rho(s.p)));
    r.normal.push_back(kr_lower_scaled(seq, static_cast<int>(i), e(4, 2), r.cert));
    r.tangential.push_back(kr_lower_scaled(seq, static_cast<int>(i), e(4, 0), r.cert));
    samples.push_back({s.p, e(4, 2), r.normal.back()});
    samples.push_back({s.p, e(4, 0), r.tangential.back()});
  }
  r.calibrated = calibrate_constant(m.domain, samples).c;
  return r;
}

void theorem_shape() {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.02"}});
  const std::vector<double> ts = {0.5, 0.9, 0.99};
  std::vector<double> deltas;
  for (double t : ts) deltas.push_back(1.0 - t);
  const ScalingSequence seq = scaling_sequence(m.domain, e(4, 2, -0.5), deltas);
  const ShapeRun a = shape_run(m, seq, 9);
  const ShapeRun b = shape_run(m, seq, 13);
  std::vector<double> lx, ln, lt;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    lx.push_back(std::log(a.inv_rho[i]));
    ln.push_back(std::log(a.normal[i]));
    lt.push_back(std::log(a.tangential[i]));
  }
  const double sn = fitted_slope(lx, ln), st = fitted_slope(lx, lt);
  // witnessed upper bounds at the same points, in parallel
  std::vector<double> up(2 * ts.size());
  parallel_for(static_cast<int>(up.size()), 0, [&](int k) {
    const ScaleStep& s = seq.steps[k / 2];
    up[k] = kr_upper(m.domain, s.p, k % 2 == 0 ? e(4, 2) : e(4, 0)).alpha;
  });
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sandwich.add("shape normal t=" + fmt(ts[i]), std::max(a.normal[i], b.normal[i]), up[2 * i]);
    sandwich.add("shape tangential t=" + fmt(ts[i]), std::max(a.tangential[i], b.tangential[i]), up[2 * i + 1]);
  }
  const double drift = std::abs(b.calibrated / a.calibrated - 1.0);
  const bool ok = std::abs(sn - 1.0) <= 0.15 && std::abs(st - 0.5) <= 0.1 && a.calibrated > 0.0 && drift <= 0.2;
  report(6, "blow-up shape", ok,
         "exponents normal " + fmt(sn) + ", tangential " + fmt(st) + "; c = " + fmt(a.calibrated) + " (grid 9), " +
             fmt(b.calibrated) + " (grid 13), drift " + fmt(100 * drift, 3) + "%");
}

// ------------------------------------------------------------------ 7
void localization() {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.05"}});
  const DomainSpec& D = m.domain;
  const Vec b = m.boundary;
  const GridRegion U = GridRegion::ball(b, 0.6, 9);
  const GridRegion V1 = GridRegion::ball(b, 0.3, 9);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> un(0.0, 1.0);
  std::vector<Vec> centers, dirs;
  while (centers.size() < 20) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x(i) = g(rng);
    const Vec p = b + 0.25 * std::pow(un(rng), 0.25) * x.normalized();
    if (!(D.rho(p) < -0.02)) continue;
    Vec v(4);
    for (int i = 0; i < 4; ++i) v(i) = g(rng);
    centers.push_back(p);
    dirs.push_back(v.normalized());
  }
  const LowerCertificate cert = certify_lower(D, D.rho, U, centers);
  if (!cert.certified) throw NumericalError("certify_lower failed: " + cert.diagnostic);
  std::vector<double> s(20), reach(20, 0.0);
  std::vector<int> violations(20, 0);
  std::vector<UpperBound> ub(20);
  // any disc into D bounds the localization, so the cheaper beta = 0 witnesses suffice
  UpperOptions uo;
  uo.optimize_beta = false;
  parallel_for(20, 0, [&](int k) { ub[k] = kr_upper(D, centers[k], dirs[k], uo); });
  for (int k = 0; k < 20; ++k) {
    s[k] = localization_factor(D, U, V1, centers[k], cert);
    sandwich.add("localization center " + std::to_string(k), kr_lower_sibony(D, centers[k], dirs[k], cert), ub[k].alpha);
    if (!ub[k].witness) {
      violations[k] = 1;
      continue;
    }
    const JHoloDisc& f = *ub[k].witness;
    for (int i = 1; i <= 8; ++i)
      for (int j = 0; j < 32; ++j) {
        const Complex xi = std::polar(s[k] * i / 8.0, 2 * M_PI * j / 32.0);
        const Vec x = f.unit_value(xi);
        if (!(D.contains(x) && U.contains(x))) ++violations[k];
      }
    // largest radius with the witness still inside D n U, for context
    for (int i = 1; i <= 100; ++i) {
      bool inside = true;
      for (int j = 0; j < 32 && inside; ++j) {
        const Vec x = f.unit_value(std::polar(i / 100.0, 2 * M_PI * j / 32.0));
        inside = D.contains(x) && U.contains(x);
      }
      if (!inside) break;
      reach[k] = i / 100.0;
    }
  }
  int total = 0;
  bool in_range = true;
  for (int k = 0; k < 20; ++k) {
    total += violations[k];
    in_range = in_range && s[k] > 0.0 && s[k] < 1.0;
  }
  report(7, "localization", total == 0 && in_range,
         "20 witness discs, " + std::to_string(total) + " violations; s in [" +
             fmt(*std::min_element(s.begin(), s.end())) + ", " + fmt(*std::max_element(s.begin(), s.end())) +
             "], witnesses stay in D n U up to |zeta| >= " + fmt(*std::min_element(reach.begin(), reach.end()), 2));
}

// ------------------------------------------------------------------ 8
void scaling_pipeline() {
  const ModelInstance m = build_model("deformed-ball", {{"eps", "0.05"}});
  const Vec p0 = m.boundary + 0.005 * (m.interior - m.boundary).normalized();
  const ScalingSequence seq = geometric_sequence(m.domain, p0, 6);
  const ConvergenceReport rep = convergence_report(seq);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double levi = 0.0;
  for (const ScaleStep& s : seq.steps)
    for (int k = 0; k < 5; ++k) {
      Vec dx(4), v(4);
      for (int i = 0; i < 4; ++i) dx(i) = 0.5 * s.delta * u(rng), v(i) = u(rng);
      levi = std::max(levi, levi_invariance_residual(m.domain.rho, m.domain.J, s.M, s.p + dx, v));
    }
  const ScaledCertificate cert = certify_scaled(seq);
  bool steps_ok = cert.certified;
  for (std::size_t i = 0; i < seq.steps.size(); ++i)
    if (seq.steps[i].nu >= 2) steps_ok = steps_ok && cert.checks.at(i).passed;
  std::vector<double> up(seq.steps.size());
  parallel_for(static_cast<int>(up.size()), 0, [&](int k) { up[k] = kr_upper(m.domain, seq.steps[k].p, e(4, 0)).alpha; });
  for (std::size_t i = 0; i < seq.steps.size(); ++i)
    sandwich.add("scaled step " + std::to_string(seq.steps[i].nu), kr_lower_scaled(seq, static_cast<int>(i), e(4, 0), cert), up[i]);
  report(8, "scaling pipeline", rep.monotone && rep.decay_exponent >= 0.4 && levi <= 1e-6 && steps_ok,
         "limit " + rep.limit_kind + ", monotone " + std::to_string(rep.monotone) + ", exponent " +
             fmt(rep.decay_exponent) + ", Levi residual " + fmt(levi) + ", C = " + fmt(cert.C) + " for all " +
             std::to_string(seq.steps.size()) + " steps");
}

// ------------------------------------------------------------------ 9
void completeness() {
  const ModelInstance m = build_model("unit-ball", {{"radius", "0.5"}});
  const DomainSpec& D = m.domain;
  const std::vector<double> ts = {0.9, 0.99, 0.999};
  const Vec dir = m.boundary - m.interior;
  std::vector<Vec> centers;
  for (double t : ts) centers.push_back(m.interior + t * dir);
  const LowerCertificate cert = certify_lower(D, D.rho, GridRegion::ball(m.interior, 2.0, 9), centers);
  if (!cert.certified) throw NumericalError("certify_lower failed: " + cert.diagnostic);
  std::vector<CalibrationSample> samples;
  for (const Vec& q : centers) samples.push_back({q, dir, kr_lower_sibony(D, q, dir, cert)});
  CompletenessOptions opt;
  opt.c = calibrate_constant(D, samples).c;
  opt.with_upper = true;
  opt.upper.optimize_beta = false;
  opt.steps_per_decade = 3;
  const CompletenessReport r = completeness_probe(D, m.interior, m.boundary, ts, opt);
  std::ostringstream detail;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sandwich.add("distance t=" + fmt(ts[k]), r.lower[k], r.upper[k]);
    detail << "t=" << ts[k] << " lower " << fmt(r.lower[k]) << " upper " << fmt(r.upper[k]) << "; ";
  }
  detail << "c = " << fmt(opt.c) << ", slope " << fmt(r.lower_slope);
  report(9, "completeness probe", r.monotone && r.unbounded, detail.str());
}

// ------------------------------------------------------------------ 10
void metric_task(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.task = "metric";
  cfg.model = "deformed-ball";
  cfg.params = {{"eps", "0.05"}};
  cfg.out = out.string();
  cfg.options = {{"samples", "4"}};
  std::ostringstream log;
  const RunResult r = run(cfg, log);
  sandwich.add("metric task worst ratio", r.max_lower_over_upper, 1.0);
  if (r.exit_code != 0)
    for (const std::string& f : r.failures) std::cout << "  metric task: " << f << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = Clock::now();
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto selected = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  const fs::path out = fs::temp_directory_path() / "akr_acceptance";
  fs::remove_all(out);
  fs::create_directories(out);

  if (selected(1)) guarded(1, "structure axiom", structure_axiom);
  if (selected(2)) guarded(2, "Levi normalization", levi_normalization);
  if (selected(3)) guarded(3, "weight constants", [&] { weight_constants(out); });
  if (selected(4)) guarded(4, "disc solver", disc_solver);
  if (selected(5)) guarded(5, "oracle anchors", oracle_anchors);
  if (selected(6)) guarded(6, "blow-up shape", theorem_shape);
  if (selected(7)) guarded(7, "localization", localization);
  if (selected(8)) guarded(8, "scaling pipeline", scaling_pipeline);
  if (selected(9)) guarded(9, "completeness probe", completeness);
  if (selected(10)) guarded(10, "sandwich", [&] {
    metric_task(out);
    std::string detail = std::to_string(sandwich.pairs) + " lower/upper pairs, worst lower/upper " + fmt(sandwich.worst);
    for (const std::string& v : sandwich.violations) detail += "; " + v;
    report(10, "sandwich", sandwich.violations.empty() && sandwich.pairs > 0, detail);
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
            << fmt(seconds_since(t0)) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
