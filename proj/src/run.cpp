#include "akr/run.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace akr {

namespace {

double option_real(const ExperimentConfig& cfg, const std::string& k, double def) {
  auto it = cfg.options.find(k);
  if (it == cfg.options.end()) return def;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != it->second.size()) throw std::invalid_argument("option " + k + ": not a number: '" + it->second + "'");
  return v;
}

int option_int(const ExperimentConfig& cfg, const std::string& k, int def) {
  const double v = option_real(cfg, k, def);
  if (v != std::floor(v)) throw std::invalid_argument("option " + k + ": expected an integer");
  return static_cast<int>(v);
}

std::string stem(const ExperimentConfig& cfg) {
  return (std::filesystem::path(cfg.out) / (cfg.model + "." + cfg.task)).string();
}

void emit(RunResult& res, const std::string& path, const std::string& content) {
  write_text(path, content);
  res.files.push_back(path);
}

void fail(RunResult& res, std::ostream& log, const std::string& what) {
  res.failures.push_back(what);
  log << "FAIL " << what << "\n";
}

LowerOptions lower_options(const ExperimentConfig& cfg) {
  LowerOptions o;
  if (cfg.grid > 0) o.grid = cfg.grid;
  o.r = option_real(cfg, "r", o.r);
  o.puncture = option_real(cfg, "puncture", o.puncture);
  return o;
}

// Complex-tangential unit vector at the chart's boundary point.
Vec tangential_direction(const ScalingSequence& seq) { return seq.chart.T.inverse().col(0).normalized(); }

// ----------------------------------------------------------------- tasks

void task_validate(const ExperimentConfig& cfg, RunResult& res, std::ostream& log) {
  const ModelInstance m = build_model(cfg.model, cfg.params, true);
  Table t;
  t.title = cfg.model + " validate";
  t.columns = {"residual", "tolerance", "strict_margin", "min_levi"};
  t.units = {"-", "-", "-", "-"};
  for (const auto& [k, v] : m.params) t.notes.push_back("param " + k + ": " + v);
  const double margin = m.strictness ? m.strictness->margin : std::nan("");
  const double ml = m.strictness ? m.strictness->min_levi : std::nan("");
  t.add({m.structure.max_residual, cfg.tol, margin, ml});
  log << "validate " << cfg.model << " residual=" << format_number(m.structure.max_residual) << "\n";
  if (!(m.structure.max_residual <= cfg.tol))
    fail(res, log, "structure residual " + format_number(m.structure.max_residual) + " exceeds " + format_number(cfg.tol));
  emit(res, stem(cfg) + ".tbl", t.str());
}

void task_certify(const ExperimentConfig& cfg, RunResult& res, std::ostream& log) {
  const ModelInstance m = build_model(cfg.model, cfg.params, true);
  const LowerOptions lo = lower_options(cfg);
  Table t;
  t.title = cfg.model + " certify";
  t.columns = {"kind", "samples", "min_levi", "margin", "A", "B"};
  t.units = {"0=psh 1=weight", "-", "-", "-", "-", "-"};
  auto replay = [&](const std::string& text, const std::string& path) {
    emit(res, path, text);
    const VerifyReport v = verify_record(text);
    log << v.summary << "\n";
    if (!v.passed) fail(res, log, "replay of " + path + " failed");
  };
  if (m.strictness) {
    const PshCertificate& c = *m.strictness;
    t.add({0, double(c.samples), c.min_levi, c.margin, std::nan(""), std::nan("")});
    replay(psh_record(m, c), stem(cfg) + ".psh.cert");
  }
  const int d = m.domain.real_dim();
  const Vec q = m.interior;
  const Mat L = *normalize_at_point(m.domain.J, q).linear;
  const double radius = option_real(cfg, "chart_radius", 0.5 * (m.interior - m.boundary).norm());
  WeightRecord w;
  w.center = q;
  w.Z = L / (radius * Eigen::JacobiSVD<Mat>(L).singularValues().minCoeff());
  w.puncture = lo.puncture;
  const AlmostComplexStructure Jz = direct_image(m.domain.J, CoordinateChart::affine(w.Z, q));
  w.weight = find_weight_constants(Jz, GridRegion::ball(Vec::Zero(d), 1.0, lo.grid, lo.h), lo.r, lo.puncture, 1.0e6,
                                   lo.r);
  log << "weight r=" << format_number(lo.r) << " A=" << format_number(w.weight.A) << " B="
      << format_number(w.weight.B) << "\n";
  const PshCertificate& wc = w.weight.certificate;
  t.add({1, double(wc.samples), wc.min_levi, wc.margin, w.weight.A, w.weight.B});
  replay(weight_record(m, w), stem(cfg) + ".weight.cert");
  emit(res, stem(cfg) + ".tbl", t.str());
}

void task_disc(const ExperimentConfig& cfg, RunResult& res, std::ostream& log) {
  const ModelInstance m = build_model(cfg.model, cfg.params, false);
  const int d = m.domain.real_dim();
  const double radius = option_real(cfg, "radius", 0.3);
  Table t;
  t.title = cfg.model + " disc";
  t.columns = {"direction", "radius", "residual", "iterations"};
  t.units = {"axis", "-", "-", "-"};
  t.notes.push_back("center: " + format_vector(m.interior));
  for (int k = 0; k < d; k += 2) {
    SolveOptions so;
    so.tol = std::min(cfg.tol, 1e-10);
    so.allow_halving = false;
    const JHoloDisc f = solve_disc(m.domain.J, m.interior, Vec::Unit(d, k), DiscGrid{16, 32, radius}, so);
    const double r = disc_residual(f, m.domain.J);
    t.add({double(k), f.grid.radius, r, double(f.iterations)});
    log << "disc axis=" << k << " residual=" << format_number(r) << " iterations=" << f.iterations << "\n";
    if (!(r <= cfg.tol)) fail(res, log, "disc residual " + format_number(r) + " on axis " + std::to_string(k));
  }
  emit(res, stem(cfg) + ".tbl", t.str());
}

// Boundary approach: certified scaled lower bounds against witnessed upper bounds.
void task_metric(const ExperimentConfig& cfg, RunResult& res, std::ostream& log, bool sweep) {
  const ModelInstance m = build_model(cfg.model, cfg.params, true);
  const DomainSpec& D = m.domain;
  const int d = D.real_dim();
  const int count = option_int(cfg, "samples", sweep ? 4 : 10);
  if (count < 2) throw std::invalid_argument("option samples: need at least 2");
  const double reach = (m.interior - m.boundary).norm();
  const double dmax = option_real(cfg, "delta_max", 0.5 * reach);
  const double dmin = option_real(cfg, "delta_min", 0.01 * dmax);
  if (!(dmin > 0.0 && dmin < dmax)) throw std::invalid_argument("options delta_min/delta_max: need 0 < min < max");
  std::vector<double> deltas;
  for (int k = 0; k < count; ++k) deltas.push_back(dmax * std::pow(dmin / dmax, double(k) / (count - 1)));
  const Vec p0 = m.boundary + 0.5 * (m.interior - m.boundary);
  const ScalingSequence seq = scaling_sequence(D, p0, deltas, option_real(cfg, "alpha", 0.1));
  const ScaledCertificate cert = certify_scaled(seq, lower_options(cfg));
  if (!cert.certified) {
    fail(res, log, "scaled certificate: " + cert.diagnostic);
    return;
  }
  std::vector<Vec> dirs;
  if (sweep) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g;
    const int nd = option_int(cfg, "directions", 4);
    for (int j = 0; j < nd; ++j) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v(i) = g(rng);
      dirs.push_back(v.normalized());
    }
  } else {
    dirs = {seq.chart.normal, tangential_direction(seq)};
  }
  struct Sample {
    double lower = 0.0, upper = kInfinity, bracket = 0.0;
  };
  const int total = count * static_cast<int>(dirs.size());
  std::vector<Sample> out(total);
  UpperOptions uo;
  parallel_for(total, cfg.threads, [&](int i) {
    const int k = i / static_cast<int>(dirs.size()), j = i % static_cast<int>(dirs.size());
    const Vec& p = seq.steps[k].p;
    out[i].lower = kr_lower_scaled(seq, k, dirs[j], cert);
    out[i].upper = kr_upper(D, p, dirs[j], uo).alpha;
    out[i].bracket = boundary_bracket(D, p, dirs[j]);
  });
  Table t;
  t.title = cfg.model + (sweep ? " sweep" : " metric");
  t.columns = {"delta", "rho", "direction", "lower", "upper", "bracket", "lower_over_sqrt_bracket"};
  t.units = {"-", "-", sweep ? "sample" : "0=normal 1=tangential", "K", "K", "-", "-"};
  t.notes.push_back("lower: certified exp(-1/2 - B|u|/c)|Z M v| on the scaled domain, c=" + format_number(cert.c) +
                    " B=" + format_number(cert.B) + " K=" + format_number(cert.K));
  t.notes.push_back("upper: witnessed unit J-disc in D");
  std::vector<CalibrationSample> cs;
  for (int i = 0; i < total; ++i) {
    const int k = i / static_cast<int>(dirs.size()), j = i % static_cast<int>(dirs.size());
    const Vec& p = seq.steps[k].p;
    t.add({seq.steps[k].delta, D.rho(p), double(j), out[i].lower, out[i].upper, out[i].bracket,
           out[i].lower / std::sqrt(out[i].bracket)});
    cs.push_back({p, dirs[j], out[i].lower});
    if (std::isfinite(out[i].upper))
      res.max_lower_over_upper = std::max(res.max_lower_over_upper, out[i].lower / out[i].upper);
    if (out[i].lower > out[i].upper)
      fail(res, log, "sandwich violated at delta=" + format_number(seq.steps[k].delta) + " direction " +
                         std::to_string(j));
  }
  const Calibration cal = calibrate_constant(D, cs);
  t.notes.push_back("calibrated c: " + format_number(cal.c));
  log << t.title << " samples=" << total << " c=" << format_number(cal.c)
      << " max lower/upper=" << format_number(res.max_lower_over_upper) << "\n";
  emit(res, stem(cfg) + ".tbl", t.str());
}

void task_scale(const ExperimentConfig& cfg, RunResult& res, std::ostream& log) {
  const ModelInstance m = build_model(cfg.model, cfg.params, true);
  const DomainSpec& D = m.domain;
  const int d = D.real_dim();
  const Vec e = (m.interior - m.boundary).normalized();
  const Vec p0 = m.boundary + option_real(cfg, "delta0", 0.005) * e;
  const ScalingSequence seq = geometric_sequence(D, p0, option_int(cfg, "steps", 6), option_real(cfg, "alpha", 0.1));
  const ConvergenceReport rep = convergence_report(seq);
  const ScaledCertificate cert = certify_scaled(seq, lower_options(cfg));
  if (!cert.certified) fail(res, log, "scaled certificate: " + cert.diagnostic);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Table t;
  t.title = cfg.model + " scale";
  t.columns = {"nu", "delta", "c0", "c1", "rho_c2", "levi_residual", "margin"};
  t.units = {"-", "-", "sup", "sup", "-", "abs", "-"};
  t.notes.push_back("limit: " + seq.limit_kind);
  t.notes.push_back("decay_exponent: " + format_number(rep.decay_exponent));
  t.notes.push_back(std::string("monotone: ") + (rep.monotone ? "yes" : "no"));
  if (cert.certified) t.notes.push_back("uniform C: " + format_number(cert.C));
  const double levi_tol = option_real(cfg, "levi_tol", 1e-6);
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    double r = 0.0;
    for (int j = 0; j < 5; ++j) {
      Vec x(d), v(d);
      for (int i = 0; i < d; ++i) {
        x(i) = u(rng);
        v(i) = u(rng);
      }
      r = std::max(r, levi_invariance_residual(seq.chart.rho_n, seq.chart.J_T, seq.steps[k].Lambda, x, v));
    }
    if (!(r <= levi_tol)) fail(res, log, "Levi invariance residual " + format_number(r) + " at step " + std::to_string(k + 1));
    t.add({double(seq.steps[k].nu), seq.steps[k].delta, rep.rows[k].c0, rep.rows[k].c1, rep.rows[k].rho_c2, r,
           k < cert.margins.size() ? cert.margins[k] : std::nan("")});
  }
  log << "scale " << cfg.model << " monotone=" << rep.monotone << " decay=" << format_number(rep.decay_exponent) << "\n";
  emit(res, stem(cfg) + ".tbl", t.str());
  emit(res, stem(cfg) + ".log", scaling_log(seq, rep, cert.certified ? &cert : nullptr));
}

void task_verify(const ExperimentConfig& cfg, RunResult& res, std::ostream& log) {
  auto it = cfg.options.find("file");
  if (it == cfg.options.end()) throw std::invalid_argument("verify: option file is required");
  const VerifyReport v = verify_certificate(it->second, cfg.grid);
  log << v.summary << "\n";
  res.summary = v.summary;
  if (!v.passed) fail(res, log, "certificate replay failed: " + it->second);
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {"validate", "certify", "disc", "metric", "scale", "sweep", "verify"};
  return names;
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (section == "params" || section == "options") {
      auto& dst = section == "params" ? cfg.params : cfg.options;
      for (const auto& [k, v] : body) dst[k] = v.data();
      continue;
    }
    if (section != "experiment") throw std::invalid_argument("config: unknown section [" + section + "]");
    for (const auto& [k, v] : body) {
      const std::string& s = v.data();
      auto number = [&](double& dst) {
        std::size_t pos = 0;
        try {
          dst = std::stod(s, &pos);
        } catch (const std::exception&) {
          pos = 0;
        }
        if (pos == 0 || pos != s.size()) throw std::invalid_argument("config field experiment." + k + ": not a number: '" + s + "'");
      };
      double x = 0.0;
      if (k == "task") cfg.task = s;
      else if (k == "model") cfg.model = s;
      else if (k == "out") cfg.out = s;
      else if (k == "grid") { number(x); cfg.grid = static_cast<int>(x); }
      else if (k == "tol") { number(x); cfg.tol = x; }
      else if (k == "seed") { number(x); cfg.seed = static_cast<std::uint64_t>(x); }
      else if (k == "threads") { number(x); cfg.threads = static_cast<int>(x); }
      else throw std::invalid_argument("config: unknown field experiment." + k);
    }
  }
  if (!cfg.task.empty()) validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& names = task_names();
  if (std::find(names.begin(), names.end(), cfg.task) == names.end())
    throw std::invalid_argument("config field task: unknown task '" + cfg.task + "'");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("config field tol: must be positive");
  if (cfg.grid < 0 || cfg.grid == 1 || cfg.grid == 2) throw std::invalid_argument("config field grid: need 0 or >= 3");
  if (cfg.threads < 0) throw std::invalid_argument("config field threads: must be >= 0");
  if (cfg.task != "verify") resolve_params(model_info(cfg.model), cfg.params);
}

void parallel_for(int count, int threads, const std::function<void(int)>& f) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  RunResult res;
  if (cfg.task != "verify") std::filesystem::create_directories(cfg.out);
  try {
    if (cfg.task == "validate") task_validate(cfg, res, log);
    else if (cfg.task == "certify") task_certify(cfg, res, log);
    else if (cfg.task == "disc") task_disc(cfg, res, log);
    else if (cfg.task == "metric") task_metric(cfg, res, log, false);
    else if (cfg.task == "sweep") task_metric(cfg, res, log, true);
    else if (cfg.task == "scale") task_scale(cfg, res, log);
    else task_verify(cfg, res, log);
  } catch (const NumericalError& e) {
    fail(res, log, e.what());
  }
  res.exit_code = res.failures.empty() ? 0 : 1;
  if (res.summary.empty())
    res.summary = cfg.task + " " + cfg.model + (res.exit_code ? " FAILED" : " ok") + ", " +
                  std::to_string(res.files.size()) + " files";
  return res;
}

std::string list_models() {
  std::ostringstream os;
  for (const ModelInfo& m : model_catalog()) {
    os << m.name << "  " << m.summary << "\n";
    for (const ParamSpec& p : m.params) {
      os << "    " << p.name << " = " << p.default_value;
      if (p.kind == ParamSpec::Kind::Choice) {
        os << "  {";
        for (std::size_t i = 0; i < p.choices.size(); ++i) os << (i ? ", " : "") << p.choices[i];
        os << "}";
      } else {
        os << "  [" << p.lo << ", " << p.hi << "]" << (p.kind == ParamSpec::Kind::Integer ? " integer" : "");
      }
      os << "  " << p.doc << "\n";
    }
  }
  return os.str();
}

}  // namespace akr
