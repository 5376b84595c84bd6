#include "akr/records.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace akr {

namespace pt = boost::property_tree;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_vector(const Vec& x) {
  std::string s;
  for (int i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_number(x(i));
  return s;
}

namespace {

double parse_double(const std::string& t, const std::string& field) {
  if (t == "inf") return kInfinity;
  if (t == "-inf") return -kInfinity;
  if (t == "nan") return std::nan("");
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != t.size()) throw std::invalid_argument(field + ": not a number: '" + t + "'");
  return v;
}

pt::ptree::path_type key(const std::string& section, const std::string& name) {
  return pt::ptree::path_type(section + "/" + name, '/');
}

std::string get(const pt::ptree& tree, const std::string& section, const std::string& name) {
  auto v = tree.get_optional<std::string>(key(section, name));
  if (!v) throw std::invalid_argument("record: missing field " + section + "." + name);
  return *v;
}

double get_number(const pt::ptree& tree, const std::string& section, const std::string& name) {
  return parse_double(get(tree, section, name), section + "." + name);
}

void put_region(pt::ptree& tree, const GridRegion& r) {
  for (int c : r.counts)
    if (c != r.counts.front()) throw std::invalid_argument("record: region needs equal counts per axis");
  tree.put(key("region", "shape"), r.shape == GridRegion::Shape::Ball ? "ball" : "box");
  tree.put(key("region", "n"), r.n);
  tree.put(key("region", "count"), r.counts.front());
  tree.put(key("region", "h"), format_number(r.h));
  if (r.shape == GridRegion::Shape::Ball) {
    tree.put(key("region", "center"), format_vector(r.center));
    tree.put(key("region", "outer"), format_number(r.outer_radius));
    tree.put(key("region", "inner"), format_number(r.inner_radius));
  } else {
    tree.put(key("region", "lo"), format_vector(r.lo));
    tree.put(key("region", "hi"), format_vector(r.hi));
  }
}

GridRegion get_region(const pt::ptree& tree, int count_override) {
  const std::string shape = get(tree, "region", "shape");
  const int n = static_cast<int>(get_number(tree, "region", "n"));
  int count = static_cast<int>(get_number(tree, "region", "count"));
  if (count_override > 0) count = count_override;
  const double h = get_number(tree, "region", "h");
  if (shape == "ball")
    return GridRegion::ball(parse_vector(get(tree, "region", "center"), "region.center"),
                            get_number(tree, "region", "outer"), count, h, get_number(tree, "region", "inner"));
  if (shape == "box")
    return GridRegion::box(n, parse_vector(get(tree, "region", "lo"), "region.lo"),
                           parse_vector(get(tree, "region", "hi"), "region.hi"), count, h);
  throw std::invalid_argument("record: region.shape must be ball or box");
}

void put_model(pt::ptree& tree, const ModelInstance& m) {
  tree.put(key("model", "name"), m.name);
  for (const auto& [k, v] : m.params) tree.put(key("params", k), v);
}

ModelInstance get_model(const pt::ptree& tree) {
  ModelParams p;
  if (auto c = tree.get_child_optional("params"))
    for (const auto& [k, v] : *c) p[k] = v.data();
  return build_model(get(tree, "model", "name"), p, false);
}

void put_result(pt::ptree& tree, const PshCertificate& c) {
  tree.put(key("options", "directions"), c.directions);
  tree.put(key("options", "strict"), c.strict ? 1 : 0);
  tree.put(key("options", "tolerance"), format_number(c.tolerance));
  tree.put(key("options", "margin_center"), format_vector(c.margin_center));
  tree.put(key("result", "samples"), c.samples);
  tree.put(key("result", "min_levi"), format_number(c.min_levi));
  tree.put(key("result", "min_levi_sampled"), format_number(c.min_levi_sampled));
  tree.put(key("result", "worst_point"), format_vector(c.worst_point));
  tree.put(key("result", "margin"), format_number(c.margin));
  tree.put(key("result", "lambda0"), format_number(c.lambda0));
  tree.put(key("result", "passed"), c.passed ? 1 : 0);
}

std::string to_text(const pt::ptree& tree) {
  std::ostringstream os;
  pt::write_ini(os, tree);
  return os.str();
}

}  // namespace

Vec parse_vector(const std::string& text, const std::string& field) {
  std::istringstream is(text);
  std::vector<double> v;
  std::string tok;
  while (is >> tok) v.push_back(parse_double(tok, field));
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// ----------------------------------------------------------------- tables

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("table " + title + ": row width mismatch");
  rows.push_back(std::move(row));
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("table " + title + ": no column " + name);
}

std::string Table::str() const {
  std::ostringstream os;
  os << "# table: " << title << "\n";
  for (const std::string& n : notes) os << "# " << n << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "\t" : "") << columns[i];
  os << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "\t" : "") << (i < units.size() ? units[i] : "-");
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "\t" : "") << format_number(r[i]);
    os << "\n";
  }
  return os.str();
}

Table parse_table(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  int header = 0;
  while (std::getline(is, line)) {
    if (line.rfind("# table: ", 0) == 0) {
      t.title = line.substr(9);
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      t.notes.push_back(line.substr(2));
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, '\t')) cells.push_back(c);
    if (header == 0) {
      t.columns = cells;
    } else if (header == 1) {
      t.units = cells;
    } else {
      std::vector<double> r;
      for (const std::string& s : cells) r.push_back(parse_double(s, "table cell"));
      t.add(std::move(r));
    }
    ++header;
  }
  return t;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// ----------------------------------------------------------------- certificates

std::string psh_record(const ModelInstance& model, const PshCertificate& cert) {
  pt::ptree tree;
  tree.put(key("record", "kind"), "psh");
  tree.put(key("record", "version"), 1);
  put_model(tree, model);
  put_region(tree, cert.region);
  put_result(tree, cert);
  return to_text(tree);
}

std::string weight_record(const ModelInstance& model, const WeightRecord& w) {
  pt::ptree tree;
  tree.put(key("record", "kind"), "weight");
  tree.put(key("record", "version"), 1);
  put_model(tree, model);
  tree.put(key("chart", "center"), format_vector(w.center));
  tree.put(key("chart", "Z"), format_vector(Eigen::Map<const Vec>(Mat(w.Z.transpose()).data(), w.Z.size())));
  tree.put(key("weight", "r"), format_number(w.weight.r));
  tree.put(key("weight", "A"), format_number(w.weight.A));
  tree.put(key("weight", "B"), format_number(w.weight.B));
  tree.put(key("weight", "chirka_A"), format_number(w.weight.chirka_A));
  tree.put(key("weight", "puncture"), format_number(w.puncture));
  put_region(tree, w.weight.certificate.region);
  put_result(tree, w.weight.certificate);
  return to_text(tree);
}

VerifyReport verify_record(const std::string& text, int grid) {
  VerifyReport rep;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument("record: line " + std::to_string(e.line()) + ": " + e.message());
  }
  rep.parsed = true;
  rep.kind = get(tree, "record", "kind");
  const ModelInstance m = get_model(tree);
  rep.recorded_grid = static_cast<int>(get_number(tree, "region", "count"));
  if (grid > 0 && grid < rep.recorded_grid)
    throw std::invalid_argument("verify: replay grid " + std::to_string(grid) + " is coarser than the recorded " +
                                std::to_string(rep.recorded_grid));
  const bool refined = grid > rep.recorded_grid;
  rep.replay_grid = refined ? grid : rep.recorded_grid;
  const GridRegion region = get_region(tree, refined ? grid : 0);

  CertifyOptions co;
  co.directions = static_cast<int>(get_number(tree, "options", "directions"));
  co.strict = get_number(tree, "options", "strict") != 0.0;
  co.tolerance = get_number(tree, "options", "tolerance");
  co.margin_center = parse_vector(get(tree, "options", "margin_center"), "options.margin_center");

  PshCertificate c;
  if (rep.kind == "psh") {
    c = certify_psh(m.domain.rho, m.domain.J, region, co);
  } else if (rep.kind == "weight") {
    const Vec center = parse_vector(get(tree, "chart", "center"), "chart.center");
    const int d = static_cast<int>(center.size());
    const Vec z = parse_vector(get(tree, "chart", "Z"), "chart.Z");
    if (z.size() != d * d) throw std::invalid_argument("record: chart.Z needs " + std::to_string(d * d) + " entries");
    const Mat Z = Eigen::Map<const Mat>(z.data(), d, d).transpose();
    const AlmostComplexStructure Jz = direct_image(m.domain.J, CoordinateChart::affine(Z, center));
    const ScalarField w = log_cutoff_weight(d, get_number(tree, "weight", "r"), get_number(tree, "weight", "A"),
                                            get_number(tree, "weight", "B"), region.center);
    c = certify_psh(w, Jz, region, co);
  } else {
    throw std::invalid_argument("record: unknown kind '" + rep.kind + "'");
  }
  rep.recorded_min = get_number(tree, "result", "min_levi");
  rep.replay_min = c.min_levi;
  rep.drift = std::abs(rep.replay_min - rep.recorded_min);
  const bool recorded_pass = get_number(tree, "result", "passed") != 0.0;
  const double rec_margin = get_number(tree, "result", "margin");
  bool ok = recorded_pass && c.passed;
  std::string note;
  if (refined) {
    note = " refined=" + std::to_string(rep.recorded_grid) + "->" + std::to_string(rep.replay_grid);
  } else {
    ok = ok && rep.drift <= co.tolerance && c.samples == static_cast<int>(get_number(tree, "result", "samples"));
    if (co.strict) ok = ok && std::abs(c.margin - rec_margin) <= co.tolerance * (1.0 + rec_margin);
  }
  rep.passed = ok;
  char drift[32];
  std::snprintf(drift, sizeof drift, "%.3e", rep.drift);
  rep.summary = "verify kind=" + rep.kind + " model=" + m.name + " samples=" + std::to_string(c.samples) +
                " recorded_min=" + format_number(rep.recorded_min) + " replay_min=" + format_number(rep.replay_min) +
                " drift=" + drift + note + " status=" + (ok ? "pass" : "fail");
  return rep;
}

VerifyReport verify_certificate(const std::string& path, int grid) { return verify_record(read_text(path), grid); }

// ----------------------------------------------------------------- logs

std::string scaling_log(const ScalingSequence& seq, const ConvergenceReport& report, const ScaledCertificate* cert) {
  std::ostringstream os;
  os << "scaling q=(" << format_vector(seq.chart.q) << ") gamma=" << format_number(seq.chart.gamma)
     << " alpha=" << format_number(seq.alpha) << " limit=" << seq.limit_kind
     << " quadratic_residual=" << format_number(seq.chart.quadratic_residual) << "\n";
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    const ScaleStep& st = seq.steps[k];
    os << "step nu=" << st.nu << " delta=" << format_number(st.delta) << " p=(" << format_vector(st.p) << ")"
       << " chart_norm=" << format_number(st.chart_norm) << " inverse_norm=" << format_number(st.inverse_norm);
    if (k < report.rows.size())
      os << " c0=" << format_number(report.rows[k].c0) << " c1=" << format_number(report.rows[k].c1)
         << " rho_c2=" << format_number(report.rows[k].rho_c2);
    if (cert && k < cert->margins.size()) os << " margin=" << format_number(cert->margins[k]);
    if (cert && k < cert->steps.size())
      os << " c=" << format_number(cert->steps[k].c) << " B=" << format_number(cert->steps[k].B);
    os << "\n";
  }
  os << "monotone=" << (report.monotone ? 1 : 0) << " decay_exponent=" << format_number(report.decay_exponent);
  if (cert) os << " C=" << format_number(cert->C) << " certified=" << (cert->certified ? 1 : 0);
  os << "\n";
  return os.str();
}

}  // namespace akr
