#include "akr/models.hpp"

#include <cmath>
#include <sstream>

namespace akr {

namespace {

ParamSpec integer(const std::string& name, double lo, double hi, const std::string& def, const std::string& doc) {
  ParamSpec p;
  p.name = name;
  p.kind = ParamSpec::Kind::Integer;
  p.lo = lo;
  p.hi = hi;
  p.default_value = def;
  p.doc = doc;
  return p;
}

ParamSpec real(const std::string& name, double lo, double hi, const std::string& def, const std::string& doc) {
  ParamSpec p = integer(name, lo, hi, def, doc);
  p.kind = ParamSpec::Kind::Real;
  return p;
}

ParamSpec choice(const std::string& name, std::vector<std::string> choices, const std::string& doc) {
  ParamSpec p;
  p.name = name;
  p.kind = ParamSpec::Kind::Choice;
  p.default_value = choices.front();
  p.choices = std::move(choices);
  p.doc = doc;
  return p;
}

ParamSpec grid_param() { return integer("grid", 0, 41, "0", "samples per axis of the region, 0 = automatic"); }

int auto_grid(int n) {
  static const int table[] = {0, 21, 7, 4, 3};
  return table[std::min(n, 4)];
}

double parse_number(const std::string& key, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || text.find_first_not_of(" \t", pos) != std::string::npos)
    throw std::invalid_argument("parameter " + key + ": not a number: '" + text + "'");
  return v;
}

// P = I + eps phi N, N nilpotent and anticommuting with J_st, coupling z_n to z_1.
AlmostComplexStructure deformed_structure(int n, double eps, const std::string& profile) {
  const int d = 2 * n;
  Mat N = Mat::Zero(d, d);
  N(d - 2, 0) = 1.0;
  N(d - 1, 1) = -1.0;
  const bool bump = profile == "bump";
  auto P = [N, eps, bump, d](const Vec& x) {
    const double phi = bump ? std::exp(-x.squaredNorm()) : x(0);
    return Mat(Mat::Identity(d, d) + eps * phi * N);
  };
  auto dP = [N, eps, bump, d](const Vec& x) {
    std::vector<Mat> out(d);
    const double e = bump ? std::exp(-x.squaredNorm()) : 0.0;
    for (int k = 0; k < d; ++k) {
      const double dphi = bump ? -2.0 * x(k) * e : (k == 0 ? 1.0 : 0.0);
      out[k] = eps * dphi * N;
    }
    return out;
  };
  return AlmostComplexStructure::conjugated(n, P, dP);
}

// Diagonal blocks a_jj = P_j i P_j^{-1}, P_j = I + eps l_j(z) C with l_j linear, a_jj(0) = i.
AlmostComplexStructure diagonal_structure(double eps) {
  Mat C(2, 2);
  C << 1.0, 0.0, 0.0, -1.0;
  const Eigen::Vector4d l1(0.6, 0.0, 0.8, 0.5), l2(0.7, -0.4, 0.3, 0.0);
  auto P = [C, eps, l1, l2](const Vec& x) {
    Mat p = Mat::Identity(4, 4);
    p.block(0, 0, 2, 2) += eps * l1.dot(x) * C;
    p.block(2, 2, 2, 2) += eps * l2.dot(x) * C;
    return p;
  };
  auto dP = [C, eps, l1, l2](const Vec&) {
    std::vector<Mat> out(4, Mat::Zero(4, 4));
    for (int k = 0; k < 4; ++k) {
      out[k].block(0, 0, 2, 2) = eps * l1(k) * C;
      out[k].block(2, 2, 2, 2) = eps * l2(k) * C;
    }
    return out;
  };
  return AlmostComplexStructure::conjugated(2, P, dP);
}

ScalarField ball_field(int d, const Vec& c, double r) {
  return ScalarField::analytic(d, [c, r](const Vec& x) { return squared_distance(x, c) - r * r; })
      .with_value([c, r](const Vec& x) { return (x - c).squaredNorm() - r * r; });
}

ScalarField siegel_field(int n) {
  const int d = 2 * n;
  ScalarField f = ScalarField::analytic(d, [d](const Vec& x) {
    Jet2 j = Jet2::coordinate(x, d - 2);
    for (int i = 0; i < d - 2; ++i) {
      j.value += x(i) * x(i);
      j.grad(i) = 2.0 * x(i);
      j.hess(i, i) = 2.0;
    }
    return j;
  });
  return f.with_value([d](const Vec& x) { return x(d - 2) + x.head(d - 2).squaredNorm(); });
}

std::vector<PolynomialTerm> table_terms(const ModelParams& p, const std::string& prefix, int n, int rows, int cols) {
  std::vector<PolynomialTerm> out;
  for (const auto& [k, v] : p)
    if (k.rfind(prefix, 0) == 0) out.push_back(parse_term(v, n, rows, cols));
  return out;
}

double monomial(const Vec& x, const std::vector<int>& e) {
  double m = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i]) m *= std::pow(x(i), e[i]);
  return m;
}

// d/dx_k of x^e, as coefficient and the lowered exponent.
double lowered(const Vec& x, std::vector<int> e, int k) {
  if (e[k] == 0) return 0.0;
  const double c = e[k];
  e[k] -= 1;
  return c * monomial(x, e);
}

// Interior point: the grid minimum of rho. Boundary point: bisection along -e_{x_n}.
void locate_reference(const DomainSpec& D, double half_width, Vec& interior, Vec& boundary) {
  const int d = D.real_dim();
  double best = kInfinity;
  for (const Vec& x : D.region.points()) {
    const double r = D.rho(x);
    if (r < best) {
      best = r;
      interior = x;
    }
  }
  if (!(best < 0.0)) throw std::invalid_argument("model table: {rho < 0} has no grid samples");
  const Vec e = -Vec::Unit(d, d - 2);
  const double tmax = half_width + interior(d - 2);
  if (!(D.rho(interior + tmax * e) > 0.0))
    throw std::invalid_argument("model table: rho does not change sign along -x_n inside the box");
  double lo = 0.0, hi = tmax;
  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    (D.rho(interior + mid * e) < 0.0 ? lo : hi) = mid;
  }
  boundary = interior + hi * e;
}

}  // namespace

std::vector<ModelInfo> model_catalog() {
  static const std::vector<ModelInfo> cat = {
      {"unit-ball", "ball |z| < radius with the standard structure",
       {integer("n", 1, 4, "2", "complex dimension"), real("radius", 0.01, 100.0, "1", "ball radius"), grid_param()}},
      {"siegel-model", "Re z_n + |z'|^2 < 0 with the standard structure",
       {integer("n", 1, 4, "2", "complex dimension"), grid_param()}},
      {"deformed-ball", "unit ball with J = P J_st P^-1, P = I + eps profile(z) N",
       {integer("n", 2, 4, "2", "complex dimension"), real("eps", 0.0, 0.2, "0.05", "deformation size"),
        choice("profile", {"bump", "linear"}, "exp(-|z|^2) or Re z_1"),
        real("radius", 0.1, 10.0, "1", "ball radius"), grid_param()}},
      {"diagonal-dim4", "ball |z - (0,-1)| < 1 through the origin, block-diagonal J with a_jj(0) = i",
       {real("eps", 0.0, 0.2, "0.05", "size of the linear diagonal terms"), grid_param()}},
      {"table", "polynomial coefficient tables for rho and for J or its conjugator P",
       {integer("n", 1, 4, "2", "complex dimension"),
        choice("kind", {"conjugator", "structure"}, "J = P J_st P^-1 from the table, or J itself"),
        real("half-width", 0.01, 100.0, "1.2", "half side length of the sampling box"), grid_param()}},
  };
  return cat;
}

const ModelInfo& model_info(const std::string& name) {
  static const std::vector<ModelInfo> cat = model_catalog();
  for (const ModelInfo& m : cat)
    if (m.name == name) return m;
  throw std::invalid_argument("unknown model '" + name + "' (see `akr models`)");
}

ModelParams resolve_params(const ModelInfo& info, const ModelParams& given) {
  ModelParams out;
  for (const auto& [k, v] : given) {
    bool known = false;
    for (const ParamSpec& s : info.params) known = known || s.name == k;
    const bool table_key = info.name == "table" && (k.rfind("rho.", 0) == 0 || k.rfind("J.", 0) == 0);
    if (!known && !table_key) throw std::invalid_argument("model " + info.name + ": unknown parameter '" + k + "'");
    if (table_key) out[k] = v;
  }
  for (const ParamSpec& s : info.params) {
    auto it = given.find(s.name);
    const std::string text = it == given.end() ? s.default_value : it->second;
    if (s.kind == ParamSpec::Kind::Choice) {
      if (std::find(s.choices.begin(), s.choices.end(), text) == s.choices.end())
        throw std::invalid_argument("parameter " + s.name + ": '" + text + "' is not one of the allowed values");
    } else {
      const double v = parse_number(s.name, text);
      if (!(v >= s.lo && v <= s.hi)) {
        std::ostringstream os;
        os << "parameter " << s.name << " = " << text << " outside [" << s.lo << ", " << s.hi << "]";
        throw std::invalid_argument(os.str());
      }
      if (s.kind == ParamSpec::Kind::Integer && v != std::floor(v))
        throw std::invalid_argument("parameter " + s.name + ": expected an integer, got '" + text + "'");
    }
    out[s.name] = text;
  }
  return out;
}

int param_int(const ModelParams& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing parameter " + key);
  return static_cast<int>(parse_number(key, it->second));
}

double param_real(const ModelParams& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing parameter " + key);
  return parse_number(key, it->second);
}

ModelInstance build_model(const std::string& name, const ModelParams& params, bool certify) {
  const ModelInfo& info = model_info(name);
  ModelInstance m;
  m.name = name;
  m.params = resolve_params(info, params);
  const ModelParams& p = m.params;
  DomainSpec& D = m.domain;
  D.name = name;
  const int n = name == "diagonal-dim4" ? 2 : param_int(p, "n");
  const int d = 2 * n;
  int grid = param_int(p, "grid");
  if (grid == 0) grid = auto_grid(n);
  if (grid < 3) throw std::invalid_argument("parameter grid: need at least 3 samples per axis");

  if (name == "unit-ball") {
    const double r = param_real(p, "radius");
    D.rho = ball_field(d, Vec::Zero(d), r);
    D.J = AlmostComplexStructure::standard(n);
    D.region = GridRegion::box(n, Vec::Constant(d, -1.2 * r), Vec::Constant(d, 1.2 * r), grid);
    m.strict_declared = true;
    m.interior = Vec::Zero(d);
    m.boundary = -r * Vec::Unit(d, d - 2);
  } else if (name == "siegel-model") {
    D.rho = siegel_field(n);
    D.J = AlmostComplexStructure::standard(n);
    D.region = GridRegion::box(n, Vec::Constant(d, -1.0), Vec::Constant(d, 1.0), grid);
    m.interior = -0.5 * Vec::Unit(d, d - 2);
    m.boundary = Vec::Zero(d);
  } else if (name == "deformed-ball") {
    const double r = param_real(p, "radius");
    D.rho = ball_field(d, Vec::Zero(d), r);
    D.J = deformed_structure(n, param_real(p, "eps"), p.at("profile"));
    D.region = GridRegion::box(n, Vec::Constant(d, -1.2 * r), Vec::Constant(d, 1.2 * r), grid);
    m.strict_declared = true;
    m.interior = Vec::Zero(d);
    m.boundary = -r * Vec::Unit(d, d - 2);
  } else if (name == "diagonal-dim4") {
    Vec c = Vec::Zero(4);
    c(2) = -1.0;
    D.rho = ball_field(4, c, 1.0);
    D.J = diagonal_structure(param_real(p, "eps"));
    Vec lo = Vec::Constant(4, -1.2), hi = Vec::Constant(4, 1.2);
    lo(2) = -2.2;
    hi(2) = 0.2;
    D.region = GridRegion::box(2, lo, hi, grid);
    m.strict_declared = true;
    m.interior = c;
    m.boundary = Vec::Zero(4);
  } else {
    PolynomialTable rho;
    rho.n = n;
    rho.terms = table_terms(p, "rho.", n, 1, 1);
    if (rho.terms.empty()) throw std::invalid_argument("model table: no rho.* terms");
    rho.validate();
    D.rho = polynomial_field(rho);
    PolynomialTable J;
    J.n = n;
    J.rows = J.cols = d;
    J.terms = table_terms(p, "J.", n, d, d);
    D.J = J.terms.empty() ? AlmostComplexStructure::standard(n) : polynomial_structure(J, p.at("kind"));
    const double w = param_real(p, "half-width");
    D.region = GridRegion::box(n, Vec::Constant(d, -w), Vec::Constant(d, w), grid);
    locate_reference(D, w, m.interior, m.boundary);
  }
  D.validate();
  m.structure = validate_structure(D.J, D.region);
  if (!m.structure.accepted) {
    std::ostringstream os;
    os << "model " << name << ": structure axiom fails, residual " << m.structure.max_residual << " at "
       << format_point(m.structure.worst_point);
    throw NumericalError(os.str());
  }
  if (certify && m.strict_declared) {
    CertifyOptions co;
    co.strict = true;
    PshCertificate c = certify_psh(D.rho, D.J, D.region, co);
    c.provenance["model"] = name;
    for (const auto& [k, v] : p) c.provenance["param." + k] = v;
    if (!c.passed || !(c.margin > 0.0))
      throw NumericalError("model " + name + ": defining function is not strictly plurisubharmonic, worst point " +
                           format_point(c.worst_point));
    m.strictness = c;
    D.strictness = c;
  }
  return m;
}

// ----------------------------------------------------------------- tables

void PolynomialTable::validate() const {
  if (n < 1) throw std::invalid_argument("polynomial table: n must be positive");
  for (const PolynomialTerm& t : terms) {
    if (static_cast<int>(t.exponents.size()) != 2 * n)
      throw std::invalid_argument("polynomial table: exponent tuple needs " + std::to_string(2 * n) + " entries");
    for (int e : t.exponents)
      if (e < 0) throw std::invalid_argument("polynomial table: negative exponent");
    if (t.coefficient.rows() != rows || t.coefficient.cols() != cols)
      throw std::invalid_argument("polynomial table: coefficient has the wrong shape");
  }
}

Mat PolynomialTable::value(const Vec& x) const {
  Mat out = Mat::Zero(rows, cols);
  for (const PolynomialTerm& t : terms) out += monomial(x, t.exponents) * t.coefficient;
  return out;
}

std::vector<Mat> PolynomialTable::derivative(const Vec& x) const {
  std::vector<Mat> out(2 * n, Mat::Zero(rows, cols));
  for (const PolynomialTerm& t : terms)
    for (int k = 0; k < 2 * n; ++k) out[k] += lowered(x, t.exponents, k) * t.coefficient;
  return out;
}

Mat PolynomialTable::second_derivative(const Vec& x, int i, int j) const {
  Mat out = Mat::Zero(rows, cols);
  for (const PolynomialTerm& t : terms) {
    std::vector<int> e = t.exponents;
    if (e[i] == 0) continue;
    const double ci = e[i];
    e[i] -= 1;
    out += ci * lowered(x, e, j) * t.coefficient;
  }
  return out;
}

ScalarField polynomial_field(const PolynomialTable& table) {
  table.validate();
  if (table.rows != 1 || table.cols != 1) throw std::invalid_argument("polynomial_field: needs a scalar table");
  const int d = 2 * table.n;
  return ScalarField::analytic(d, [table, d](const Vec& x) {
           Jet2 j = Jet2::constant(table.value(x)(0, 0), d);
           const std::vector<Mat> g = table.derivative(x);
           for (int k = 0; k < d; ++k) j.grad(k) = g[k](0, 0);
           for (int a = 0; a < d; ++a)
             for (int b = 0; b < d; ++b) j.hess(a, b) = table.second_derivative(x, a, b)(0, 0);
           return j;
         })
      .with_value([table](const Vec& x) { return table.value(x)(0, 0); });
}

AlmostComplexStructure polynomial_structure(const PolynomialTable& table, const std::string& kind) {
  table.validate();
  const int d = 2 * table.n;
  if (table.rows != d || table.cols != d) throw std::invalid_argument("polynomial_structure: needs 2n x 2n coefficients");
  if (kind == "structure")
    return AlmostComplexStructure(
        table.n, [table](const Vec& x) { return table.value(x); },
        [table](const Vec& x) { return table.derivative(x); });
  if (kind == "conjugator")
    return AlmostComplexStructure::conjugated(
        table.n, [table](const Vec& x) { return table.value(x); },
        [table](const Vec& x) { return table.derivative(x); });
  throw std::invalid_argument("polynomial_structure: kind must be structure or conjugator");
}

PolynomialTerm parse_term(const std::string& text, int n, int rows, int cols) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("table term '" + text + "': expected 'exponents : coefficients'");
  PolynomialTerm t;
  std::istringstream ex(text.substr(0, colon)), co(text.substr(colon + 1));
  int e = 0;
  while (ex >> e) t.exponents.push_back(e);
  if (!ex.eof()) throw std::invalid_argument("table term '" + text + "': bad exponent");
  std::vector<double> c;
  double v = 0.0;
  while (co >> v) c.push_back(v);
  if (!co.eof()) throw std::invalid_argument("table term '" + text + "': bad coefficient");
  if (static_cast<int>(t.exponents.size()) != 2 * n)
    throw std::invalid_argument("table term '" + text + "': needs " + std::to_string(2 * n) + " exponents");
  if (static_cast<int>(c.size()) != rows * cols)
    throw std::invalid_argument("table term '" + text + "': needs " + std::to_string(rows * cols) + " coefficients");
  t.coefficient = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(c.data(), rows, cols);
  return t;
}

}  // namespace akr
