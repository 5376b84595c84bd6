#pragma once

// Upper bounds for the Kobayashi-Royden metric from explicit J-discs, certified
// lower bounds from cutoff-logarithmic weights, the boundary bracket, and the
// integrated distance bounds built from both.

#include "akr/disc.hpp"
#include "akr/forms.hpp"

#include <limits>

namespace akr {

struct DomainSpec {
  std::string name;
  ScalarField rho;
  AlmostComplexStructure J;
  GridRegion region;  // ambient sampling box
  std::optional<PshCertificate> strictness;

  int n() const { return J.complex_dim(); }
  int real_dim() const { return J.real_dim(); }
  bool contains(const Vec& x) const;
  // |rho| / |grad rho|, a first-order distance to the boundary (bracket seed only).
  double distance_hint(const Vec& p) const;
  void validate() const;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct UpperOptions {
  DiscGrid grid{16, 32, 1.0};
  int max_refinements = 2;      // grid doublings when the solver stalls above tol
  double tol = 1e-8;
  int bisection_steps = 20;
  int beta_bisection_steps = 12;
  bool optimize_beta = true;
  double beta_cap = 0.95;
  int max_beta_evaluations = 40;
  int rim_factor = 4;
};

struct UpperBound {
  double alpha = kInfinity;    // K(p, v) <= alpha
  Complex beta{0.0, 0.0};
  std::optional<JHoloDisc> witness;
  int discs_solved = 0;
  std::string diagnostic;
  bool finite() const { return std::isfinite(alpha); }
};

// A unit J-disc with f(0) = p and f_x(0) = v / alpha staying in D.
UpperBound kr_upper(const DomainSpec& D, const Vec& p, const Vec& v, const UpperOptions& options = {});

// Feasibility of one candidate: residual <= tol and every node and rim sample in D.
std::optional<JHoloDisc> feasible_disc(const DomainSpec& D, const Vec& p, const Vec& w, Complex beta,
                                       const UpperOptions& options, int* solves = nullptr);

struct LowerOptions {
  double r = 0.9;              // cutoff parameter of the weight, r < 1
  int grid = 9;                // samples per axis for the certificates
  double puncture = 0.02;
  double h = 1e-4;
  double chart_fraction = 1.0; // unit ball of the chart relative to the largest one inside U
  int polish_starts = 3;
};

// Certified data for exp(-1/2 - B|u(q)|/c) |Z_q v| at each center q. The
// chart z = Z_q (x - q) normalizes J at q and maps an ellipsoid U_q inside U
// onto the unit ball; u - c|z|^2 is psh on z(D n U_q) and the cutoff weight
// with constants (A, B) is psh on the punctured unit ball.
struct LowerCertificate {
  ScalarField u;
  GridRegion U;
  double L = 0.0;   // sup |u| on D n U
  double c = 0.0;   // min over centers of the margins
  double B = 0.0;   // max over centers of the weight constants
  double A = 0.0;
  double r = 0.9;
  std::vector<Vec> centers;
  std::vector<Mat> normalizations;  // Z_q
  std::vector<double> scales;       // unit ball of z in units of |L_q (x - q)|
  std::vector<double> center_c, center_B;
  std::vector<WeightConstants> weights;
  bool certified = false;
  std::string diagnostic;

  int center_index(const Vec& q) const;  // -1 when q is not a certified center
  double constant(int i, double u_value) const;  // exp(-1/2 - B_i|u|/c_i)
};

LowerCertificate certify_lower(const DomainSpec& D, const ScalarField& u, const GridRegion& U,
                               const std::vector<Vec>& centers, const LowerOptions& options = {});

// exp(-1 - 2B|u|/c)^{1/2}
double sibony_constant(double u_value, double B, double c);

double kr_lower_sibony(const DomainSpec& D, const Vec& p, const Vec& v, const LowerCertificate& cert);

// s = tanh(m eta) with eta = dist(p, boundary of V1) and m the smallest
// certified constant over the centers, with sup |u| taken over V1.
// Returns 1 when U covers D.
double localization_factor(const DomainSpec& D, const GridRegion& U, const GridRegion& V1,
                           const Vec& p, const LowerCertificate& cert);

// |del_J rho(v)|^2 / rho^2 + |v|^2 / |rho|
double boundary_bracket(const DomainSpec& D, const Vec& p, const Vec& v);
double boundary_estimate(const DomainSpec& D, const Vec& p, const Vec& v, double c);

struct CalibrationSample {
  Vec p, v;
  double lower = 0.0;
};

struct Calibration {
  double c = 0.0;
  int argmin = -1;
  std::string diagnostic;
};

Calibration calibrate_constant(const DomainSpec& D, const std::vector<CalibrationSample>& samples);

using Path = std::function<Vec(double)>;  // t in [0, 1]
Path straight_path(const Vec& p, const Vec& q);

struct DistanceOptions {
  int steps = 16;
  UpperOptions upper;
  double lower_constant = 0.0;  // certified K >= m |v| on the paths, 0 when unknown
};

struct DistanceBounds {
  double lower = 0.0;
  double upper = kInfinity;
  int steps = 0;
  int paths_used = 0;
  int best_path = -1;
};

DistanceBounds distance_bounds(const DomainSpec& D, const Vec& p, const Vec& q,
                               const std::vector<Path>& paths, const DistanceOptions& options = {});

struct HyperbolicityReport {
  double C = 0.0;
  double sup_u = 0.0;
  GridRegion V;
  int samples = 0;
};

HyperbolicityReport hyperbolicity_probe(const DomainSpec& D, const Vec& p, double radius,
                                        const LowerCertificate& cert);

struct CompletenessOptions {
  double c = 0.0;             // constant in the bracket lower bound
  bool with_upper = false;    // also integrate kr_upper along the ray
  UpperOptions upper;
  int steps_per_decade = 12;
};

struct CompletenessReport {
  std::vector<double> t;
  std::vector<double> rho;
  std::vector<double> lower;     // c * |log(rho(q_k) / rho(p))|, path independent
  std::vector<double> bracket_integral;  // integral of c * bracket^{1/2} along the ray
  std::vector<double> upper;     // integral of kr_upper along the ray, when requested
  bool monotone = false;
  bool unbounded = false;
  double lower_slope = 0.0;      // fit of lower against log(1 / |rho|)
  double upper_slope = 0.0;      // fit of upper against log(1 / (1 - t))
};

// q(t) = p + t (b - p) for boundary point b and t in ts.
CompletenessReport completeness_probe(const DomainSpec& D, const Vec& p, const Vec& b,
                                      const std::vector<double>& ts, const CompletenessOptions& options);

struct MetricEstimate {
  Vec p, v;
  double lower = 0.0;
  std::map<std::string, std::string> lower_provenance;
  double upper = kInfinity;
  std::optional<JHoloDisc> witness;
  double bracket = 0.0;
  bool sandwich_ok() const { return !(lower > upper * (1.0 + 1e-9)); }
};

// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace akr
