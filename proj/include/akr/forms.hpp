#pragma once

// The (1,0)-pairing of du, Levi forms, plurisubharmonicity certificates and
// the cutoff-logarithmic weights used to localize the metric.
//
// Normalization: levi_form(u, J, p, v) = -1/4 d(J* du)(v, Jv)(p), so that
// the standard structure gives levi_form(|z|^2, J_st, p, v) = |v|^2 and the
// disc route equals 1/4 Laplacian(u o f)(0).

#include "akr/acs.hpp"

#include <complex>
#include <map>
#include <string>

namespace akr {

using Complex = std::complex<double>;

// du(p)(v) - i du(p)(J(p) v)
Complex del_J(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p, const Vec& v);

// Symmetric S with levi_form(u, J, p, v) = v^T S v.
Mat levi_matrix(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p);
double levi_form(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p, const Vec& v);
// Same quantity with X = v + A (x - p), A a constant matrix; the 2-form is
// tensorial so the value is independent of A.
double levi_form_extended(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p,
                          const Vec& v, const Mat& A, double h);
// 1/4 Laplacian of u along the second jet of a J-disc through (p, v).
double levi_form_via_disc(const ScalarField& u, const AlmostComplexStructure& J, const Vec& p,
                          const Vec& v);

// Deterministic quasi-random unit directions in R^{dim}.
std::vector<Vec> sphere_directions(int dim, int count);

struct PshCertificate {
  GridRegion region;
  int directions = 64;
  int samples = 0;
  double min_levi = 0.0;            // exact min eigenvalue over samples
  double min_levi_sampled = 0.0;    // min over the sampled unit directions
  Vec worst_point;
  bool strict = false;
  double margin = 0.0;              // largest c with u - c|z - margin_center|^2 passing
  Vec margin_center;
  double tolerance = 1e-10;
  double lambda0 = 0.0;             // structure budget the certificate was built for
  bool passed = false;
  std::map<std::string, std::string> provenance;  // model/field description for replay
};

struct CertifyOptions {
  int directions = 64;
  bool strict = false;
  double tolerance = 1e-10;
  Vec margin_center;  // defaults to the origin
};

PshCertificate certify_psh(const ScalarField& u, const AlmostComplexStructure& J,
                           const GridRegion& region, const CertifyOptions& options = {});

// Smallest generalized eigenvalue of (Levi(u), Levi(q)) over the samples of
// the region that satisfy `admit`, so u - c q passes there iff c <= value.
// Levi(q) must be positive definite. The `polish_starts` worst samples are
// refined by a local simplex search that stays inside the region.
struct PencilMinimum {
  double value = 0.0;
  Vec worst_point;
  int samples = 0;
  int evaluations = 0;
};

PencilMinimum pencil_minimum(const ScalarField& u, const ScalarField& q, const AlmostComplexStructure& J,
                             const GridRegion& region, const std::function<bool(const Vec&)>& admit = {},
                             int polish_starts = 3);

// Doubling from `start`, then 20 bisection steps; returns the smallest value
// in [0, limit] for which `pass` holds, assuming monotone pass(x) in x.
// Tests 0 first when `try_zero`. Returns nullopt when limit is reached.
std::optional<double> threshold_search(const std::function<bool(double)>& pass, double start,
                                       double limit, bool try_zero, int bisection_steps = 20);

struct ChirkaConstants {
  double A = 0.0;
  double lambda0 = 0.0;
  PshCertificate certificate;
};

ScalarField chirka_function(int dim, double A);  // log|z| + A|z|
ScalarField chirka_function(int dim, double A, const Vec& center);

// A for log|z| + A|z| on the punctured region, then the largest structure
// budget under which deterministic sampled perturbations still pass.
ChirkaConstants chirka_constants(const AlmostComplexStructure& J, const GridRegion& region,
                                 double puncture_radius, double A_max = 4096.0,
                                 int perturbations = 4);

struct Cutoff {
  double r;
  double value(double s) const;
  double d1(double s) const;
  double d2(double s) const;
  Jet2 operator()(const Jet2& s) const { return compose(s, value(s.value), d1(s.value), d2(s.value)); }
};

// theta_r: identity below r/3, 1 above 2r/3, quintic C^2 monotone transition.
Cutoff cutoff_theta(double r);

// log(theta_r(|z|^2)) + theta_r(A|z|) + B|z|^2, centered at `center`.
ScalarField log_cutoff_weight(int dim, double r, double A, double B, const Vec& center);

struct WeightConstants {
  double r = 0.5;
  double A = 0.0;
  double B = 0.0;
  double chirka_A = 0.0;
  double lambda0 = 0.0;
  Vec center;
  PshCertificate certificate;
};

// Certifies log_cutoff_weight on the region minus a small puncture around
// its center. `region` is a ball about the weight center.
// A = max(2 A_chirka, A_min); B is the polished pencil bound, then certified on the grid.
WeightConstants find_weight_constants(const AlmostComplexStructure& J, const GridRegion& region,
                                      double r, double puncture_radius = 0.02,
                                      double B_max = 1.0e6, double A_min = 0.0);

// Psi_q = theta_r(|z-q|^2) exp(theta_r(A|z-q|)) exp(tau u) on D n U and
// exp(1 + tau u) on D \ U.
ScalarField sibony_weight(const Vec& q, double r, double A, double tau, const ScalarField& u,
                          const GridRegion& U, const std::function<bool(const Vec&)>& in_domain);

}  // namespace akr
