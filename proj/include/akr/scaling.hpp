#pragma once

// Non-isotropic rescaling of a strictly pseudoconvex boundary point: foot
// point, boundary normalization, the scaled domains G^nu with their
// structures J^nu, and the lower bound transported through the scaling.

#include "akr/metric.hpp"

namespace akr {

struct FootPoint {
  Vec q;              // rho(q) = 0
  double delta = 0.0; // |p - q|
  Vec normal;         // unit m with p = q - delta m
  int iterations = 0;
};

// Euclidean nearest boundary point.
FootPoint nearest_boundary(const DomainSpec& D, const Vec& p, double tol = 1e-13);

// Boundary point q with p - q along the J(q)-adapted normal: m in the span of
// grad rho and J(q)^T grad rho with <grad rho, J(q) m> = 0. Equals the
// Euclidean foot point when J(q) = J_st.
FootPoint adapted_foot_point(const DomainSpec& D, const Vec& p, double tol = 1e-13);

// z = T (x - q) with T J(q) T^{-1} = J_st, rho_n = rho o T^{-1} / gamma having
// gradient e_{x_n} at 0 and tangential Hermitian Hessian part 2 I (so that
// rho_n = Re z_n + |z'|^2 + Re K(z', z') + ...).
struct BoundaryChart {
  Vec q;
  Vec normal;
  Mat T;
  double gamma = 1.0;
  ScalarField rho_n;
  AlmostComplexStructure J_T;
  Mat tangential_hessian;   // full tangential Hessian of rho_n at 0
  double quadratic_residual = 0.0;  // size of the non-Hermitian part K, recorded only
};

BoundaryChart boundary_normalize(const DomainSpec& D, const Vec& q, const Vec& normal,
                                 bool normalize_structure = true);

// (alpha / delta) rho_n o Lambda^{-1} and R = rho_tilde + rho_tilde^2.
struct RescaledDefining {
  ScalarField rho_tilde;
  ScalarField R;
};
RescaledDefining rescaled_defining(const ScalarField& rho_n, const Mat& Lambda, double delta,
                                   double alpha);

// Re z_n + |z'|^2, the limit of rho_tilde for J_st.
ScalarField limit_profile(int n);

struct ScaleStep {
  int nu = 0;
  Vec p;
  double delta = 0.0;
  Mat Lambda;            // diag(s on z', s^2 on z_n), s^2 = alpha / delta
  Mat M;                 // Lambda T, w = M (x - q)
  Vec anchor;            // M (p - q) = (0', -alpha)
  double chart_norm = 0.0;    // |M|_2
  double inverse_norm = 0.0;  // |M^{-1}|_2
  DomainSpec G;          // scaled domain {rho_tilde < 0} with J^nu
  ScalarField R;
};

struct ScalingSequence {
  BoundaryChart chart;
  double alpha = 0.1;
  std::vector<ScaleStep> steps;
  AlmostComplexStructure limit;   // J_st + (normal, tangential) block of dJ_T(0)[w']
  std::string limit_kind;         // "J_st" or "J0"
};

// Points q - delta_k m along the adapted normal through p0.
ScalingSequence scaling_sequence(const DomainSpec& D, const Vec& p0, const std::vector<double>& deltas,
                                 double alpha = 0.1);
// delta_nu = 2^{-nu} delta_0 for nu = 1..steps.
ScalingSequence geometric_sequence(const DomainSpec& D, const Vec& p0, int steps, double alpha = 0.1);

ScaleStep scale_step(const BoundaryChart& chart, const DomainSpec& D, const Vec& p, double delta,
                     double alpha, int nu);

AlmostComplexStructure limit_structure(const BoundaryChart& chart);

struct ConvergenceRow {
  int nu = 0;
  double delta = 0.0;
  double c0 = 0.0;  // sup |J^nu - J_lim| on K
  double c1 = 0.0;  // sup of first derivatives of J^nu - J_lim on K
  double rho_c2 = 0.0;  // C^2 distance of rho_tilde to the limit profile on K
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::string limit_kind;
  bool monotone = false;
  double decay_exponent = 0.0;  // slope of log c0 against log delta
};

// K is the closed polydisc of radius `radius` about the anchor, sampled
// `count` points per real axis.
ConvergenceReport convergence_report(const ScalingSequence& seq, double radius = 2.0, int count = 5);

// |L^J(rho)(x)(M^{-1} v) - L^{M_* J}(rho o M^{-1})(M x)(v)|
double levi_invariance_residual(const ScalarField& rho, const AlmostComplexStructure& J, const Mat& M,
                                const Vec& x, const Vec& v);

// Two certificates per step. R^nu - C|w - anchor|^2 is J^nu-psh on
// V0 = ball(anchor, v0_radius) with one nu-independent C = 1/2 min_nu of the
// strict margins. The lower bound uses u = exp(K_nu rho_tilde) - 1, negative on
// G^nu and J^nu-psh there whenever rho is J-psh on D, certified on
// ball(anchor, u_radius), with K_nu chosen so that u(anchor) = exp(-K alpha) - 1
// at every step. The bound uses the uniform constants c = min_nu c_nu
// and B = max_nu B_nu, valid for every step.
struct ScaledCertificate {
  double C = 0.0;
  double v0_radius = 0.3;
  double u_radius = 1.5;
  double K = 0.5;
  double c = 0.0;
  double B = 0.0;
  std::vector<double> margins;
  std::vector<double> exponents;  // K_nu
  std::vector<PshCertificate> checks;
  std::vector<LowerCertificate> steps;
  bool certified = false;
  std::string diagnostic;
};

ScalarField exponential_defining(const ScalarField& rho, double K);  // exp(K rho) - 1

ScaledCertificate certify_scaled(const ScalingSequence& seq, const LowerOptions& options = {},
                                 double v0_radius = 0.3, double u_radius = 1.5, double K = 0.5);

// exp(-1/2 - B|u(anchor)|/c) |Z M v| with the uniform constants and with Z the certified chart of G^nu at the
// anchor. A lower bound for K_D(p^nu, v) since M is a biholomorphism onto G^nu.
double kr_lower_scaled(const ScalingSequence& seq, int index, const Vec& v, const ScaledCertificate& cert);

}  // namespace akr
