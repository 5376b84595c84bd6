#pragma once

// J-holomorphic discs: the complexified Cauchy-Riemann system
//   f_zetabar + Q(f) conj(f_zeta) = 0,
// its Cauchy-Green fixed point on a polar spectral grid, second jets, and
// the dimension-4 coordinates in which J becomes block diagonal.

#include "akr/acs.hpp"

#include <complex>
#include <memory>
#include <optional>

namespace akr {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

CVec to_complex(const Vec& x);
Vec to_real(const CVec& z);
// Real 2n x 2n matrix of the complex-linear map z -> A z.
Mat real_form(const CMat& A);

struct DiscGrid {
  int radial = 24;
  int angular = 64;  // power of two
  double radius = 1.0;

  void validate() const;
};

struct CRCoefficients {
  int n = 0;
  std::function<CMat(const Vec&)> Q;
  double max_norm = 1.0;  // ||Q|| must stay below this
};

// Anti-linear part of J at a point; throws when J is too far from J_st.
CMat cr_matrix(const Mat& J);
Mat structure_from_cr(const CMat& Q);
CRCoefficients cr_coefficients(const AlmostComplexStructure& J);

// Precomputed polar transforms for one (radial, angular) resolution.
// Samples of a complex scalar field are stored radial x angular with
// radial nodes r_i of Chebyshev type on (0, 1) and theta_j = 2 pi j / N.
class DiscSpectral {
 public:
  DiscSpectral(int radial, int angular);

  static std::shared_ptr<const DiscSpectral> cached(int radial, int angular);

  int radial() const { return nr_; }
  int angular() const { return nt_; }
  const std::vector<double>& nodes() const { return r_; }
  double angle(int j) const;
  Complex point(int i, int j) const;

  // T g with d(Tg)/dzetabar = g and (Tg)(0) = 0.
  CMat cauchy_green(const CMat& g) const;
  CMat d_zeta(const CMat& f) const;
  CMat d_zetabar(const CMat& f) const;
  Complex evaluate(const CMat& f, Complex zeta) const;
  Complex value_at_origin(const CMat& f) const;

  CMat modes(const CMat& f) const { return to_modes(f); }
  // E with f(zeta) = sum(E .* modes(f)).
  CMat evaluation_functional(Complex zeta) const;

 private:
  CMat to_modes(const CMat& f) const;    // entry (i, k): k-th DFT mode at r_i
  CMat from_modes(const CMat& c) const;
  int signed_mode(int k) const;
  int mode_slot(int m) const;            // -1 when m is not representable
  Eigen::VectorXd barycentric_row(double r) const;

  int nr_, nt_;
  std::vector<double> r_;
  std::vector<double> bary_w_;
  Mat diff_;                      // radial differentiation
  std::vector<Mat> cauchy_;       // per output mode slot
};

struct JHoloDisc {
  DiscGrid grid;       // radius is the radius actually used
  Vec center;
  Vec velocity;        // df(0)(d/dx) on the disc of radius grid.radius
  Complex beta{0.0, 0.0};  // holomorphic seed zeta / (1 + beta zeta)
  std::vector<CMat> correction;  // per complex component, on the unit parameter disc
  std::shared_ptr<const DiscSpectral> spectral;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;

  int n() const { return static_cast<int>(center.size()) / 2; }
  // f(zeta), |zeta| <= grid.radius
  Vec value(Complex zeta) const;
  // F(xi) = f(radius xi), |xi| <= 1
  Vec unit_value(Complex xi) const;
  std::vector<Vec> node_values() const;
  std::vector<Vec> rim_values(int count) const;
  // Complex d/dzeta and d/dzetabar of F at the nodes, per component.
  std::vector<CMat> unit_d_zeta() const;
  std::vector<CMat> unit_d_zetabar() const;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 6;
  bool allow_halving = true;
  Complex beta{0.0, 0.0};
};

enum class SolveStatus { Converged, NonContraction, DomainEscape, IterationLimit };

struct DiscAttempt {
  SolveStatus status = SolveStatus::Converged;
  std::string diagnostic;
  JHoloDisc disc;
};

// One fixed-point run at the given radius, no halving.
DiscAttempt attempt_disc(const AlmostComplexStructure& J, const Vec& p, const Vec& v,
                         const DiscGrid& grid, const SolveOptions& options);

// Fixed point of f <- h + T[-Q(f) conj(f_zeta)] with f(0) = p and
// df(0)(d/dx) = v; halves the radius on non-contraction.
JHoloDisc solve_disc(const AlmostComplexStructure& J, const Vec& p, const Vec& v,
                     const DiscGrid& grid, const SolveOptions& options = {});

double disc_residual(const JHoloDisc& f, const AlmostComplexStructure& J);

struct SecondJet {
  Vec f0, fx, fy;
  Vec fxx, fxy, fyy, laplacian;
  CVec f_zeta, f_zetabar, f_zetazeta, f_zetazetabar;
};

// 2-jet of a J-disc with f(0) = p, f_x(0) = v, f_y(0) = J(p) v, f_xx(0) = 0.
SecondJet second_jet(const AlmostComplexStructure& J, const Vec& p, const Vec& v);

// Second-order Taylor data of a solved disc at its center, in zeta.
SecondJet measured_jet(const JHoloDisc& f);

struct DiagonalizeOptions {
  double leaf_scale = 0.45;   // df(0)(d/dx) of each leaf on the unit parameter disc
  double label_radius = 0.3;  // leaves are labelled on [-R, R]^2
  int labels = 9;             // Chebyshev labels per real axis
  DiscGrid grid{16, 32, 1.0};
  double tol = 1e-12;
  double diag_tol = 1e-3;
};

struct DiagonalChart {
  CoordinateChart chart;
  // Leaf labels are positions on the transversal axes; leaf k of family j
  // passes through label w on the axis z_{3-j} and is tangent to e_j there.
  double off_diagonal = 0.0;  // a posteriori sup of off-diagonal blocks
  double measured_radius = 0.0;
};

// Block-diagonalizing chart for n = 2 near q with J(q) = J_st.
DiagonalChart diagonalize_dim4(const AlmostComplexStructure& J, const Vec& q, double radius,
                               const DiagonalizeOptions& options = {});

// Sup of off-diagonal 2x2 blocks of J over a grid.
double off_diagonal_norm(const AlmostComplexStructure& J, const GridRegion& region);

}  // namespace akr
