#pragma once

// Almost complex structures on a single coordinate chart of R^{2n}, charts,
// their direct images, and the dilations used for local normalization.

#include "akr/field.hpp"

#include <optional>
#include <vector>

namespace akr {

// Block diagonal matrix of 2x2 rotations [[0,-1],[1,0]]; multiplication by i.
Mat standard_structure(int n);

// Real 2n x 2n matrix of the complex-conjugation map (x, y) -> (x, -y).
Mat conjugation_matrix(int n);

enum class Smoothness { C0, C1, C2 };

struct GridRegion {
  enum class Shape { Box, Ball };

  int n = 1;  // complex dimension
  Vec lo, hi;
  std::vector<int> counts;
  double h = 1e-4;  // finite-difference step
  Shape shape = Shape::Box;
  Vec center;
  double outer_radius = 0.0;
  double inner_radius = 0.0;

  static GridRegion box(int n, const Vec& lo, const Vec& hi, int count, double h = 1e-4);
  // Grid points of the bounding box of the ball with inner < |x - c| < outer.
  static GridRegion ball(const Vec& center, double outer, int count, double h = 1e-4,
                         double inner = 0.0);

  int real_dim() const { return 2 * n; }
  void validate() const;
  bool contains(const Vec& x) const;
  std::vector<Vec> points() const;
  GridRegion refined(int extra_per_axis) const;
};

class AlmostComplexStructure {
 public:
  using Rule = std::function<Mat(const Vec&)>;
  // Returns the 2n partial derivatives dJ/dx_k.
  using DerivativeRule = std::function<std::vector<Mat>(const Vec&)>;

  AlmostComplexStructure() = default;
  AlmostComplexStructure(int n, Rule rule, DerivativeRule derivative = {},
                         Smoothness smoothness = Smoothness::C2, double fd_step = 1e-5);

  static AlmostComplexStructure standard(int n);
  static AlmostComplexStructure constant(const Mat& J);
  // J = P J_st P^{-1} for an invertible field P; exact structure axiom.
  static AlmostComplexStructure conjugated(int n, Rule P, DerivativeRule dP);

  int complex_dim() const { return n_; }
  int real_dim() const { return 2 * n_; }
  Smoothness smoothness() const { return smoothness_; }
  bool analytic_derivative() const { return static_cast<bool>(derivative_); }
  double fd_step() const { return fd_step_; }

  Mat operator()(const Vec& x) const { return rule_(x); }
  std::vector<Mat> derivative(const Vec& x) const;
  // sum_k w_k dJ/dx_k
  Mat derivative_along(const Vec& x, const Vec& w) const;
  // d^2 J / dx_i dx_j by centered differences of the first derivative.
  Mat second_derivative(const Vec& x, int i, int j, double h) const;

 private:
  int n_ = 0;
  Rule rule_;
  DerivativeRule derivative_;
  Smoothness smoothness_ = Smoothness::C2;
  double fd_step_ = 1e-5;
};

struct CoordinateChart {
  int real_dim = 0;
  Vec center;  // z(center) = 0 for centered charts
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<Mat(const Vec&)> jacobian;          // d(forward) at x
  std::function<Mat(const Vec&)> inverse_jacobian;  // d(inverse) at w, optional
  std::optional<Mat> linear;                        // forward(x) = L (x - center)

  static CoordinateChart affine(const Mat& L, const Vec& center);
  static CoordinateChart identity(int real_dim);
  bool is_affine() const { return linear.has_value(); }
};

// c2 after c1; both affine.
CoordinateChart compose(const CoordinateChart& c2, const CoordinateChart& c1);

struct StructureReport {
  double max_residual = 0.0;
  Vec worst_point;
  double tolerance = 1e-8;
  bool accepted = false;
};

StructureReport validate_structure(const AlmostComplexStructure& J, const GridRegion& region,
                                   double tol = 1e-8);

// Linear chart z(x) = L (x - p) with L J(p) L^{-1} = J_st.
CoordinateChart normalize_at_point(const AlmostComplexStructure& J, const Vec& p,
                                   double tol = 1e-8);

AlmostComplexStructure direct_image(const AlmostComplexStructure& J, const CoordinateChart& chart);

// (d_lambda)_* J with d_lambda(t) = t / lambda, i.e. w -> J(lambda w).
AlmostComplexStructure isotropic_rescale(const AlmostComplexStructure& J, double lambda);

// Diagonal real matrix of (z', z_n) -> (delta^{-1/2} z', delta^{-1} z_n).
Mat dilation_matrix(int n, double delta, int split);
Vec dilate_point(const Vec& z, double delta, int split);
AlmostComplexStructure nonisotropic_dilate(const AlmostComplexStructure& J, double delta,
                                           int split);

// Max over the grid of entrywise |J - J_st| and of all derivatives up to order k.
double deformation_norm(const AlmostComplexStructure& J, const GridRegion& region, int order);

}  // namespace akr
