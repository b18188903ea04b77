#ifndef OVP_PARAMETERIZATION_HPP_
#define OVP_PARAMETERIZATION_HPP_

#include <Eigen/Dense>
#include <vector>

namespace ovp {

// Coordinate convention for polynomial-type weights.
//   kSample:     sample coordinate runs 1..d (the diagonal of Z).
//   kNormalized: coordinate (i+1)/d, better conditioned for least squares.
enum class Scaling { kSample, kNormalized };

enum class ParamKind { kPolynomial, kPlanar2D, kCustom };

// A signal model f = sum_i diag(weights[i]) * b_i. The weight vectors are the
// diagonals of the basis matrices X_i; the coefficient vectors b_i are what
// the solvers recover.
struct Parameterization {
  int dim = 0;
  std::vector<Eigen::VectorXd> weights;
  ParamKind kind = ParamKind::kCustom;
  Scaling scaling = Scaling::kSample;
  int height = 0;  // planar kinds only
  int width = 0;

  int count() const { return static_cast<int>(weights.size()); }

  // f = sum_i weights[i] .* b[i]
  Eigen::VectorXd synthesize(const std::vector<Eigen::VectorXd>& b) const;
};

// Weight vectors [1, x, x^2, ..., x^n] with x per the scaling convention.
Parameterization build_poly_parameterization(int d, int degree, Scaling scaling);

// DC, within-row coordinate ramp and row-index ramp for an h x w image stored
// row-major. Sample scaling uses the 1..w and 1..h ramps.
Parameterization build_planar_parameterization(int h, int w,
                                               Scaling scaling = Scaling::kSample);

// All monomials r^a * c^b with a+b <= degree; degree 1 reproduces the planar
// parameterization (in a fixed order: DC, column ramp, row ramp, ...).
Parameterization build_planar_poly_parameterization(int h, int w, int degree,
                                                    Scaling scaling = Scaling::kSample);

// Rescales every weight vector to unit max-abs. `ratios[i]` is the factor the
// i-th weight was divided by, so coefficients transform as b_i -> b_i * ratio_i
// when moving from the original to the normalized parameterization.
Parameterization normalize_weights(const Parameterization& p,
                                   std::vector<double>* ratios);

}  // namespace ovp

#endif
