#ifndef OVP_BGAPN_HPP_
#define OVP_BGAPN_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ovp/analysis_operator.hpp"
#include "ovp/measurement.hpp"
#include "ovp/parameterization.hpp"
#include "ovp/recovery.hpp"

namespace ovp {

struct BGAPNConfig {
  double noise_norm = 0.0;   // ||e||_2 bound in the residual constraint
  double epsilon = -1.0;     // stop threshold; < 0 selects 1e-3 * dynrange(g)
  int rows_per_iter = 0;     // 0 selects 1 in 1D, ceil(p/100) for images
  double gamma = -1.0;       // continuity weight; < 0 lets each entry point
                             // pick its default (0 for bgapn, 100 for the
                             // continuity variant), 0 disables the penalty
  int max_iters = 50;
  double ls_tolerance = 1e-8;  // inner CG relative tolerance
  double tikhonov = 1e-10;     // ridge, scaled by the quadratic form's trace
};

struct CosupportSolution {
  std::vector<Eigen::VectorXd> b;  // one coefficient vector per weight
  double residual_norm = 0.0;
  double lambda = 0.0;   // multiplier of the final branch (0 = unconstrained)
  bool bound_unmet = false;
};

// Minimizes sum_i ||Omega_L b_i||^2 + gamma ||W Omega X b||^2 subject to
// ||g - M X b||_2 <= noise_norm. `cosupport` lists the active rows L and
// `weighted_rows` the rows where W is one. Solved by Lagrangian bisection on
// the residual constraint; noise_norm = 0 switches to the exact
// equality-constrained path. Rank deficiency is absorbed by a small ridge, so
// the call never fails; an unreachable bound is reported via bound_unmet.
CosupportSolution solve_cosupport_ls(const Eigen::VectorXd& g,
                                     const MeasurementOperator& M,
                                     const Parameterization& param,
                                     const AnalysisOperator& omega,
                                     const std::vector<int>& cosupport,
                                     const std::vector<int>& weighted_rows,
                                     double gamma, double noise_norm,
                                     double bisection_tol,
                                     const BGAPNConfig& cfg = {});

// Block greedy analysis pursuit: start from the full cosupport and repeatedly
// drop the rows with the largest joint coefficient energy, re-solving the
// constrained least squares each time. Detected jumps are the removed rows.
RecoveryOutput bgapn(const Eigen::VectorXd& g, const MeasurementOperator& M,
                     const Parameterization& param, const AnalysisOperator& omega,
                     const BGAPNConfig& cfg);

// Same iteration with a quadratic continuity penalty on the removed rows
// (weight gamma; a non-positive gamma selects the default 100).
RecoveryOutput bgapn_continuity(const Eigen::VectorXd& g,
                                const MeasurementOperator& M,
                                const Parameterization& param,
                                const AnalysisOperator& omega,
                                const BGAPNConfig& cfg);

}  // namespace ovp

#endif
