#ifndef OVP_SSCOSAMP_HPP_
#define OVP_SSCOSAMP_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ovp/measurement.hpp"
#include "ovp/parameterization.hpp"
#include "ovp/recovery.hpp"

namespace ovp {

struct SSCoSaMPConfig {
  int k = 0;              // target jump count
  int degree = 1;         // polynomial order n
  double gamma = 2.0;     // candidate expansion factor (gamma*k jumps)
  double epsilon = -1.0;  // residual halting threshold; < 0 -> 1e-6 * ||g||
  int max_iters = 50;
  Scaling output_scaling = Scaling::kSample;
  bool record_iterates = false;
};

// Signal-space CoSaMP for piecewise polynomial signals: expand candidate
// jumps from the measurement proxy via the exact projection, solve the
// support-constrained least squares, prune back to k jumps, repeat until the
// residual falls below epsilon. Non-convergent runs return the best-residual
// iterate with converged = false.
RecoveryOutput sscosamp(const Eigen::VectorXd& g, const MeasurementOperator& M,
                        const SSCoSaMPConfig& cfg);

// Least squares over signals whose coefficient vectors are piecewise constant
// on the segments induced by jump_set (1-based breakpoints). Rank deficiency
// resolves to the minimum-norm solution.
std::vector<Eigen::VectorXd> constrained_ls(const Eigen::VectorXd& g,
                                            const MeasurementOperator& M,
                                            const Parameterization& param,
                                            const std::vector<int>& jump_set);

}  // namespace ovp

#endif
