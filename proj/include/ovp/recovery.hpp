#ifndef OVP_RECOVERY_HPP_
#define OVP_RECOVERY_HPP_

#include <Eigen/Dense>
#include <vector>

namespace ovp {

// Common result of the pursuit solvers: the recovered coefficient vectors,
// the synthesized signal estimate, the detected jump/edge rows and basic
// iteration diagnostics.
struct RecoveryOutput {
  std::vector<Eigen::VectorXd> coeff_vectors;
  Eigen::VectorXd estimate;
  std::vector<int> jump_set;            // 1-based breakpoint / operator-row ids
  std::vector<double> residual_history; // ||g - M f_t||_2 per iteration
  int iterations = 0;
  bool converged = false;
  bool bound_unmet = false;             // residual bound never reached
  std::vector<Eigen::VectorXd> iterate_estimates;  // only when recording
};

}  // namespace ovp

#endif
