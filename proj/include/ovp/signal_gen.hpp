#ifndef OVP_SIGNAL_GEN_HPP_
#define OVP_SIGNAL_GEN_HPP_

#include <Eigen/Dense>
#include <cstdint>

#include "ovp/projection.hpp"

namespace ovp {

// Random piecewise polynomial test signals. Breakpoints are uniform over all
// placements that respect min_segment; continuity, when requested, is imposed
// at the junction midpoints; the result is rescaled into [lo, hi].
struct SignalSpec {
  int d = 300;
  int k = 6;
  int degree = 1;
  bool continuous = true;
  double lo = -1.0;
  double hi = 1.0;
  int min_segment = 0;  // 0 selects 2*(degree+1)
  std::uint64_t seed = 0;
};

struct GeneratedSignal {
  Eigen::VectorXd signal;
  PiecewisePolyFit true_fit;
};

GeneratedSignal gen_piecewise_poly(const SignalSpec& spec);

// Seeded white Gaussian noise.
Eigen::VectorXd add_noise(const Eigen::VectorXd& signal, double sigma,
                          std::uint64_t seed);

}  // namespace ovp

#endif
