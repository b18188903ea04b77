#ifndef OVP_EXPERIMENTS_HPP_
#define OVP_EXPERIMENTS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ovp/measurement.hpp"
#include "ovp/signal_gen.hpp"

namespace ovp {

struct TrialRow {
  double mse = 0.0;
  double psnr = 0.0;
  double rel_err = 0.0;
  bool success = false;
};

struct CellResult {
  std::vector<TrialRow> trials;
  double mean_mse = 0.0;
  double std_mse = 0.0;
  double mean_err = 0.0;  // mean l2 error (sqrt(d * mse) per trial)
  double rate = 0.0;      // fraction of successful trials
};

struct ExperimentResult {
  std::string kind;  // "sweep" or "cs"
  SignalSpec spec;
  std::vector<std::string> methods;
  std::vector<double> grid;  // sigma values or m/d ratios
  double success_tol = 1e-4;
  std::uint64_t seed = 0;
  // cells[method][grid point]
  std::vector<std::vector<CellResult>> cells;
};

// 1D denoising comparison on random signals. Known methods:
//   bgapn, bgapn-continuity, projection-oracle-k, projection-oracle-k-continuity
// All methods see the same signal and noise at a given (sigma, trial).
ExperimentResult denoising_sweep(const SignalSpec& spec,
                                 const std::vector<double>& sigmas,
                                 const std::vector<std::string>& methods,
                                 int trials, std::uint64_t seed, int threads = 1);

// Noiseless compressed sensing recovery rate over the sampling grid m/d with
// fresh unit-norm signals and Gaussian matrices per trial. Methods: sscosamp,
// bgapn. success_tol is the relative-error threshold for a recovery.
ExperimentResult cs_experiment(const SignalSpec& spec,
                               const std::vector<double>& m_over_d,
                               const std::vector<std::string>& methods,
                               int trials, double success_tol,
                               std::uint64_t seed, int threads = 1);

// Empirical lower bound for the restricted isometry constant over random
// unit-norm piecewise polynomials: max over trials of | ||Mf||^2 - 1 |.
double estimate_pn_rip(const MeasurementOperator& M, int degree, int k,
                       int trials, std::uint64_t seed);

}  // namespace ovp

#endif
