#ifndef OVP_METRICS_HPP_
#define OVP_METRICS_HPP_

#include <Eigen/Dense>

#include "ovp/image.hpp"

namespace ovp {

struct Metrics {
  double mse = 0.0;
  double psnr = 0.0;     // 10 log10(peak^2 / mse), capped at 99 dB
  double rel_err = 0.0;  // ||diff|| / ||reference||
  bool rel_is_absolute = false;  // reference was zero; rel_err holds ||diff||
};

Metrics compute_metrics(const Eigen::VectorXd& reference,
                        const Eigen::VectorXd& estimate, double peak = 255.0);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Least-squares slope of log(y) against log(x); entries with non-positive
// values are skipped.
double loglog_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Boundary agreement at a pixel tolerance (Chebyshev distance): F-score of
// precision and recall between the nonzero pixels of the two maps.
double boundary_f_score(const Image& predicted, const Image& truth,
                        int tol_px = 1);

}  // namespace ovp

#endif
