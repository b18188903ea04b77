#ifndef OVP_MEASUREMENT_HPP_
#define OVP_MEASUREMENT_HPP_

#include <Eigen/Dense>
#include <cstdint>

namespace ovp {

enum class MeasureKind { kIdentity, kDense, kGaussian };

// Measurement matrix M in g = M f + e. Identity is kept implicit; dense and
// Gaussian kinds store the matrix. Immutable after construction.
struct MeasurementOperator {
  MeasureKind kind = MeasureKind::kIdentity;
  int m = 0;
  int d = 0;
  Eigen::MatrixXd matrix;   // dense / gaussian kinds
  std::uint64_t seed = 0;   // gaussian kind

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;

  static MeasurementOperator identity(int d);
  static MeasurementOperator dense(const Eigen::MatrixXd& mat);
};

// i.i.d. standard normal entries, then every column rescaled to unit
// Euclidean norm. Deterministic for a fixed seed.
MeasurementOperator gaussian_measurement(int m, int d, std::uint64_t seed);

}  // namespace ovp

#endif
