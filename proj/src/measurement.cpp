#include "ovp/measurement.hpp"

#include <stdexcept>

#include "ovp/rng.hpp"

namespace ovp {

Eigen::VectorXd MeasurementOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != d) throw std::invalid_argument("measurement apply: length mismatch");
  if (kind == MeasureKind::kIdentity) return v;
  return matrix * v;
}

Eigen::VectorXd MeasurementOperator::apply_transpose(const Eigen::VectorXd& y) const {
  if (y.size() != m)
    throw std::invalid_argument("measurement apply_transpose: length mismatch");
  if (kind == MeasureKind::kIdentity) return y;
  return matrix.transpose() * y;
}

MeasurementOperator MeasurementOperator::identity(int d) {
  if (d < 1) throw std::invalid_argument("identity measurement: d >= 1");
  MeasurementOperator op;
  op.kind = MeasureKind::kIdentity;
  op.m = d;
  op.d = d;
  return op;
}

MeasurementOperator MeasurementOperator::dense(const Eigen::MatrixXd& mat) {
  MeasurementOperator op;
  op.kind = MeasureKind::kDense;
  op.m = static_cast<int>(mat.rows());
  op.d = static_cast<int>(mat.cols());
  op.matrix = mat;
  return op;
}

MeasurementOperator gaussian_measurement(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1)
    throw std::invalid_argument("gaussian_measurement: m, d >= 1");
  MeasurementOperator op;
  op.kind = MeasureKind::kGaussian;
  op.m = m;
  op.d = d;
  op.seed = seed;
  op.matrix.resize(m, d);
  Rng rng(seed);
  // column-major fill, then exact unit-norm columns
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < m; ++i) op.matrix(i, j) = rng.normal();
  for (int j = 0; j < d; ++j) {
    const double nrm = op.matrix.col(j).norm();
    if (nrm > 0.0) op.matrix.col(j) /= nrm;
  }
  return op;
}

}  // namespace ovp
