#include "ovp/analysis_operator.hpp"

#include <stdexcept>

namespace ovp {

Eigen::VectorXd AnalysisOperator::apply(const Eigen::VectorXd& v) const {
  if (v.size() != cols) throw std::invalid_argument("apply: length mismatch");
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) y[r] = apply_row(r, v);
  return y;
}

Eigen::VectorXd AnalysisOperator::apply_transpose(const Eigen::VectorXd& y) const {
  if (y.size() != rows)
    throw std::invalid_argument("apply_transpose: length mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(cols);
  for (int r = 0; r < rows; ++r)
    for (const auto& [j, a] : entries[r]) v[j] += a * y[r];
  return v;
}

Eigen::MatrixXd AnalysisOperator::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (const auto& [j, a] : entries[r]) m(r, j) = a;
  return m;
}

AnalysisOperator dif_operator(Geometry geometry, int d_or_h, int w) {
  AnalysisOperator op;
  op.geometry = geometry;
  if (geometry == Geometry::kOneD) {
    const int d = d_or_h;
    if (d < 2) throw std::invalid_argument("dif_operator: need d >= 2");
    op.rows = d - 1;
    op.cols = d;
    op.entries.reserve(op.rows);
    for (int i = 0; i + 1 < d; ++i)
      op.entries.push_back({{i, 1.0}, {i + 1, -1.0}});
    return op;
  }
  const int h = d_or_h;
  if (h < 2 || w < 2) throw std::invalid_argument("dif_operator: need h, w >= 2");
  op.height = h;
  op.width = w;
  op.cols = h * w;
  auto at = [w](int r, int c) { return r * w + c; };
  // horizontal then vertical first differences
  for (int r = 0; r < h; ++r)
    for (int c = 0; c + 1 < w; ++c)
      op.entries.push_back({{at(r, c), 1.0}, {at(r, c + 1), -1.0}});
  for (int r = 0; r + 1 < h; ++r)
    for (int c = 0; c < w; ++c)
      op.entries.push_back({{at(r, c), 1.0}, {at(r + 1, c), -1.0}});
  if (geometry == Geometry::kTwoDHVDiag) {
    for (int r = 0; r + 1 < h; ++r)
      for (int c = 0; c + 1 < w; ++c)
        op.entries.push_back({{at(r, c), 1.0}, {at(r + 1, c + 1), -1.0}});
    for (int r = 0; r + 1 < h; ++r)
      for (int c = 0; c + 1 < w; ++c)
        op.entries.push_back({{at(r, c + 1), 1.0}, {at(r + 1, c), -1.0}});
  }
  op.rows = static_cast<int>(op.entries.size());
  return op;
}

}  // namespace ovp
