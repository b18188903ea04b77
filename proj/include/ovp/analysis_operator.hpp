#ifndef OVP_ANALYSIS_OPERATOR_HPP_
#define OVP_ANALYSIS_OPERATOR_HPP_

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace ovp {

enum class Geometry { kOneD, kTwoDHV, kTwoDHVDiag };

// Sparse row-structured analysis operator. Every row of the operators built
// here is a two-point difference (+1, -1); rows are stored explicitly because
// the pursuit algorithms select and remove individual rows (cosupport logic).
struct AnalysisOperator {
  int rows = 0;
  int cols = 0;
  Geometry geometry = Geometry::kOneD;
  int height = 0;  // 2D geometries
  int width = 0;
  // entries[r] lists the (index, value) pairs of row r.
  std::vector<std::vector<std::pair<int, double>>> entries;

  double apply_row(int r, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (const auto& [j, a] : entries[r]) s += a * v[j];
    return s;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd dense() const;
};

// Finite-difference operator. 1D: d-1 rows computing f[i] - f[i+1]. 2D on an
// h x w row-major image: horizontal differences first (h*(w-1) rows), then
// vertical ((h-1)*w rows); the diagonal variant appends the two diagonal
// derivative filters ((h-1)*(w-1) rows each).
AnalysisOperator dif_operator(Geometry geometry, int d_or_h, int w = 0);

}  // namespace ovp

#endif
