#ifndef OVP_HEAVISIDE_HPP_
#define OVP_HEAVISIDE_HPP_

#include <Eigen/Dense>

namespace ovp {

// Upper-triangular matrix of ones: column j is a step of length j+1. Its
// first d-1 columns are the exact right inverse of the 1D difference
// operator, which is what makes piecewise constant vectors k+1 sparse in it.
struct HeavisideDictionary {
  int d = 0;

  explicit HeavisideDictionary(int size) : d(size) {}

  double entry(int i, int j) const { return i <= j ? 1.0 : 0.0; }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) m.col(j).head(j + 1).setOnes();
    return m;
  }

  // The dictionary with the DC column (the last, full-ones column) removed.
  Eigen::MatrixXd matrix_without_dc() const { return matrix().leftCols(d - 1); }
};

}  // namespace ovp

#endif
