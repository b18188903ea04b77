// Independent reference implementations used only by the tests. These solve
// the same problems as the library through different routes (plain bases,
// exhaustive enumeration, dense saddle-point systems) so the two sides can
// check each other.
#ifndef OVP_TESTS_ORACLES_HPP_
#define OVP_TESTS_ORACLES_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ovp/analysis_operator.hpp"
#include "ovp/measurement.hpp"
#include "ovp/parameterization.hpp"

namespace oracle {

// Least-squares SSE of a degree-n fit on g[t..l] (1-based, inclusive) using
// monomials of (x - t) / (l - t + 1) and an SVD solve.
inline double segment_sse(const Eigen::VectorXd& g, int t, int l, int n) {
  const int len = l - t + 1;
  const int p = n + 1;
  Eigen::MatrixXd v(len, p);
  Eigen::VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    const double u = static_cast<double>(i) / len;
    double pw = 1.0;
    for (int j = 0; j < p; ++j) {
      v(i, j) = pw;
      pw *= u;
    }
    y[i] = g[t - 1 + i];
  }
  if (len <= p) return 0.0;
  Eigen::VectorXd a = v.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
  return (v * a - y).squaredNorm();
}

// SSE of a fixed breakpoint placement (1-based breakpoints).
inline double partition_sse(const Eigen::VectorXd& g,
                            const std::vector<int>& breakpoints, int n) {
  const int d = static_cast<int>(g.size());
  double sse = 0.0;
  int start = 1;
  for (std::size_t s = 0; s <= breakpoints.size(); ++s) {
    const int end = s < breakpoints.size() ? breakpoints[s] : d;
    sse += segment_sse(g, start, end, n);
    start = end + 1;
  }
  return sse;
}

// Exhaustive minimum over all breakpoint sets of size at most k.
inline double enumeration_min_sse(const Eigen::VectorXd& g, int k, int n) {
  const int d = static_cast<int>(g.size());
  double best = partition_sse(g, {}, n);
  std::vector<int> pick;
  // iterate subsets of {1..d-1} of size j via recursion
  auto recurse = [&](auto&& self, int next, int remaining) -> void {
    if (remaining == 0) {
      best = std::min(best, partition_sse(g, pick, n));
      return;
    }
    for (int t = next; t <= d - 1 - (remaining - 1); ++t) {
      pick.push_back(t);
      self(self, t + 1, remaining - 1);
      pick.pop_back();
    }
  };
  for (int j = 1; j <= k; ++j) recurse(recurse, 1, j);
  return best;
}

// Dense assembly of the cosupport quadratic program, built directly from the
// operator definitions (block layout: unknowns stacked [b_0; b_1; ...]).
struct DenseQp {
  Eigen::MatrixXd quad;    // sum_i Omega_L' Omega_L + gamma (W Om X)'(W Om X)
  Eigen::MatrixXd design;  // B = M X
  int d = 0;
  int nc = 0;
};

inline DenseQp build_dense_qp(const ovp::MeasurementOperator& M,
                              const ovp::Parameterization& param,
                              const ovp::AnalysisOperator& omega,
                              const std::vector<int>& cosupport_1b,
                              const std::vector<int>& weighted_1b, double gamma) {
  DenseQp qp;
  qp.d = param.dim;
  qp.nc = param.count();
  const int N = qp.d * qp.nc;
  const Eigen::MatrixXd om = omega.dense();

  Eigen::MatrixXd x(qp.d, N);  // [X_0, X_1, ...]
  x.setZero();
  for (int i = 0; i < qp.nc; ++i)
    for (int t = 0; t < qp.d; ++t) x(t, i * qp.d + t) = param.weights[i][t];

  Eigen::MatrixXd om_l(cosupport_1b.size(), qp.d);
  for (std::size_t r = 0; r < cosupport_1b.size(); ++r)
    om_l.row(r) = om.row(cosupport_1b[r] - 1);
  qp.quad = Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd gram = om_l.transpose() * om_l;
  for (int i = 0; i < qp.nc; ++i)
    qp.quad.block(i * qp.d, i * qp.d, qp.d, qp.d) = gram;

  if (gamma > 0.0 && !weighted_1b.empty()) {
    Eigen::MatrixXd wom(weighted_1b.size(), qp.d);
    for (std::size_t r = 0; r < weighted_1b.size(); ++r)
      wom.row(r) = om.row(weighted_1b[r] - 1);
    const Eigen::MatrixXd womx = wom * x;
    qp.quad += gamma * womx.transpose() * womx;
  }

  qp.design = M.kind == ovp::MeasureKind::kIdentity ? x : M.matrix * x;
  return qp;
}

// Stacks the per-block solution vectors into the dense layout above.
inline Eigen::VectorXd stack_blocks(const std::vector<Eigen::VectorXd>& b) {
  const int d = static_cast<int>(b[0].size());
  Eigen::VectorXd v(static_cast<int>(b.size()) * d);
  for (std::size_t i = 0; i < b.size(); ++i) v.segment(i * d, d) = b[i];
  return v;
}

}  // namespace oracle

#endif
