#ifndef OVP_PROJECTION_HPP_
#define OVP_PROJECTION_HPP_

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ovp/parameterization.hpp"

namespace ovp {

// A degree-n piecewise polynomial approximation. Sample coordinates are
// 1-based: a breakpoint at t separates segments [.., t] and [t+1, ..].
// Coefficient vectors follow the requested convention: with kSample the j-th
// coefficient multiplies x^j for x = 1..d, with kNormalized it multiplies
// (x/d)^j.
struct PiecewisePolyFit {
  int degree = 0;
  int dim = 0;
  Scaling scaling = Scaling::kSample;
  std::vector<int> breakpoints;
  std::vector<Eigen::VectorXd> coeffs;  // one (degree+1)-vector per segment
  Eigen::VectorXd fitted;
  double sse = 0.0;

  int segment_of(int sample) const;  // 1-based sample -> segment index
  double evaluate(int sample) const; // evaluate stored coefficients at sample
};

// Least-squares polynomial fit on samples [t, l] (1-based, inclusive).
// Segments shorter than degree+1 are interpolated exactly (sse = 0).
std::pair<Eigen::VectorXd, double> segment_fit(const Eigen::VectorXd& g, int t,
                                               int l, int degree,
                                               Scaling scaling = Scaling::kSample);

// Minimal SSE of a degree-n fit for every segment [t, l], computed once via
// incremental orthogonal row updates; the projection queries all O(d^2) pairs.
class SegmentErrorTable {
 public:
  SegmentErrorTable(const Eigen::VectorXd& g, int degree);
  double error(int t, int l) const {  // 1-based inclusive
    return err_[t - 1][l - t];
  }
  int size() const { return d_; }
  int degree() const { return degree_; }

 private:
  int d_ = 0;
  int degree_ = 0;
  std::vector<std::vector<double>> err_;
};

// Exact projection onto piecewise polynomials of degree n with at most k
// jumps (dynamic program over the segment error table). Ties prefer fewer
// jumps, then the smallest breakpoint index. With exact_k the recursion
// always splits, returning exactly k breakpoints (the experiment drivers use
// this form: spending all k splits detects weak jumps that merging absorbs).
PiecewisePolyFit optimal_projection(const Eigen::VectorXd& g, int k, int degree,
                                    Scaling scaling = Scaling::kSample,
                                    bool exact_k = false);

// Least-squares re-fit with the given breakpoints under value continuity at
// every junction (enforced at the midpoint coordinate t + 0.5). Used as the
// post-processing step after breakpoint detection.
PiecewisePolyFit continuous_refit(const Eigen::VectorXd& g,
                                  const std::vector<int>& breakpoints, int degree,
                                  Scaling scaling = Scaling::kSample);

// Expands per-segment coefficients to the length-d coefficient vectors
// b_0..b_n (piecewise constant, jumps only at the fit's breakpoints).
std::vector<Eigen::VectorXd> coefficient_vectors(const PiecewisePolyFit& fit);

// Change of basis from p(u) = sum_j a_j u^j with u = (x - center)/scale to
// the convention's monomials (x for kSample, x/d for kNormalized).
Eigen::VectorXd convert_poly_basis(const Eigen::VectorXd& centered,
                                   double center, double scale, Scaling scaling,
                                   int d);

}  // namespace ovp

#endif
