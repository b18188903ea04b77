#include "ovp/sscosamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ovp/projection.hpp"

namespace ovp {

namespace {

struct SegmentedLs {
  Eigen::VectorXd fitted;                 // [X_0..X_n] b, length d
  std::vector<Eigen::VectorXd> b;         // per-block coefficient vectors
};

std::vector<std::pair<int, int>> segments_of(const std::vector<int>& jump_set,
                                             int d) {
  std::vector<std::pair<int, int>> segs;
  int start = 1;
  for (int t : jump_set) {
    if (t < 1 || t > d - 1 || t < start)
      throw std::invalid_argument("jump set must be increasing within [1, d-1]");
    segs.emplace_back(start, t);
    start = t + 1;
  }
  segs.emplace_back(start, d);
  return segs;
}

// Least squares over coefficient vectors held piecewise constant on the
// segments. Polynomial parameterizations use a re-centered basis per segment;
// the minimum-norm solution covers any rank deficiency.
SegmentedLs segmented_ls(const Eigen::VectorXd& g, const MeasurementOperator& M,
                         const Parameterization& param,
                         const std::vector<int>& jump_set, Scaling out_scaling) {
  const int d = param.dim;
  const int nc = param.count();
  const auto segs = segments_of(jump_set, d);
  const int nseg = static_cast<int>(segs.size());
  const bool poly = param.kind == ParamKind::kPolynomial;

  std::vector<double> centers(nseg), scales(nseg);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, nseg * nc);
  for (int s = 0; s < nseg; ++s) {
    const auto [t0, t1] = segs[s];
    centers[s] = 0.5 * (t0 + t1);
    scales[s] = std::max(1.0, 0.5 * (t1 - t0));
    for (int x = t0; x <= t1; ++x)
      for (int i = 0; i < nc; ++i)
        basis(x - 1, s * nc + i) =
            poly ? std::pow((x - centers[s]) / scales[s], i)
                 : param.weights[i][x - 1];
  }

  Eigen::MatrixXd design(M.m, nseg * nc);
  if (M.kind == MeasureKind::kIdentity) {
    design = basis;
  } else {
    design = M.matrix * basis;
  }
  Eigen::VectorXd theta =
      design.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(g);

  SegmentedLs out;
  out.fitted = basis * theta;
  out.b.assign(nc, Eigen::VectorXd::Zero(d));
  for (int s = 0; s < nseg; ++s) {
    Eigen::VectorXd coeffs = theta.segment(s * nc, nc);
    if (poly)
      coeffs = convert_poly_basis(coeffs, centers[s], scales[s], out_scaling, d);
    const auto [t0, t1] = segs[s];
    for (int x = t0; x <= t1; ++x)
      for (int i = 0; i < nc; ++i) out.b[i][x - 1] = coeffs[i];
  }
  return out;
}

}  // namespace

std::vector<Eigen::VectorXd> constrained_ls(const Eigen::VectorXd& g,
                                            const MeasurementOperator& M,
                                            const Parameterization& param,
                                            const std::vector<int>& jump_set) {
  if (param.dim != M.d)
    throw std::invalid_argument("constrained_ls: dimension mismatch");
  if (g.size() != M.m)
    throw std::invalid_argument("constrained_ls: measurement length mismatch");
  return segmented_ls(g, M, param, jump_set, param.scaling).b;
}

RecoveryOutput sscosamp(const Eigen::VectorXd& g, const MeasurementOperator& M,
                        const SSCoSaMPConfig& cfg) {
  if (g.size() != M.m)
    throw std::invalid_argument("sscosamp: measurement length mismatch");
  const int d = M.d;
  if (cfg.k < 0 || cfg.k >= d)
    throw std::invalid_argument("sscosamp: need 0 <= k <= d-1");
  if (cfg.gamma < 1.0) throw std::invalid_argument("sscosamp: gamma >= 1");
  if (cfg.max_iters < 1) throw std::invalid_argument("sscosamp: max_iters >= 1");
  const int n = cfg.degree;
  const double eps = cfg.epsilon >= 0.0 ? cfg.epsilon : 1e-6 * g.norm();
  const int expand = std::min(d - 1, static_cast<int>(std::ceil(cfg.gamma * cfg.k)));

  const Parameterization param =
      build_poly_parameterization(d, n, cfg.output_scaling);

  RecoveryOutput out;
  std::vector<int> jumps;  // T^t
  Eigen::VectorXd residual = g;
  PiecewisePolyFit best_fit;
  double best_res = std::numeric_limits<double>::infinity();
  bool have_fit = false;

  for (int t = 1; t <= cfg.max_iters; ++t) {
    // candidate jumps from the projected measurement proxy
    const Eigen::VectorXd proxy = M.apply_transpose(residual);
    const PiecewisePolyFit proxy_fit = optimal_projection(proxy, expand, n);
    std::vector<int> merged = jumps;
    merged.insert(merged.end(), proxy_fit.breakpoints.begin(),
                  proxy_fit.breakpoints.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    const SegmentedLs ls = segmented_ls(g, M, param, merged, cfg.output_scaling);

    // prune the temporal estimate back to the model
    PiecewisePolyFit pruned =
        optimal_projection(ls.fitted, cfg.k, n, cfg.output_scaling);
    jumps = pruned.breakpoints;
    residual = g - M.apply(pruned.fitted);
    const double res_norm = residual.norm();

    out.iterations = t;
    out.residual_history.push_back(res_norm);
    if (cfg.record_iterates) out.iterate_estimates.push_back(pruned.fitted);
    if (res_norm < best_res) {
      best_res = res_norm;
      best_fit = std::move(pruned);
      have_fit = true;
    }
    if (res_norm <= eps) {
      out.converged = true;
      break;
    }
  }

  if (!have_fit) throw std::logic_error("sscosamp: no iterate produced");
  out.estimate = best_fit.fitted;
  out.jump_set = best_fit.breakpoints;
  out.coeff_vectors = coefficient_vectors(best_fit);
  return out;
}

}  // namespace ovp
