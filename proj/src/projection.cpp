#include "ovp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ovp {

namespace {

// Binomial coefficients up to the small degrees used here.
double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}


struct SegmentBasis {
  double center;
  double scale;
  int degree;
  double value(int j, double x) const {
    return std::pow((x - center) / scale, j);
  }
};

SegmentBasis make_basis(int t, int l, int degree) {
  return {0.5 * (t + l), std::max(1.0, 0.5 * (l - t)), degree};
}

struct SegmentSolve {
  SegmentBasis basis;
  Eigen::VectorXd centered;  // coefficients in the centered basis
  double sse = 0.0;
};

SegmentSolve solve_segment(const Eigen::VectorXd& g, int t, int l, int degree) {
  const int d = static_cast<int>(g.size());
  if (t < 1 || l > d || t > l)
    throw std::invalid_argument("segment_fit: empty or out-of-range segment");
  const int len = l - t + 1;
  const int p = degree + 1;
  SegmentSolve out;
  out.basis = make_basis(t, l, degree);
  Eigen::MatrixXd v(len, p);
  Eigen::VectorXd y(len);
  for (int i = 0; i < len; ++i) {
    const double x = t + i;
    for (int j = 0; j < p; ++j) v(i, j) = out.basis.value(j, x);
    y[i] = g[t - 1 + i];
  }
  out.centered = v.colPivHouseholderQr().solve(y);
  out.sse = (v * out.centered - y).squaredNorm();
  if (len <= p) out.sse = 0.0;  // under-determined: the fit interpolates
  return out;
}

}  // namespace

int PiecewisePolyFit::segment_of(int sample) const {
  int s = 0;
  for (int b : breakpoints) {
    if (sample > b) ++s;
    else break;
  }
  return s;
}

double PiecewisePolyFit::evaluate(int sample) const {
  const Eigen::VectorXd& c = coeffs[segment_of(sample)];
  const double x = scaling == Scaling::kSample
                       ? static_cast<double>(sample)
                       : static_cast<double>(sample) / dim;
  double acc = 0.0;
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j) acc = acc * x + c[j];
  return acc;
}

std::pair<Eigen::VectorXd, double> segment_fit(const Eigen::VectorXd& g, int t,
                                               int l, int degree,
                                               Scaling scaling) {
  const SegmentSolve s = solve_segment(g, t, l, degree);
  return {convert_poly_basis(s.centered, s.basis.center, s.basis.scale,
                                 scaling, static_cast<int>(g.size())),
          s.sse};
}

SegmentErrorTable::SegmentErrorTable(const Eigen::VectorXd& g, int degree)
    : d_(static_cast<int>(g.size())), degree_(degree) {
  if (degree < 0) throw std::invalid_argument("SegmentErrorTable: degree >= 0");
  const int p = degree + 1;
  err_.resize(d_);
  // For each start t, append samples one at a time to an augmented QR factor
  // [V | g]; the accumulated residual square is the segment error. Rotations
  // keep the update backward stable no matter how the Vandermonde conditions.
  Eigen::MatrixXd r(p, p);
  Eigen::VectorXd qtb(p);
  Eigen::VectorXd row(p);
  for (int t = 1; t <= d_; ++t) {
    err_[t - 1].resize(d_ - t + 1);
    r.setZero();
    qtb.setZero();
    double ssq = 0.0;
    for (int l = t; l <= d_; ++l) {
      const double u = static_cast<double>(l - t);
      double pw = 1.0;
      for (int j = 0; j < p; ++j) {
        row[j] = pw;
        pw *= u;
      }
      double y = g[l - 1];
      for (int j = 0; j < p; ++j) {
        if (row[j] == 0.0) continue;
        const double a = r(j, j);
        const double b = row[j];
        const double h = std::hypot(a, b);
        const double c = a / h;
        const double s = b / h;
        for (int m = j; m < p; ++m) {
          const double rm = r(j, m);
          const double vm = row[m];
          r(j, m) = c * rm + s * vm;
          row[m] = -s * rm + c * vm;
        }
        const double q = qtb[j];
        qtb[j] = c * q + s * y;
        y = -s * q + c * y;
      }
      ssq += y * y;
      err_[t - 1][l - t] = (l - t + 1 <= p) ? 0.0 : ssq;
    }
  }
}

namespace {

PiecewisePolyFit assemble_fit(const Eigen::VectorXd& g,
                              const std::vector<int>& breakpoints, int degree,
                              Scaling scaling) {
  const int d = static_cast<int>(g.size());
  PiecewisePolyFit fit;
  fit.degree = degree;
  fit.dim = d;
  fit.scaling = scaling;
  fit.breakpoints = breakpoints;
  fit.fitted.resize(d);
  int start = 1;
  for (std::size_t s = 0; s <= breakpoints.size(); ++s) {
    const int end = s < breakpoints.size() ? breakpoints[s] : d;
    const SegmentSolve sol = solve_segment(g, start, end, degree);
    for (int x = start; x <= end; ++x) {
      const double u = (x - sol.basis.center) / sol.basis.scale;
      double acc = 0.0;
      for (int j = degree; j >= 0; --j) acc = acc * u + sol.centered[j];
      fit.fitted[x - 1] = acc;
    }
    fit.coeffs.push_back(convert_poly_basis(
        sol.centered, sol.basis.center, sol.basis.scale, scaling, d));
    start = end + 1;
  }
  fit.sse = (fit.fitted - g).squaredNorm();
  return fit;
}

}  // namespace

PiecewisePolyFit optimal_projection(const Eigen::VectorXd& g, int k, int degree,
                                    Scaling scaling, bool exact_k) {
  const int d = static_cast<int>(g.size());
  if (d < 1) throw std::invalid_argument("optimal_projection: empty signal");
  if (k < 0 || k >= d)
    throw std::invalid_argument("optimal_projection: need 0 <= k <= d-1");
  const SegmentErrorTable table(g, degree);

  // cost[j][l]: best SSE for the prefix [1, l] with at most j jumps (exactly
  // j when exact_k). choice[j][l]: last breakpoint (0 = none new at level j).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(k + 1, std::vector<double>(d + 1, 0.0));
  std::vector<std::vector<int>> choice(k + 1, std::vector<int>(d + 1, 0));
  for (int l = 1; l <= d; ++l) cost[0][l] = table.error(1, l);
  for (int j = 1; j <= k; ++j) {
    for (int l = 1; l <= d; ++l) {
      double best = exact_k ? kInf : cost[j - 1][l];
      int arg = 0;
      for (int t = 1; t < l; ++t) {
        if (cost[j - 1][t] == kInf) continue;
        const double c = cost[j - 1][t] + table.error(t + 1, l);
        if (c < best) {
          best = c;
          arg = t;
        }
      }
      cost[j][l] = best;
      choice[j][l] = arg;
    }
  }

  std::vector<int> breakpoints;
  int j = k, l = d;
  while (j > 0) {
    const int t = choice[j][l];
    if (t != 0) {
      breakpoints.push_back(t);
      l = t;
    }
    --j;
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  return assemble_fit(g, breakpoints, degree, scaling);
}

PiecewisePolyFit continuous_refit(const Eigen::VectorXd& g,
                                  const std::vector<int>& breakpoints, int degree,
                                  Scaling scaling) {
  const int d = static_cast<int>(g.size());
  const int k = static_cast<int>(breakpoints.size());
  for (int i = 0; i < k; ++i) {
    if (breakpoints[i] < 1 || breakpoints[i] > d - 1 ||
        (i > 0 && breakpoints[i] <= breakpoints[i - 1]))
      throw std::invalid_argument("continuous_refit: invalid breakpoint list");
  }
  if (k == 0) return assemble_fit(g, {}, degree, scaling);

  const int p = degree + 1;
  const int nseg = k + 1;
  const int total = nseg * p;

  std::vector<int> starts(nseg), ends(nseg);
  for (int s = 0; s < nseg; ++s) {
    starts[s] = s == 0 ? 1 : breakpoints[s - 1] + 1;
    ends[s] = s < k ? breakpoints[s] : d;
  }

  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(d, total);
  std::vector<SegmentBasis> bases;
  for (int s = 0; s < nseg; ++s) {
    const SegmentBasis basis = make_basis(starts[s], ends[s], degree);
    bases.push_back(basis);
    for (int x = starts[s]; x <= ends[s]; ++x)
      for (int j = 0; j < p; ++j) design(x - 1, s * p + j) = basis.value(j, x);
  }

  // value continuity at each junction midpoint t + 0.5
  Eigen::MatrixXd cons = Eigen::MatrixXd::Zero(k, total);
  for (int cidx = 0; cidx < k; ++cidx) {
    const double xstar = breakpoints[cidx] + 0.5;
    for (int j = 0; j < p; ++j) {
      cons(cidx, cidx * p + j) = bases[cidx].value(j, xstar);
      cons(cidx, (cidx + 1) * p + j) = -bases[cidx + 1].value(j, xstar);
    }
  }

  // eliminate the constraints through a null-space basis, then plain LS
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cons);
  Eigen::MatrixXd null_basis = lu.kernel();
  Eigen::MatrixXd reduced = design * null_basis;
  Eigen::VectorXd z =
      reduced.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(g);
  Eigen::VectorXd theta = null_basis * z;

  PiecewisePolyFit fit;
  fit.degree = degree;
  fit.dim = d;
  fit.scaling = scaling;
  fit.breakpoints = breakpoints;
  fit.fitted = design * theta;
  fit.sse = (fit.fitted - g).squaredNorm();
  for (int s = 0; s < nseg; ++s) {
    Eigen::VectorXd a = theta.segment(s * p, p);
    fit.coeffs.push_back(
        convert_poly_basis(a, bases[s].center, bases[s].scale, scaling, d));
  }
  return fit;
}

Eigen::VectorXd convert_poly_basis(const Eigen::VectorXd& a, double c, double s,
                                   Scaling scaling, int d) {
  const int n = static_cast<int>(a.size()) - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double aj = a[j] / std::pow(s, j);
    for (int m = 0; m <= j; ++m)
      out[m] += aj * binom(j, m) * std::pow(-c, j - m);
  }
  if (scaling == Scaling::kNormalized)
    for (int m = 0; m <= n; ++m) out[m] *= std::pow(double(d), m);
  return out;
}

std::vector<Eigen::VectorXd> coefficient_vectors(const PiecewisePolyFit& fit) {
  const int d = fit.dim;
  const int p = fit.degree + 1;
  std::vector<Eigen::VectorXd> b(p, Eigen::VectorXd::Zero(d));
  int start = 1;
  for (std::size_t s = 0; s < fit.coeffs.size(); ++s) {
    const int end = s < fit.breakpoints.size() ? fit.breakpoints[s] : d;
    for (int x = start; x <= end; ++x)
      for (int j = 0; j < p; ++j) b[j][x - 1] = fit.coeffs[s][j];
    start = end + 1;
  }
  return b;
}

}  // namespace ovp
