#include "ovp/signal_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "ovp/rng.hpp"

namespace ovp {

namespace {

// Uniform sample over all breakpoint placements with segments >= min_seg:
// distribute the slack d - (k+1)*min_seg over k+1 gaps via the bars bijection.
std::vector<int> sample_breakpoints(Rng& rng, int d, int k, int min_seg) {
  if (k == 0) return {};
  const int slack = d - (k + 1) * min_seg;
  const int bars = slack + k;
  std::set<std::uint64_t> picks;
  while (static_cast<int>(picks.size()) < k)
    picks.insert(rng.uniform_below(bars));
  std::vector<int> extra(k + 1, 0);
  int seg = 0;
  std::uint64_t prev = 0;
  bool first = true;
  for (std::uint64_t pos : picks) {
    extra[seg] += static_cast<int>(first ? pos : pos - prev - 1);
    prev = pos;
    first = false;
    ++seg;
  }
  extra[k] = slack;
  for (int i = 0; i < k; ++i) extra[k] -= extra[i];

  std::vector<int> breakpoints(k);
  int cursor = 0;
  for (int i = 0; i < k; ++i) {
    cursor += min_seg + extra[i];
    breakpoints[i] = cursor;
  }
  return breakpoints;
}

struct SegmentPoly {
  double center;
  double scale;
  Eigen::VectorXd a;  // centered coefficients

  double eval(double x) const {
    const double u = (x - center) / scale;
    double acc = 0.0;
    for (int j = static_cast<int>(a.size()) - 1; j >= 0; --j) acc = acc * u + a[j];
    return acc;
  }
};

}  // namespace

GeneratedSignal gen_piecewise_poly(const SignalSpec& spec) {
  const int d = spec.d;
  const int k = spec.k;
  const int n = spec.degree;
  const int min_seg = spec.min_segment > 0 ? spec.min_segment : 2 * (n + 1);
  if (d < 2 || k < 0 || n < 0)
    throw std::invalid_argument("gen_piecewise_poly: bad spec");
  if ((k + 1) * min_seg > d)
    throw std::invalid_argument("gen_piecewise_poly: k*min_segment exceeds d");
  if (!(spec.lo < spec.hi))
    throw std::invalid_argument("gen_piecewise_poly: empty dynamic range");

  Rng rng(spec.seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const std::vector<int> breakpoints = sample_breakpoints(rng, d, k, min_seg);
    std::vector<SegmentPoly> polys;
    int start = 1;
    for (int s = 0; s <= k; ++s) {
      const int end = s < k ? breakpoints[s] : d;
      SegmentPoly p;
      p.center = 0.5 * (start + end);
      p.scale = std::max(1.0, 0.5 * (end - start));
      p.a.resize(n + 1);
      for (int j = 0; j <= n; ++j) p.a[j] = rng.uniform(-1.0, 1.0);
      if (spec.continuous && s > 0) {
        const double xstar = breakpoints[s - 1] + 0.5;
        p.a[0] += polys.back().eval(xstar) - p.eval(xstar);
      }
      polys.push_back(std::move(p));
      start = end + 1;
    }

    Eigen::VectorXd f(d);
    start = 1;
    for (int s = 0; s <= k; ++s) {
      const int end = s < k ? breakpoints[s] : d;
      for (int x = start; x <= end; ++x) f[x - 1] = polys[s].eval(x);
      start = end + 1;
    }

    const double fmin = f.minCoeff();
    const double fmax = f.maxCoeff();
    if (fmax - fmin < 1e-9 * (std::abs(fmax) + 1.0)) continue;  // degenerate
    const double alpha = (spec.hi - spec.lo) / (fmax - fmin);
    const double beta = spec.lo - alpha * fmin;
    f = alpha * f + Eigen::VectorXd::Constant(d, beta);
    for (SegmentPoly& p : polys) {
      p.a *= alpha;
      p.a[0] += beta;
    }

    // every junction must carry an actual polynomial change
    bool distinct = true;
    for (int s = 0; s < k && distinct; ++s) {
      const double xstar = breakpoints[s] + 0.5;
      double diff = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double x = xstar + (j - 0.5 * n);
        diff += std::abs(polys[s].eval(x) - polys[s + 1].eval(x));
      }
      if (diff < 1e-7 * (spec.hi - spec.lo)) distinct = false;
    }
    if (!distinct) continue;

    GeneratedSignal out;
    out.signal = f;
    out.true_fit.degree = n;
    out.true_fit.dim = d;
    out.true_fit.scaling = Scaling::kSample;
    out.true_fit.breakpoints = breakpoints;
    out.true_fit.fitted = f;
    out.true_fit.sse = 0.0;
    for (const SegmentPoly& p : polys)
      out.true_fit.coeffs.push_back(
          convert_poly_basis(p.a, p.center, p.scale, Scaling::kSample, d));
    return out;
  }
  throw std::runtime_error("gen_piecewise_poly: no valid draw in 100 attempts");
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& signal, double sigma,
                          std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma >= 0");
  if (sigma == 0.0) return signal;
  Rng rng(seed);
  Eigen::VectorXd out = signal;
  for (int i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

}  // namespace ovp
