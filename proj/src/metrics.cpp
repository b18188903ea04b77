#include "ovp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ovp {

Metrics compute_metrics(const Eigen::VectorXd& reference,
                        const Eigen::VectorXd& estimate, double peak) {
  if (reference.size() != estimate.size() || reference.size() == 0)
    throw std::invalid_argument("compute_metrics: length mismatch");
  Metrics m;
  const Eigen::VectorXd diff = estimate - reference;
  m.mse = diff.squaredNorm() / reference.size();
  m.psnr = m.mse > 0.0 ? 10.0 * std::log10(peak * peak / m.mse) : 99.0;
  m.psnr = std::min(m.psnr, 99.0);
  const double ref_norm = reference.norm();
  if (ref_norm > 0.0) {
    m.rel_err = diff.norm() / ref_norm;
  } else {
    m.rel_err = diff.norm();
    m.rel_is_absolute = true;
  }
  return m;
}

namespace {

std::vector<double> ranks_of(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> rank(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (int t = i; t <= j; ++t) rank[idx[t]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rho(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman_rho: need two equal-length series");
  const auto rx = ranks_of(x);
  const auto ry = ranks_of(y);
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double loglog_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("loglog_slope: length mismatch");
  std::vector<double> lx, ly;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const int n = static_cast<int>(lx.size());
  if (n < 2) throw std::invalid_argument("loglog_slope: too few positive points");
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

double boundary_f_score(const Image& predicted, const Image& truth, int tol_px) {
  if (predicted.h != truth.h || predicted.w != truth.w)
    throw std::invalid_argument("boundary_f_score: size mismatch");
  const int h = predicted.h, w = predicted.w;
  auto nonzero = [&](const Image& img, int r, int c) {
    return img.at(r, c) != 0.0;
  };
  auto matched = [&](const Image& a, const Image& b, int r, int c) {
    for (int dr = -tol_px; dr <= tol_px; ++dr)
      for (int dc = -tol_px; dc <= tol_px; ++dc) {
        const int nr = r + dr, nc = c + dc;
        if (nr >= 0 && nr < h && nc >= 0 && nc < w && nonzero(b, nr, nc))
          return true;
      }
    (void)a;
    return false;
  };
  int pred_total = 0, pred_hit = 0, true_total = 0, true_hit = 0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (nonzero(predicted, r, c)) {
        ++pred_total;
        if (matched(predicted, truth, r, c)) ++pred_hit;
      }
      if (nonzero(truth, r, c)) {
        ++true_total;
        if (matched(truth, predicted, r, c)) ++true_hit;
      }
    }
  if (pred_total == 0 && true_total == 0) return 1.0;
  if (pred_total == 0 || true_total == 0) return 0.0;
  const double precision = static_cast<double>(pred_hit) / pred_total;
  const double recall = static_cast<double>(true_hit) / true_total;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace ovp
