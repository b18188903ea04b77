#include "ovp/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <queue>
#include <stdexcept>

#include "ovp/parameterization.hpp"

namespace ovp {

namespace {

Image denoise_block(const Image& noisy, double sigma, const DenoiseOptions& opts) {
  const int h = noisy.h;
  const int w = noisy.w;
  const Parameterization param =
      build_planar_poly_parameterization(h, w, opts.degree, Scaling::kNormalized);
  const AnalysisOperator omega = dif_operator(opts.geometry, h, w);
  const MeasurementOperator ident = MeasurementOperator::identity(h * w);

  BGAPNConfig cfg;
  cfg.noise_norm = sigma * std::sqrt(static_cast<double>(h) * w);
  cfg.gamma = opts.gamma;
  cfg.rows_per_iter = opts.rows_per_iter;
  cfg.max_iters = opts.max_iters;
  const double dynrange = noisy.pixels.maxCoeff() - noisy.pixels.minCoeff();
  cfg.epsilon = opts.epsilon_scale * 1e-3 * dynrange;

  const RecoveryOutput rec =
      opts.gamma > 0.0 ? bgapn_continuity(noisy.pixels, ident, param, omega, cfg)
                       : bgapn(noisy.pixels, ident, param, omega, cfg);

  Image out(h, w);
  out.pixels = rec.estimate;
  return out;
}

struct Tile {
  int r0, c0, h, w;
};

std::vector<Tile> tile_cover(int h, int w, int tile, int overlap) {
  const int stride = std::max(1, tile - overlap);
  std::vector<int> rows, cols;
  for (int r = 0;; r += stride) {
    if (r + tile >= h) {
      rows.push_back(std::max(0, h - tile));
      break;
    }
    rows.push_back(r);
  }
  for (int c = 0;; c += stride) {
    if (c + tile >= w) {
      cols.push_back(std::max(0, w - tile));
      break;
    }
    cols.push_back(c);
  }
  std::vector<Tile> tiles;
  for (int r : rows)
    for (int c : cols)
      tiles.push_back({r, c, std::min(tile, h - r), std::min(tile, w - c)});
  return tiles;
}

template <typename Job>
std::vector<Image> run_jobs(const std::vector<Job>& jobs, int threads) {
  std::vector<Image> results(jobs.size());
  if (threads <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i]();
    return results;
  }
  std::vector<std::future<Image>> futs;
  futs.reserve(jobs.size());
  for (const auto& job : jobs)
    futs.push_back(std::async(std::launch::async, job));
  for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = futs[i].get();
  return results;
}

}  // namespace

Image denoise_image(const Image& noisy, double sigma, const DenoiseOptions& opts) {
  if (noisy.h < 2 || noisy.w < 2)
    throw std::invalid_argument("denoise_image: image too small");
  if (!noisy.pixels.allFinite())
    throw std::invalid_argument("denoise_image: non-finite pixels");
  if (sigma < 0.0) throw std::invalid_argument("denoise_image: sigma >= 0");

  Image out(noisy.h, noisy.w);
  if (noisy.h <= opts.tile_above && noisy.w <= opts.tile_above) {
    out = denoise_block(noisy, sigma, opts);
  } else {
    const auto tiles =
        tile_cover(noisy.h, noisy.w, opts.tile_size, opts.tile_overlap);
    std::vector<std::function<Image()>> jobs;
    for (const Tile& t : tiles)
      jobs.push_back([&noisy, sigma, &opts, t]() {
        Image block(t.h, t.w);
        for (int r = 0; r < t.h; ++r)
          for (int c = 0; c < t.w; ++c)
            block.at(r, c) = noisy.at(t.r0 + r, t.c0 + c);
        return denoise_block(block, sigma, opts);
      });
    const auto results = run_jobs(jobs, opts.threads);
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(noisy.size());
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      const Tile& t = tiles[i];
      for (int r = 0; r < t.h; ++r)
        for (int c = 0; c < t.w; ++c) {
          out.at(t.r0 + r, t.c0 + c) += results[i].at(r, c);
          weight[(t.r0 + r) * noisy.w + (t.c0 + c)] += 1.0;
        }
    }
    out.pixels.array() /= weight.array();
  }
  out.pixels = out.pixels.cwiseMax(opts.clamp_lo).cwiseMin(opts.clamp_hi);
  return out;
}

std::vector<EnsembleMember> default_ensemble_grid() {
  return {{0.5, Geometry::kTwoDHV},
          {0.5, Geometry::kTwoDHVDiag},
          {1.0, Geometry::kTwoDHV},
          {1.0, Geometry::kTwoDHVDiag}};
}

Image ensemble_denoise(const Image& noisy, double sigma,
                       const std::vector<EnsembleMember>& grid,
                       const DenoiseOptions& base) {
  if (grid.empty()) throw std::invalid_argument("ensemble_denoise: empty grid");
  std::vector<std::function<Image()>> jobs;
  for (const EnsembleMember& m : grid) {
    DenoiseOptions opts = base;
    opts.epsilon_scale = base.epsilon_scale * m.epsilon_scale;
    opts.geometry = m.geometry;
    opts.threads = 1;  // parallelism lives at the member level
    jobs.push_back([&noisy, sigma, opts]() { return denoise_image(noisy, sigma, opts); });
  }
  const auto results = run_jobs(jobs, base.threads);
  Image out(noisy.h, noisy.w);
  for (const Image& r : results) out.pixels += r.pixels;  // fixed member order
  out.pixels /= static_cast<double>(results.size());
  return out;
}

namespace {

// 4-connected components of the non-boundary set; boundary stays label 0.
std::vector<int> label_components(const Image& boundary, int* count) {
  const int h = boundary.h, w = boundary.w;
  std::vector<int> labels(h * w, 0);
  int next = 0;
  for (int start = 0; start < h * w; ++start) {
    if (boundary.pixels[start] != 0.0 || labels[start] != 0) continue;
    ++next;
    std::queue<int> frontier;
    frontier.push(start);
    labels[start] = next;
    while (!frontier.empty()) {
      const int p = frontier.front();
      frontier.pop();
      const int r = p / w, c = p % w;
      const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (const auto& [nr, nc] : nbr) {
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const int q = nr * w + nc;
        if (boundary.pixels[q] != 0.0 || labels[q] != 0) continue;
        labels[q] = next;
        frontier.push(q);
      }
    }
  }
  if (count) *count = next;
  return labels;
}

}  // namespace

SegmentationResult segment_image(const Image& img, const SegmentOptions& opts) {
  SegmentationResult res;
  res.piecewise_version =
      ensemble_denoise(img, opts.sigma, default_ensemble_grid(), opts.denoise);

  const Image grad = gradient_map(res.piecewise_version);
  const double gmax = grad.pixels.maxCoeff();
  res.threshold_used = opts.rel_threshold * gmax;
  res.boundary_map = Image(img.h, img.w);
  for (int i = 0; i < img.size(); ++i)
    res.boundary_map.pixels[i] =
        (gmax > 0.0 && grad.pixels[i] > res.threshold_used) ? 255.0 : 0.0;

  int count = 0;
  std::vector<int> labels = label_components(res.boundary_map, &count);

  // Merge regions below min_region into the most similar neighboring region
  // by mean intensity; adjacency passes through boundary pixels.
  const int h = img.h, w = img.w;
  const Eigen::VectorXd& pix = res.piecewise_version.pixels;
  bool merged = true;
  while (merged) {
    merged = false;
    std::map<int, std::pair<double, int>> stats;  // label -> (sum, count)
    for (int i = 0; i < h * w; ++i)
      if (labels[i] > 0) {
        auto& s = stats[labels[i]];
        s.first += pix[i];
        s.second += 1;
      }
    // adjacency via direct contact and via one boundary pixel
    std::map<int, std::vector<int>> neighbors;
    auto note = [&](int a, int b) {
      if (a > 0 && b > 0 && a != b) {
        neighbors[a].push_back(b);
        neighbors[b].push_back(a);
      }
    };
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int p = r * w + c;
        if (c + 1 < w) note(labels[p], labels[p + 1]);
        if (r + 1 < h) note(labels[p], labels[p + w]);
        if (labels[p] == 0) {
          std::vector<int> around;
          if (r > 0) around.push_back(labels[p - w]);
          if (r + 1 < h) around.push_back(labels[p + w]);
          if (c > 0) around.push_back(labels[p - 1]);
          if (c + 1 < w) around.push_back(labels[p + 1]);
          for (int a : around)
            for (int b : around) note(a, b);
        }
      }
    for (auto& [label, s] : stats) {
      if (s.second >= opts.min_region) continue;
      auto it = neighbors.find(label);
      if (it == neighbors.end() || it->second.empty()) continue;
      const double mean = s.first / s.second;
      int best = 0;
      double best_diff = 0.0;
      for (int nb : it->second) {
        const auto& ns = stats[nb];
        if (ns.second == 0) continue;
        const double diff = std::abs(ns.first / ns.second - mean);
        if (best == 0 || diff < best_diff || (diff == best_diff && nb < best)) {
          best = nb;
          best_diff = diff;
        }
      }
      if (best != 0) {
        for (int i = 0; i < h * w; ++i)
          if (labels[i] == label) labels[i] = best;
        merged = true;
        break;  // stats are stale; restart the scan
      }
    }
  }

  // compact label ids
  std::map<int, int> remap;
  for (int i = 0; i < h * w; ++i) {
    if (labels[i] == 0) continue;
    auto [it, fresh] = remap.emplace(labels[i], static_cast<int>(remap.size()) + 1);
    labels[i] = it->second;
    (void)fresh;
  }
  res.labels = std::move(labels);
  res.region_count = static_cast<int>(remap.size());
  return res;
}

}  // namespace ovp
