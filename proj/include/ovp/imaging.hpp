#ifndef OVP_IMAGING_HPP_
#define OVP_IMAGING_HPP_

#include <vector>

#include "ovp/analysis_operator.hpp"
#include "ovp/bgapn.hpp"
#include "ovp/image.hpp"

namespace ovp {

struct DenoiseOptions {
  Geometry geometry = Geometry::kTwoDHV;
  double epsilon_scale = 1.0;  // multiplies the solver's default threshold
  int rows_per_iter = 0;       // 0 = solver default
  double gamma = 0.0;          // continuity weight, 0 for the plain iteration
  int degree = 1;              // planar overparameterization degree
  int max_iters = 50;
  double clamp_lo = 0.0;
  double clamp_hi = 255.0;
  int tile_above = 128;  // images larger than this are processed in tiles
  int tile_size = 64;
  int tile_overlap = 8;
  int threads = 1;  // concurrent ensemble members / tiles
};

// One BGAPN run with the planar parameterization and the 2D difference
// operator; noise_norm = sigma * sqrt(h*w), output clamped to the nominal
// range. Images above `tile_above` pixels a side are denoised in overlapping
// tiles whose results are averaged.
Image denoise_image(const Image& noisy, double sigma,
                    const DenoiseOptions& opts = {});

struct EnsembleMember {
  double epsilon_scale;
  Geometry geometry;
};

// The fixed default grid: {0.5, 1.0} x {hv, hv+diag} = 4 runs.
std::vector<EnsembleMember> default_ensemble_grid();

// Pixelwise mean of denoise_image over the parameter grid.
Image ensemble_denoise(const Image& noisy, double sigma,
                       const std::vector<EnsembleMember>& grid,
                       const DenoiseOptions& base = {});

struct SegmentOptions {
  double sigma = 0.0;          // assumed noise level for the denoising stage
  double rel_threshold = 0.1;  // boundary threshold relative to max gradient
  int min_region = 16;         // regions smaller than this merge into a neighbor
  DenoiseOptions denoise;
};

struct SegmentationResult {
  Image piecewise_version;
  Image boundary_map;       // 0 / 255
  std::vector<int> labels;  // per pixel; boundary pixels are 0
  int region_count = 0;
  double threshold_used = 0.0;
};

// Piecewise-planar version via the denoising ensemble, boundary map by
// thresholded gradients, then 4-connected labeling with small-region merging.
SegmentationResult segment_image(const Image& img, const SegmentOptions& opts);

}  // namespace ovp

#endif
