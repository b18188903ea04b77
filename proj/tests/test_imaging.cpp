#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "ovp/imaging.hpp"
#include "ovp/report.hpp"
#include "ovp/metrics.hpp"
#include "ovp/rng.hpp"
#include "ovp/signal_gen.hpp"

using namespace ovp;

namespace {

Image planar_halves(int h, int w) {
  Image img(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      img.at(r, c) = r + c < (h + w) / 2 ? 60.0 + 0.9 * r + 0.4 * c
                                         : 185.0 - 0.6 * r + 0.1 * c;
  return img;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("gradient map cases") {
  Image flat(5, 7);
  flat.pixels.setConstant(42.0);
  CHECK(gradient_map(flat).pixels.norm() == 0.0);

  Image step(4, 6);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c) step.at(r, c) = c < 3 ? 0.0 : 5.0;
  const Image g = gradient_map(step);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 6; ++c)
      CHECK(g.at(r, c) == (c == 2 ? 5.0 : 0.0));

  // random image against a direct stencil
  Rng rng(8);
  Image rand_img(6, 5);
  for (int i = 0; i < rand_img.size(); ++i) rand_img.pixels[i] = rng.uniform(0, 255);
  const Image gm = gradient_map(rand_img);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 5; ++c) {
      double want = 0.0;
      if (c + 1 < 5) want += std::abs(rand_img.at(r, c + 1) - rand_img.at(r, c));
      if (r + 1 < 6) want += std::abs(rand_img.at(r + 1, c) - rand_img.at(r, c));
      CHECK(gm.at(r, c) == want);
    }
}

TEST_CASE("pgm round trip") {
  Rng rng(12);
  Image img(9, 13);
  for (int i = 0; i < img.size(); ++i)
    img.pixels[i] = static_cast<double>(rng.uniform_below(256));
  for (bool binary : {true, false}) {
    const auto path = temp_file(binary ? "ovp_t1.pgm" : "ovp_t2.pgm");
    write_pgm(path.string(), img, binary);
    const Image back = read_pgm(path.string());
    REQUIRE(back.h == img.h);
    REQUIRE(back.w == img.w);
    CHECK(back.pixels == img.pixels);
    std::filesystem::remove(path);
  }
}

TEST_CASE("pgm parse errors carry position information") {
  const auto path = temp_file("ovp_bad.pgm");
  {
    FILE* f = fopen(path.string().c_str(), "wb");
    fputs("P4\n2 2\n255\n", f);
    fclose(f);
  }
  CHECK_THROWS_WITH_AS(read_pgm(path.string()),
                       doctest::Contains("bad magic"), ParseError);
  {
    FILE* f = fopen(path.string().c_str(), "wb");
    fputs("P2\n# comment\n2 2\n255\n1 2\n3\n", f);
    fclose(f);
  }
  CHECK_THROWS_AS(read_pgm(path.string()), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("denoise with sigma 0 reproduces a piecewise planar image") {
  const Image img = planar_halves(20, 20);
  const Image out = denoise_image(img, 0.0);
  CHECK((out.pixels - img.pixels).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("denoise rejects bad input") {
  Image img = planar_halves(8, 8);
  img.pixels[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(denoise_image(img, 5.0), std::invalid_argument);
  Image ok = planar_halves(8, 8);
  CHECK_THROWS_AS(denoise_image(ok, -1.0), std::invalid_argument);
}

TEST_CASE("denoising a constant image averages the noise away") {
  const int n = 24;
  Image img(n, n);
  img.pixels.setConstant(100.0);
  const double sigma = 8.0;
  Image noisy = img;
  noisy.pixels = add_noise(img.pixels, sigma, 5);
  // the solver fits up to the residual bound exactly, so hand it the realized
  // noise energy; what survives is the noise leaking into the three planar
  // modes. The mean deviation behaves like an average of h*w samples; the
  // ramp modes have about 3x leverage at the corners, plus the bound slack.
  const double sigma_eff = (noisy.pixels - img.pixels).norm() / n;
  const Image out = denoise_image(noisy, sigma_eff);
  const double per_pixel = 3.0 * sigma / n;
  CHECK(std::abs(out.pixels.mean() - 100.0) <= per_pixel);
  for (int i = 0; i < out.size(); ++i)
    CHECK(std::abs(out.pixels[i] - 100.0) <= 4.0 * per_pixel);
}

TEST_CASE("denoising is equivariant to intensity shifts") {
  const int n = 16;
  Image noisy(n, n);
  noisy.pixels = add_noise(planar_halves(n, n).pixels, 5.0, 77);
  DenoiseOptions opts;
  opts.clamp_lo = -1e9;  // disable clamping for the comparison
  opts.clamp_hi = 1e9;
  const Image base = denoise_image(noisy, 5.0, opts);
  Image shifted = noisy;
  shifted.pixels.array() += 30.0;
  const Image out = denoise_image(shifted, 5.0, opts);
  // equivariance up to the solver's residual-bound tolerance: the constant
  // direction is in the model, but both runs stop within tol of the bound
  CHECK((out.pixels - base.pixels - Eigen::VectorXd::Constant(n * n, 30.0))
            .cwiseAbs()
            .maxCoeff() <= 0.5);

  // with a zero bound the equality path makes the shift exact
  const Image clean = planar_halves(n, n);
  const Image a = denoise_image(clean, 0.0, opts);
  Image clean_shift = clean;
  clean_shift.pixels.array() += 12.0;
  const Image b = denoise_image(clean_shift, 0.0, opts);
  CHECK((b.pixels - a.pixels - Eigen::VectorXd::Constant(n * n, 12.0))
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
}

TEST_CASE("ensemble of identical runs equals the single run exactly") {
  // with sigma 0 every member interpolates the input, so the mean must too
  const Image img = planar_halves(16, 16);
  const Image out = ensemble_denoise(img, 0.0, default_ensemble_grid(), {});
  CHECK((out.pixels - img.pixels).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("single-member ensemble equals a plain denoise run") {
  const int n = 16;
  Image noisy(n, n);
  noisy.pixels = add_noise(planar_halves(n, n).pixels, 6.0, 3);
  DenoiseOptions base;
  const Image a = ensemble_denoise(noisy, 6.0, {{1.0, Geometry::kTwoDHV}}, base);
  DenoiseOptions single;
  single.geometry = Geometry::kTwoDHV;
  const Image b = denoise_image(noisy, 6.0, single);
  CHECK(a.pixels == b.pixels);
  CHECK_THROWS_AS(ensemble_denoise(noisy, 6.0, {}, base), std::invalid_argument);
  CHECK(default_ensemble_grid().size() == 4);
}

TEST_CASE("segmentation of a clean two-region image") {
  const Image img = planar_halves(24, 24);
  SegmentOptions opts;
  opts.sigma = 0.0;
  const auto seg = segment_image(img, opts);
  CHECK(seg.region_count == 2);
  // boundary pixels sit within 1 px of the true divide r + c = 24
  for (int r = 0; r < 24; ++r)
    for (int c = 0; c < 24; ++c)
      if (seg.boundary_map.at(r, c) != 0.0)
        CHECK(std::abs(r + c - 23.5) <= 1.5);
  // labels partition the non-boundary set
  for (int i = 0; i < img.size(); ++i) {
    if (seg.boundary_map.pixels[i] != 0.0)
      CHECK(seg.labels[i] == 0);
    else
      CHECK(seg.labels[i] > 0);
  }
}

TEST_CASE("constant image segments into one region with no boundary") {
  Image img(16, 16);
  img.pixels.setConstant(80.0);
  SegmentOptions opts;
  opts.sigma = 0.0;
  const auto seg = segment_image(img, opts);
  CHECK(seg.region_count == 1);
  CHECK(seg.boundary_map.pixels.norm() == 0.0);
  for (int l : seg.labels) CHECK(l == 1);
}

TEST_CASE("boundary f-score metric") {
  Image a(8, 8), b(8, 8);
  CHECK(boundary_f_score(a, b) == 1.0);  // both empty
  a.at(4, 4) = 255.0;
  CHECK(boundary_f_score(a, b) == 0.0);
  b.at(4, 5) = 255.0;  // within 1 px
  CHECK(boundary_f_score(a, b) == 1.0);
  Image far(8, 8);
  far.at(0, 0) = 255.0;
  CHECK(boundary_f_score(a, far) == 0.0);
}

TEST_CASE("large images go through tiling and stay accurate") {
  const Image img = planar_halves(140, 40);
  Image noisy = img;
  noisy.pixels = add_noise(img.pixels, 10.0, 9);
  DenoiseOptions opts;
  opts.tile_above = 64;
  opts.tile_size = 48;
  opts.tile_overlap = 8;
  const Image out = denoise_image(noisy, 10.0, opts);
  const double before = compute_metrics(img.pixels, noisy.pixels, 255.0).psnr;
  const double after = compute_metrics(img.pixels, out.pixels, 255.0).psnr;
  CHECK(after >= before + 5.0);
}
