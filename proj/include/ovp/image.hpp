#ifndef OVP_IMAGE_HPP_
#define OVP_IMAGE_HPP_

#include <Eigen/Dense>
#include <string>

namespace ovp {

// Grayscale image, row-major pixels, nominal intensity range 0..255.
struct Image {
  int h = 0;
  int w = 0;
  Eigen::VectorXd pixels;

  Image() = default;
  Image(int height, int width)
      : h(height), w(width), pixels(Eigen::VectorXd::Zero(height * width)) {}

  double& at(int r, int c) { return pixels[r * w + c]; }
  double at(int r, int c) const { return pixels[r * w + c]; }
  int size() const { return h * w; }
};

// PGM I/O: P5 (binary) and P2 (plain text), maxval up to 65535. Writing
// clamps and rounds intensities to 0..255 (the documented lossy step);
// write_pgm_raw keeps the given maxval for label maps.
Image read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Image& img, bool binary = true);
void write_pgm_raw(const std::string& path, const Image& img, int maxval,
                   bool binary = false);

// |horizontal difference| + |vertical difference| per pixel, zero-padded at
// the far edges.
Image gradient_map(const Image& img);

}  // namespace ovp

#endif
