#include "ovp/image.hpp"

#include "ovp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ovp {

namespace {

struct PgmParser {
  std::ifstream in;
  std::string path;
  int line = 1;

  explicit PgmParser(const std::string& p)
      : in(p, std::ios::binary), path(p) {
    if (!in) throw ParseError("cannot open " + p);
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
  }

  // skips whitespace and '#' comments, tracking the line number
  void skip_space() {
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string dummy;
        std::getline(in, dummy);
        ++line;
      } else if (c == '\n') {
        in.get();
        ++line;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        in.get();
      } else {
        return;
      }
    }
  }

  int next_int() {
    skip_space();
    int v = 0;
    if (!(in >> v)) fail("expected integer");
    return v;
  }
};

}  // namespace

Image read_pgm(const std::string& path) {
  PgmParser p(path);
  std::string magic(2, '\0');
  p.in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P2") p.fail("bad magic, want P5 or P2");
  const bool binary = magic == "P5";
  const int w = p.next_int();
  const int h = p.next_int();
  const int maxval = p.next_int();
  if (w < 1 || h < 1) p.fail("bad dimensions");
  if (maxval < 1 || maxval > 65535) p.fail("bad maxval");
  Image img(h, w);
  if (binary) {
    if (maxval > 255) p.fail("binary maxval > 255 unsupported");
    p.in.get();  // single whitespace after maxval
    std::string buf(static_cast<std::size_t>(w) * h, '\0');
    p.in.read(buf.data(), buf.size());
    if (p.in.gcount() != static_cast<std::streamsize>(buf.size()))
      p.fail("truncated pixel data");
    for (int i = 0; i < img.size(); ++i)
      img.pixels[i] = static_cast<unsigned char>(buf[i]);
  } else {
    for (int i = 0; i < img.size(); ++i) {
      const int v = p.next_int();
      if (v < 0 || v > maxval) p.fail("pixel out of range");
      img.pixels[i] = v;
    }
  }
  return img;
}

namespace {

int quantize(double v) {
  const double r = std::nearbyint(v);
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<int>(r);
}

}  // namespace

void write_pgm(const std::string& path, const Image& img, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (binary ? "P5" : "P2") << "\n" << img.w << " " << img.h << "\n255\n";
  if (binary) {
    std::string buf(img.size(), '\0');
    for (int i = 0; i < img.size(); ++i)
      buf[i] = static_cast<char>(static_cast<unsigned char>(quantize(img.pixels[i])));
    out.write(buf.data(), buf.size());
  } else {
    for (int r = 0; r < img.h; ++r) {
      for (int c = 0; c < img.w; ++c)
        out << quantize(img.at(r, c)) << (c + 1 < img.w ? " " : "");
      out << "\n";
    }
  }
}

void write_pgm_raw(const std::string& path, const Image& img, int maxval,
                   bool binary) {
  if (maxval < 1 || maxval > 65535)
    throw std::invalid_argument("write_pgm_raw: bad maxval");
  if (binary && maxval > 255)
    throw std::invalid_argument("write_pgm_raw: binary needs maxval <= 255");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << (binary ? "P5" : "P2") << "\n"
      << img.w << " " << img.h << "\n"
      << maxval << "\n";
  auto clampi = [maxval](double v) {
    const long r = std::lround(v);
    return static_cast<int>(std::min<long>(std::max<long>(r, 0), maxval));
  };
  if (binary) {
    std::string buf(img.size(), '\0');
    for (int i = 0; i < img.size(); ++i)
      buf[i] = static_cast<char>(static_cast<unsigned char>(clampi(img.pixels[i])));
    out.write(buf.data(), buf.size());
  } else {
    for (int r = 0; r < img.h; ++r) {
      for (int c = 0; c < img.w; ++c)
        out << clampi(img.at(r, c)) << (c + 1 < img.w ? " " : "");
      out << "\n";
    }
  }
}

Image gradient_map(const Image& img) {
  Image out(img.h, img.w);
  for (int r = 0; r < img.h; ++r)
    for (int c = 0; c < img.w; ++c) {
      double m = 0.0;
      if (c + 1 < img.w) m += std::abs(img.at(r, c + 1) - img.at(r, c));
      if (r + 1 < img.h) m += std::abs(img.at(r + 1, c) - img.at(r, c));
      out.at(r, c) = m;
    }
  return out;
}

}  // namespace ovp
