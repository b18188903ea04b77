#include "ovp/parameterization.hpp"

#include <cmath>
#include <stdexcept>

namespace ovp {

Eigen::VectorXd Parameterization::synthesize(
    const std::vector<Eigen::VectorXd>& b) const {
  if (static_cast<int>(b.size()) != count())
    throw std::invalid_argument("synthesize: coefficient count mismatch");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < count(); ++i) {
    if (b[i].size() != dim)
      throw std::invalid_argument("synthesize: coefficient length mismatch");
    f.array() += weights[i].array() * b[i].array();
  }
  return f;
}

Parameterization build_poly_parameterization(int d, int degree, Scaling scaling) {
  if (d < 2) throw std::invalid_argument("poly parameterization needs d >= 2");
  if (degree < 0) throw std::invalid_argument("poly degree must be >= 0");
  Parameterization p;
  p.dim = d;
  p.kind = ParamKind::kPolynomial;
  p.scaling = scaling;
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) {
    const double coord = static_cast<double>(i + 1);
    x[i] = scaling == Scaling::kSample ? coord : coord / d;
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(d);
  p.weights.push_back(w);
  for (int j = 1; j <= degree; ++j) {
    w.array() *= x.array();
    p.weights.push_back(w);
  }
  return p;
}

Parameterization build_planar_parameterization(int h, int w, Scaling scaling) {
  return build_planar_poly_parameterization(h, w, 1, scaling);
}

Parameterization build_planar_poly_parameterization(int h, int w, int degree,
                                                    Scaling scaling) {
  if (h < 2 || w < 2)
    throw std::invalid_argument("planar parameterization needs h, w >= 2");
  if (degree < 1) throw std::invalid_argument("planar degree must be >= 1");
  Parameterization p;
  p.dim = h * w;
  p.kind = ParamKind::kPlanar2D;
  p.scaling = scaling;
  p.height = h;
  p.width = w;
  // Order: constant block first (DC, col, col^2, ...), then row, row*col, ...
  // Degree 1 yields [DC, col ramp, row ramp] as in the 2D model.
  for (int a = 0; a <= degree; ++a) {
    for (int b = 0; a + b <= degree; ++b) {
      Eigen::VectorXd wv(p.dim);
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const double rc = scaling == Scaling::kSample
                                ? static_cast<double>(r + 1)
                                : static_cast<double>(r + 1) / h;
          const double cc = scaling == Scaling::kSample
                                ? static_cast<double>(c + 1)
                                : static_cast<double>(c + 1) / w;
          wv[r * w + c] = std::pow(rc, a) * std::pow(cc, b);
        }
      }
      p.weights.push_back(wv);
    }
  }
  return p;
}

Parameterization normalize_weights(const Parameterization& p,
                                   std::vector<double>* ratios) {
  Parameterization q = p;
  q.scaling = Scaling::kNormalized;
  if (ratios) ratios->assign(p.weights.size(), 1.0);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const double m = p.weights[i].cwiseAbs().maxCoeff();
    if (m > 0.0 && m != 1.0) {
      q.weights[i] = p.weights[i] / m;
      if (ratios) (*ratios)[i] = m;
    }
  }
  return q;
}

}  // namespace ovp
