#include <Eigen/Dense>

#include "doctest.h"
#include "ovp/analysis_operator.hpp"
#include "ovp/heaviside.hpp"
#include "ovp/measurement.hpp"
#include "ovp/parameterization.hpp"
#include "ovp/rng.hpp"

using namespace ovp;

TEST_CASE("polynomial parameterization weights") {
  const auto p = build_poly_parameterization(3, 1, Scaling::kSample);
  REQUIRE(p.count() == 2);
  CHECK(p.weights[0].isApprox(Eigen::Vector3d(1, 1, 1)));
  CHECK(p.weights[1].isApprox(Eigen::Vector3d(1, 2, 3)));

  const auto dc = build_poly_parameterization(4, 0, Scaling::kSample);
  REQUIRE(dc.count() == 1);
  CHECK(dc.weights[0].isApprox(Eigen::Vector4d(1, 1, 1, 1)));

  const auto nrm = build_poly_parameterization(3, 2, Scaling::kNormalized);
  REQUIRE(nrm.count() == 3);
  CHECK(nrm.weights[1].isApprox(Eigen::Vector3d(1.0 / 3, 2.0 / 3, 1.0), 1e-12));
  CHECK(nrm.weights[2].isApprox(Eigen::Vector3d(1.0 / 9, 4.0 / 9, 1.0), 1e-12));

  CHECK_THROWS_AS(build_poly_parameterization(1, 1, Scaling::kSample),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_poly_parameterization(4, -1, Scaling::kSample),
                  std::invalid_argument);
}

TEST_CASE("planar parameterization weights") {
  const auto p = build_planar_parameterization(2, 3);
  REQUIRE(p.count() == 3);
  Eigen::VectorXd dc(6), col(6), row(6);
  dc << 1, 1, 1, 1, 1, 1;
  col << 1, 2, 3, 1, 2, 3;
  row << 1, 1, 1, 2, 2, 2;
  CHECK(p.weights[0].isApprox(dc));
  CHECK(p.weights[1].isApprox(col));
  CHECK(p.weights[2].isApprox(row));

  const auto q = build_planar_parameterization(2, 2);
  Eigen::VectorXd col22(4);
  col22 << 1, 2, 1, 2;
  CHECK(q.weights[1].isApprox(col22));

  const auto r = build_planar_parameterization(3, 2);
  Eigen::VectorXd row32(6);
  row32 << 1, 1, 2, 2, 3, 3;
  CHECK(r.weights[2].isApprox(row32));

  CHECK_THROWS_AS(build_planar_parameterization(1, 5), std::invalid_argument);
}

TEST_CASE("1D difference operator") {
  const auto op = dif_operator(Geometry::kOneD, 4);
  CHECK(op.rows == 3);
  CHECK(op.cols == 4);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  CHECK(op.apply(ones).norm() == 0.0);
  Eigen::VectorXd step(4);
  step << 0, 0, 1, 1;
  Eigen::VectorXd expect(3);
  expect << 0, -1, 0;
  CHECK(op.apply(step).isApprox(expect));
  for (const auto& row : op.entries) CHECK(row.size() == 2);
}

TEST_CASE("2D difference operator geometry") {
  const auto op = dif_operator(Geometry::kTwoDHV, 2, 2);
  CHECK(op.rows == 4);  // h(w-1) + (h-1)w
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 3.25);
  CHECK(op.apply(flat).norm() == 0.0);

  const auto diag = dif_operator(Geometry::kTwoDHVDiag, 3, 4);
  CHECK(diag.rows == 3 * 3 + 2 * 4 + 2 * 2 * 3);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(12, -7.0);
  CHECK(diag.apply(c).norm() == 0.0);
}

TEST_CASE("piecewise constant vectors have one difference row per jump") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 10 + static_cast<int>(rng.uniform_below(30));
    Eigen::VectorXd v(d);
    double level = rng.uniform(-1, 1);
    int jumps = 0;
    v[0] = level;
    for (int i = 1; i < d; ++i) {
      if (rng.uniform01() < 0.2) {
        level += 1.0 + rng.uniform01();
        ++jumps;
      }
      v[i] = level;
    }
    const auto op = dif_operator(Geometry::kOneD, d);
    const Eigen::VectorXd y = op.apply(v);
    int nnz = 0;
    for (int i = 0; i < y.size(); ++i) nnz += y[i] != 0.0 ? 1 : 0;
    CHECK(nnz == jumps);
  }
}

TEST_CASE("gaussian measurement columns are unit norm and seeded") {
  const auto M = gaussian_measurement(10, 20, 7);
  for (int j = 0; j < 20; ++j)
    CHECK(std::abs(M.matrix.col(j).norm() - 1.0) <= 1e-12);
  const auto M2 = gaussian_measurement(10, 20, 7);
  CHECK(M.matrix == M2.matrix);
  const auto M3 = gaussian_measurement(10, 20, 8);
  CHECK(M.matrix != M3.matrix);

  const auto I = MeasurementOperator::identity(5);
  Eigen::VectorXd v(5);
  v << 1, -2, 3, -4, 5;
  CHECK(I.apply(v) == v);

  CHECK_THROWS_AS(gaussian_measurement(0, 5, 1), std::invalid_argument);
}

TEST_CASE("adjoint consistency for all operator kinds") {
  Rng rng(3);
  auto rand_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
  };
  std::vector<MeasurementOperator> ops;
  ops.push_back(MeasurementOperator::identity(15));
  ops.push_back(gaussian_measurement(9, 15, 5));
  Eigen::MatrixXd dm(4, 15);
  for (int i = 0; i < dm.size(); ++i) dm(i / 15, i % 15) = rng.normal();
  ops.push_back(MeasurementOperator::dense(dm));
  for (const auto& M : ops) {
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::VectorXd u = rand_vec(M.d);
      const Eigen::VectorXd v = rand_vec(M.m);
      const double a = M.apply(u).dot(v);
      const double b = u.dot(M.apply_transpose(v));
      CHECK(std::abs(a - b) <= 1e-10 * (std::abs(a) + 1.0));
    }
  }
}

TEST_CASE("heaviside dictionary inverts the difference operator") {
  for (int d : {3, 16, 512}) {
    const HeavisideDictionary hs(d);
    const auto dif = dif_operator(Geometry::kOneD, d);
    const Eigen::MatrixXd prod = dif.dense() * hs.matrix_without_dc();
    CHECK(prod == Eigen::MatrixXd::Identity(d - 1, d - 1));
  }
}

TEST_CASE("difference operators annihilate the planar null space") {
  const auto param = build_planar_parameterization(4, 5);
  for (Geometry g : {Geometry::kTwoDHV, Geometry::kTwoDHVDiag}) {
    const auto op = dif_operator(g, 4, 5);
    CHECK(op.apply(param.weights[0]).norm() == 0.0);  // constants
  }
}

TEST_CASE("planar DC and row ramp are annihilated by second differences") {
  const int h = 5, w = 6;
  const auto param = build_planar_parameterization(h, w);
  auto second_diff_rows = [&](const Eigen::VectorXd& v) {
    double worst = 0.0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c + 2 < w; ++c)
        worst = std::max(worst, std::abs(v[r * w + c] - 2.0 * v[r * w + c + 1] +
                                         v[r * w + c + 2]));
    return worst;
  };
  CHECK(second_diff_rows(param.weights[0]) == 0.0);  // DC
  CHECK(second_diff_rows(param.weights[1]) == 0.0);  // within-row ramp
}

TEST_CASE("normalize_weights rescales to unit max and reports ratios") {
  const auto p = build_poly_parameterization(10, 2, Scaling::kSample);
  std::vector<double> ratios;
  const auto q = normalize_weights(p, &ratios);
  CHECK(ratios[0] == 1.0);
  CHECK(ratios[1] == 10.0);
  CHECK(ratios[2] == 100.0);
  CHECK(q.weights[2][9] == doctest::Approx(1.0));
  // same model: sum_i X_i b_i == sum_i X^_i (b_i * ratio_i)
  std::vector<Eigen::VectorXd> b(3, Eigen::VectorXd::Random(10));
  std::vector<Eigen::VectorXd> bn = b;
  for (int i = 0; i < 3; ++i) bn[i] = b[i] * ratios[i];
  CHECK(p.synthesize(b).isApprox(q.synthesize(bn), 1e-12));
}
