#include "doctest.h"
#include "ovp/experiments.hpp"
#include "ovp/metrics.hpp"
#include "ovp/projection.hpp"
#include "ovp/rng.hpp"

using namespace ovp;

TEST_CASE("generated signals meet their spec") {
  SignalSpec spec;
  spec.d = 300;
  spec.k = 6;
  spec.degree = 1;
  spec.continuous = true;
  spec.seed = 1;
  const auto gen = gen_piecewise_poly(spec);
  REQUIRE(gen.true_fit.breakpoints.size() == 6);
  CHECK(gen.signal.minCoeff() >= -1.0 - 1e-12);
  CHECK(gen.signal.maxCoeff() <= 1.0 + 1e-12);
  // continuity gap at each junction midpoint
  for (std::size_t s = 0; s < gen.true_fit.breakpoints.size(); ++s) {
    const double xstar = gen.true_fit.breakpoints[s] + 0.5;
    auto eval = [&](const Eigen::VectorXd& c) {
      double acc = 0.0;
      for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
        acc = acc * xstar + c[j];
      return acc;
    };
    CHECK(std::abs(eval(gen.true_fit.coeffs[s]) -
                   eval(gen.true_fit.coeffs[s + 1])) <= 1e-9);
  }
  // model membership: the exact projection reproduces it
  const auto proj = optimal_projection(gen.signal, spec.k, spec.degree);
  CHECK(proj.sse <= 1e-12);

  SignalSpec flat = spec;
  flat.k = 0;
  const auto single = gen_piecewise_poly(flat);
  CHECK(single.true_fit.breakpoints.empty());

  SignalSpec bad = spec;
  bad.d = 10;
  bad.k = 6;
  CHECK_THROWS_AS(gen_piecewise_poly(bad), std::invalid_argument);
}

TEST_CASE("generated breakpoints respect the minimum segment length") {
  for (int rep = 0; rep < 20; ++rep) {
    SignalSpec spec;
    spec.d = 60;
    spec.k = 4;
    spec.degree = 2;
    spec.continuous = false;
    spec.seed = 100 + rep;
    const auto gen = gen_piecewise_poly(spec);
    const int min_seg = 2 * (spec.degree + 1);
    int prev = 0;
    for (int b : gen.true_fit.breakpoints) {
      CHECK(b - prev >= min_seg);
      prev = b;
    }
    CHECK(spec.d - prev >= min_seg);
  }
}

TEST_CASE("add_noise behavior") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(10000);
  CHECK(add_noise(zero, 0.0, 1) == zero);
  const Eigen::VectorXd a = add_noise(zero, 0.1, 7);
  const Eigen::VectorXd b = add_noise(zero, 0.1, 7);
  CHECK(a == b);
  const double std_hat = std::sqrt(a.squaredNorm() / a.size());
  CHECK(std_hat == doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("metrics reference values") {
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  const Metrics same = compute_metrics(x, x, 255.0);
  CHECK(same.mse == 0.0);
  CHECK(same.psnr == 99.0);
  CHECK(same.rel_err == 0.0);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd unit(4);
  unit << 0.5, 0.5, 0.5, 0.5;
  const Metrics flagged = compute_metrics(zero, unit, 255.0);
  CHECK(flagged.rel_is_absolute);
  CHECK(flagged.rel_err == doctest::Approx(1.0));

  Eigen::VectorXd img = Eigen::VectorXd::Constant(100, 50.0);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(100, 60.0);
  const Metrics shifted = compute_metrics(img, off, 255.0);
  CHECK(shifted.mse == doctest::Approx(100.0));
  CHECK(shifted.psnr == doctest::Approx(28.1308).epsilon(1e-3));

  Eigen::VectorXd shorter = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(compute_metrics(x, shorter, 255.0), std::invalid_argument);
}

TEST_CASE("spearman and log-log slope helpers") {
  Eigen::VectorXd x(5), y(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 4, 9, 16, 30;
  CHECK(spearman_rho(x, y) == doctest::Approx(1.0));
  y << 30, 16, 9, 4, 2;
  CHECK(spearman_rho(x, y) == doctest::Approx(-1.0));
  Eigen::VectorXd p(4), q(4);
  p << 1, 2, 4, 8;
  for (int i = 0; i < 4; ++i) q[i] = 3.0 * p[i] * p[i];
  CHECK(loglog_slope(p, q) == doctest::Approx(2.0));
}

TEST_CASE("rip estimator reference values") {
  const auto I = MeasurementOperator::identity(60);
  CHECK(estimate_pn_rip(I, 1, 3, 5, 1) <= 1e-12);
  const auto twice = MeasurementOperator::dense(
      2.0 * Eigen::MatrixXd::Identity(60, 60));
  CHECK(estimate_pn_rip(twice, 1, 3, 5, 1) == doctest::Approx(3.0));
}

TEST_CASE("rip estimate decreases with more measurements (median trend)") {
  const int d = 100;
  std::vector<double> medians;
  for (int m : {40, 60, 80}) {
    std::vector<double> deltas;
    for (int draw = 0; draw < 10; ++draw) {
      const auto M = gaussian_measurement(m, d, 900 + draw);
      deltas.push_back(estimate_pn_rip(M, 1, 3, 20, 50 + draw));
    }
    std::sort(deltas.begin(), deltas.end());
    medians.push_back(0.5 * (deltas[4] + deltas[5]));
  }
  CHECK(medians[1] <= medians[0]);
  CHECK(medians[2] <= medians[1]);
}

TEST_CASE("denoising sweep smoke run is deterministic and sane") {
  SignalSpec spec;
  spec.d = 80;
  spec.k = 3;
  spec.degree = 1;
  spec.continuous = true;
  const std::vector<double> sigmas = {0.0, 0.1};
  const std::vector<std::string> methods = {"projection-oracle-k",
                                            "projection-oracle-k-continuity"};
  const auto a = denoising_sweep(spec, sigmas, methods, 3, 11, 1);
  const auto b = denoising_sweep(spec, sigmas, methods, 3, 11, 2);
  REQUIRE(a.cells.size() == 2);
  REQUIRE(a.cells[0].size() == 2);
  for (std::size_t m = 0; m < a.cells.size(); ++m)
    for (std::size_t s = 0; s < a.cells[m].size(); ++s) {
      CHECK(a.cells[m][s].mean_mse == b.cells[m][s].mean_mse);  // thread count
      for (std::size_t t = 0; t < a.cells[m][s].trials.size(); ++t)
        CHECK(a.cells[m][s].trials[t].mse == b.cells[m][s].trials[t].mse);
    }
  // sigma = 0 reproduces the signal
  CHECK(a.cells[0][0].mean_mse <= 1e-10);
  CHECK(a.cells[1][0].mean_mse <= 1e-10);
  // noise hurts
  CHECK(a.cells[0][1].mean_mse > a.cells[0][0].mean_mse);

  CHECK_THROWS_AS(denoising_sweep(spec, sigmas, {"nope"}, 3, 11, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(denoising_sweep(spec, {}, methods, 3, 11, 1),
                  std::invalid_argument);
}

TEST_CASE("cs experiment smoke run") {
  SignalSpec spec;
  spec.d = 50;
  spec.k = 2;
  spec.degree = 1;
  const std::vector<double> grid = {1.0};
  const auto res = cs_experiment(spec, grid, {"sscosamp", "bgapn"}, 5, 1e-4, 3, 2);
  for (std::size_t m = 0; m < res.cells.size(); ++m) {
    CHECK(res.cells[m][0].rate >= 0.0);
    CHECK(res.cells[m][0].rate <= 1.0);
    CHECK(res.cells[m][0].trials.size() == 5);
  }
  // at full sampling both methods should essentially always recover
  CHECK(res.cells[0][0].rate >= 0.8);
  CHECK(res.cells[1][0].rate >= 0.8);

  CHECK_THROWS_AS(cs_experiment(spec, {1.5}, {"bgapn"}, 3, 1e-4, 3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(cs_experiment(spec, grid, {"tv"}, 3, 1e-4, 3, 1),
                  std::invalid_argument);
}
