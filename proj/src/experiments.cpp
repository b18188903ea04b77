#include "ovp/experiments.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "ovp/analysis_operator.hpp"
#include "ovp/bgapn.hpp"
#include "ovp/metrics.hpp"
#include "ovp/projection.hpp"
#include "ovp/rng.hpp"
#include "ovp/sscosamp.hpp"

namespace ovp {

namespace {

// Runs the tasks on `threads` workers; every task writes only its own slot,
// so the results are identical for any thread count.
void run_tasks(const std::vector<std::function<void()>>& tasks, int threads) {
  if (threads <= 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      tasks[i]();
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(tasks.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

void aggregate(CellResult& cell, int d, double) {
  const int n = static_cast<int>(cell.trials.size());
  double sum = 0.0, sum2 = 0.0, err = 0.0;
  int wins = 0;
  for (const TrialRow& t : cell.trials) {
    sum += t.mse;
    sum2 += t.mse * t.mse;
    err += std::sqrt(t.mse * d);
    wins += t.success ? 1 : 0;
  }
  cell.mean_mse = sum / n;
  cell.std_mse = n > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n) / (n - 1)))
                       : 0.0;
  cell.mean_err = err / n;
  cell.rate = static_cast<double>(wins) / n;
}

enum class SweepMethod {
  kBgapn,
  kBgapnContinuity,
  kProjectionOracle,
  kProjectionOracleContinuity,
};

SweepMethod parse_sweep_method(const std::string& name) {
  if (name == "bgapn") return SweepMethod::kBgapn;
  if (name == "bgapn-continuity") return SweepMethod::kBgapnContinuity;
  if (name == "projection-oracle-k") return SweepMethod::kProjectionOracle;
  if (name == "projection-oracle-k-continuity")
    return SweepMethod::kProjectionOracleContinuity;
  throw std::invalid_argument("unknown sweep method: " + name);
}

}  // namespace

ExperimentResult denoising_sweep(const SignalSpec& spec,
                                 const std::vector<double>& sigmas,
                                 const std::vector<std::string>& methods,
                                 int trials, std::uint64_t seed, int threads) {
  if (sigmas.empty() || methods.empty() || trials < 1)
    throw std::invalid_argument("denoising_sweep: empty grid");
  std::vector<SweepMethod> parsed;
  for (const auto& m : methods) parsed.push_back(parse_sweep_method(m));

  ExperimentResult res;
  res.kind = "sweep";
  res.spec = spec;
  res.methods = methods;
  res.grid = sigmas;
  res.seed = seed;
  res.cells.assign(methods.size(),
                   std::vector<CellResult>(sigmas.size()));
  for (auto& row : res.cells)
    for (auto& cell : row) cell.trials.resize(trials);

  const AnalysisOperator omega = dif_operator(Geometry::kOneD, spec.d);
  const MeasurementOperator ident = MeasurementOperator::identity(spec.d);
  const double peak = spec.hi - spec.lo;

  std::vector<std::function<void()>> tasks;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    for (int trial = 0; trial < trials; ++trial) {
      tasks.push_back([&, si, trial]() {
        const double sigma = sigmas[si];
        const std::uint64_t stream =
            Rng::derive_seed(seed, si * 1000003ULL + trial);
        SignalSpec s = spec;
        s.seed = stream;
        const GeneratedSignal gen = gen_piecewise_poly(s);
        const Eigen::VectorXd noisy =
            add_noise(gen.signal, sigma, Rng::derive_seed(stream, 1));
        // the solvers assume the noise energy is known: hand them the
        // realized ||e||_2, not its expectation
        const double noise_norm = (noisy - gen.signal).norm();

        for (std::size_t mi = 0; mi < parsed.size(); ++mi) {
          Eigen::VectorXd estimate;
          switch (parsed[mi]) {
            case SweepMethod::kBgapn: {
              BGAPNConfig cfg;
              cfg.noise_norm = noise_norm;
              const Parameterization param = build_poly_parameterization(
                  spec.d, spec.degree, Scaling::kNormalized);
              estimate = bgapn(noisy, ident, param, omega, cfg).estimate;
              break;
            }
            case SweepMethod::kBgapnContinuity: {
              BGAPNConfig cfg;
              cfg.noise_norm = noise_norm;
              const Parameterization param = build_poly_parameterization(
                  spec.d, spec.degree, Scaling::kNormalized);
              estimate =
                  bgapn_continuity(noisy, ident, param, omega, cfg).estimate;
              break;
            }
            case SweepMethod::kProjectionOracle: {
              estimate =
                  optimal_projection(noisy, spec.k, spec.degree).fitted;
              break;
            }
            case SweepMethod::kProjectionOracleContinuity: {
              const PiecewisePolyFit fit =
                  optimal_projection(noisy, spec.k, spec.degree);
              estimate =
                  continuous_refit(noisy, fit.breakpoints, spec.degree).fitted;
              break;
            }
          }
          const Metrics m = compute_metrics(gen.signal, estimate, peak);
          TrialRow row;
          row.mse = m.mse;
          row.psnr = m.psnr;
          row.rel_err = m.rel_err;
          row.success = m.rel_err < res.success_tol;
          res.cells[mi][si].trials[trial] = row;
        }
      });
    }
  }
  run_tasks(tasks, threads);
  for (auto& mrow : res.cells)
    for (auto& cell : mrow) aggregate(cell, spec.d, peak);
  return res;
}

ExperimentResult cs_experiment(const SignalSpec& spec,
                               const std::vector<double>& m_over_d,
                               const std::vector<std::string>& methods,
                               int trials, double success_tol,
                               std::uint64_t seed, int threads) {
  if (m_over_d.empty() || methods.empty() || trials < 1)
    throw std::invalid_argument("cs_experiment: empty grid");
  for (double r : m_over_d)
    if (!(r > 0.0 && r <= 1.0))
      throw std::invalid_argument("cs_experiment: m/d must lie in (0, 1]");
  for (const auto& m : methods)
    if (m != "sscosamp" && m != "bgapn")
      throw std::invalid_argument("unknown cs method: " + m);

  ExperimentResult res;
  res.kind = "cs";
  res.spec = spec;
  res.spec.continuous = false;  // the CS setup uses discontinuous signals
  res.methods = methods;
  res.grid = m_over_d;
  res.success_tol = success_tol;
  res.seed = seed;
  res.cells.assign(methods.size(), std::vector<CellResult>(m_over_d.size()));
  for (auto& row : res.cells)
    for (auto& cell : row) cell.trials.resize(trials);

  const AnalysisOperator omega = dif_operator(Geometry::kOneD, spec.d);

  std::vector<std::function<void()>> tasks;
  for (std::size_t gi = 0; gi < m_over_d.size(); ++gi) {
    for (int trial = 0; trial < trials; ++trial) {
      tasks.push_back([&, gi, trial]() {
        const int m = std::max(
            1, std::min(spec.d, static_cast<int>(
                                    std::lround(m_over_d[gi] * spec.d))));
        const std::uint64_t stream =
            Rng::derive_seed(seed, gi * 1000003ULL + trial);
        SignalSpec s = res.spec;
        s.seed = stream;
        GeneratedSignal gen = gen_piecewise_poly(s);
        const double nrm = gen.signal.norm();
        gen.signal /= nrm;  // unit-norm signals in the CS setup
        const MeasurementOperator M =
            gaussian_measurement(m, spec.d, Rng::derive_seed(stream, 1));
        const Eigen::VectorXd g = M.apply(gen.signal);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          Eigen::VectorXd estimate;
          if (methods[mi] == "sscosamp") {
            SSCoSaMPConfig cfg;
            cfg.k = spec.k;
            cfg.degree = spec.degree;
            estimate = sscosamp(g, M, cfg).estimate;
          } else {
            BGAPNConfig cfg;
            cfg.noise_norm = 0.0;
            const Parameterization param = build_poly_parameterization(
                spec.d, spec.degree, Scaling::kNormalized);
            estimate = bgapn(g, M, param, omega, cfg).estimate;
          }
          const Metrics met = compute_metrics(gen.signal, estimate, 1.0);
          TrialRow row;
          row.mse = met.mse;
          row.psnr = met.psnr;
          row.rel_err = met.rel_err;
          row.success = met.rel_err < success_tol;
          res.cells[mi][gi].trials[trial] = row;
        }
      });
    }
  }
  run_tasks(tasks, threads);
  for (auto& mrow : res.cells)
    for (auto& cell : mrow) aggregate(cell, spec.d, 1.0);
  return res;
}

double estimate_pn_rip(const MeasurementOperator& M, int degree, int k,
                       int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("estimate_pn_rip: trials >= 1");
  double delta = 0.0;
  for (int t = 0; t < trials; ++t) {
    SignalSpec spec;
    spec.d = M.d;
    spec.k = k;
    spec.degree = degree;
    spec.continuous = false;
    spec.seed = Rng::derive_seed(seed, t);
    GeneratedSignal gen = gen_piecewise_poly(spec);
    gen.signal /= gen.signal.norm();
    delta = std::max(delta, std::abs(M.apply(gen.signal).squaredNorm() - 1.0));
  }
  return delta;
}

}  // namespace ovp
