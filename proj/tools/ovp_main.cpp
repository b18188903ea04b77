// Command line front end: projection, 1D denoising, image pipelines and the
// experiment drivers. Every run writes a manifest.json sufficient to replay
// it bit-exactly with the `replay` command.
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ovp/bgapn.hpp"
#include "ovp/experiments.hpp"
#include "ovp/image.hpp"
#include "ovp/imaging.hpp"
#include "ovp/metrics.hpp"
#include "ovp/projection.hpp"
#include "ovp/report.hpp"
#include "ovp/rng.hpp"
#include "ovp/sscosamp.hpp"
#include "ovp/version.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace ovp;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunContext {
  std::vector<std::string> args;  // argv tail as invoked (or replayed)
  fs::path out;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  bool print_json = false;

  fs::path path(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }

  void finish(const std::string& command, const ordered_json& config,
              const ordered_json& report) {
    std::ofstream rep(out / "report.json");
    rep << report.dump(2) << "\n";
    outputs.push_back("report.json");

    ordered_json manifest;
    manifest["command"] = command;
    manifest["args"] = args;
    manifest["version"] = kVersion;
    manifest["prng"] = kPrngName;
    manifest["config"] = config;
    manifest["outputs"] = outputs;
    manifest["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start)
            .count();
    std::ofstream man(out / "manifest.json");
    man << manifest.dump(2) << "\n";
    if (print_json) std::cout << report.dump(2) << "\n";
  }
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo, hi, step;
    if (sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
      throw UsageError("bad grid '" + text + "', want lo:hi:step");
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw UsageError("empty grid '" + text + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Geometry parse_geometry(const std::string& name) {
  if (name == "hv") return Geometry::kTwoDHV;
  if (name == "hv-diag") return Geometry::kTwoDHVDiag;
  throw UsageError("unknown geometry '" + name + "', want hv or hv-diag");
}

ordered_json fit_to_json(const PiecewisePolyFit& fit) {
  ordered_json j;
  j["degree"] = fit.degree;
  j["scaling"] = fit.scaling == Scaling::kSample ? "sample" : "normalized";
  j["breakpoints"] = fit.breakpoints;
  ordered_json coeffs = ordered_json::array();
  for (const auto& c : fit.coeffs) {
    ordered_json seg = ordered_json::array();
    for (int i = 0; i < c.size(); ++i) seg.push_back(c[i]);
    coeffs.push_back(seg);
  }
  j["segment_coeffs"] = coeffs;
  j["sse"] = fit.sse;
  return j;
}

ordered_json metrics_to_json(const Metrics& m) {
  ordered_json j;
  j["mse"] = m.mse;
  j["psnr_db"] = m.psnr;
  j["rel_err"] = m.rel_err;
  j["rel_is_absolute"] = m.rel_is_absolute;
  return j;
}

void write_experiment_tables(RunContext& ctx, const ExperimentResult& res,
                             const std::string& grid_name) {
  {
    std::ofstream csv(ctx.path("results.csv"));
    csv << grid_name << ",method,mean_mse,std_mse,mean_err,rate\n";
    for (std::size_t g = 0; g < res.grid.size(); ++g)
      for (std::size_t m = 0; m < res.methods.size(); ++m) {
        const CellResult& cell = res.cells[m][g];
        csv << format_double(res.grid[g]) << "," << res.methods[m] << ","
            << format_double(cell.mean_mse) << ","
            << format_double(cell.std_mse) << ","
            << format_double(cell.mean_err) << "," << format_double(cell.rate)
            << "\n";
      }
  }
  {
    std::ofstream csv(ctx.path("trials.csv"));
    csv << grid_name << ",method,trial,mse,psnr_db,rel_err,success\n";
    for (std::size_t g = 0; g < res.grid.size(); ++g)
      for (std::size_t m = 0; m < res.methods.size(); ++m)
        for (std::size_t t = 0; t < res.cells[m][g].trials.size(); ++t) {
          const TrialRow& row = res.cells[m][g].trials[t];
          csv << format_double(res.grid[g]) << "," << res.methods[m] << ","
              << t << "," << format_double(row.mse) << ","
              << format_double(row.psnr) << "," << format_double(row.rel_err)
              << "," << (row.success ? 1 : 0) << "\n";
        }
  }
}

ordered_json experiment_report(const ExperimentResult& res,
                               const std::string& grid_name) {
  ordered_json rep;
  rep["kind"] = res.kind;
  rep[grid_name] = res.grid;
  rep["methods"] = res.methods;
  ordered_json cells = ordered_json::array();
  for (std::size_t m = 0; m < res.methods.size(); ++m)
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      ordered_json c;
      c["method"] = res.methods[m];
      c[grid_name] = res.grid[g];
      c["mean_mse"] = res.cells[m][g].mean_mse;
      c["std_mse"] = res.cells[m][g].std_mse;
      c["mean_err"] = res.cells[m][g].mean_err;
      c["rate"] = res.cells[m][g].rate;
      cells.push_back(c);
    }
  rep["cells"] = cells;
  return rep;
}

int run_cli(std::vector<std::string> args);

// ---------------------------------------------------------------------------

int cmd_project(RunContext& ctx, const std::string& in, int k, int n,
                bool continuous, const std::string& scaling_name) {
  const Scaling scaling =
      scaling_name == "normalized" ? Scaling::kNormalized : Scaling::kSample;
  const Eigen::VectorXd g = read_csv_signal(in);
  PiecewisePolyFit fit = optimal_projection(g, k, n, scaling);
  if (continuous) fit = continuous_refit(g, fit.breakpoints, n, scaling);
  write_csv_signal(ctx.path("fitted.csv").string(), fit.fitted);

  ordered_json config;
  config["in"] = in;
  config["k"] = k;
  config["n"] = n;
  config["continuous"] = continuous;
  config["scaling"] = scaling_name;
  ordered_json report = fit_to_json(fit);
  ctx.finish("project", config, report);
  return 0;
}

int cmd_denoise1d(RunContext& ctx, const std::string& in,
                  const std::string& method, int k, int n, double sigma,
                  double noise_norm, double gamma, double epsilon,
                  int max_iters, const std::string& reference,
                  std::uint64_t seed) {
  const Eigen::VectorXd g = read_csv_signal(in);
  const int d = static_cast<int>(g.size());

  RecoveryOutput out;
  if (method == "sscosamp") {
    SSCoSaMPConfig cfg;
    cfg.k = k;
    cfg.degree = n;
    if (epsilon >= 0) cfg.epsilon = epsilon;
    cfg.max_iters = max_iters;
    out = sscosamp(g, MeasurementOperator::identity(d), cfg);
  } else {
    BGAPNConfig cfg;
    cfg.noise_norm = noise_norm >= 0 ? noise_norm : sigma * std::sqrt(double(d));
    cfg.epsilon = epsilon;
    cfg.gamma = gamma;
    cfg.max_iters = max_iters;
    const auto param = build_poly_parameterization(d, n, Scaling::kNormalized);
    const auto omega = dif_operator(Geometry::kOneD, d);
    const auto ident = MeasurementOperator::identity(d);
    out = method == "bgapn-cont" ? bgapn_continuity(g, ident, param, omega, cfg)
                                 : bgapn(g, ident, param, omega, cfg);
  }

  write_csv_signal(ctx.path("recovered.csv").string(), out.estimate);
  for (std::size_t i = 0; i < out.coeff_vectors.size(); ++i)
    write_csv_signal(ctx.path("coeff_" + std::to_string(i) + ".csv").string(),
                     out.coeff_vectors[i]);

  ordered_json config;
  config["in"] = in;
  config["method"] = method;
  config["k"] = k;
  config["n"] = n;
  config["sigma"] = sigma;
  config["noise_norm"] = noise_norm;
  config["gamma"] = gamma;
  config["epsilon"] = epsilon;
  config["max_iters"] = max_iters;
  config["reference"] = reference;
  config["seed"] = seed;

  ordered_json report;
  report["method"] = method;
  report["jump_set"] = out.jump_set;
  report["iterations"] = out.iterations;
  report["converged"] = out.converged;
  report["bound_unmet"] = out.bound_unmet;
  report["residual_history"] = out.residual_history;
  if (!reference.empty()) {
    const Eigen::VectorXd ref = read_csv_signal(reference);
    const double peak = ref.maxCoeff() - ref.minCoeff();
    report["metrics"] =
        metrics_to_json(compute_metrics(ref, out.estimate, peak > 0 ? peak : 1.0));
    report["input_metrics"] =
        metrics_to_json(compute_metrics(ref, g, peak > 0 ? peak : 1.0));
  }
  ctx.finish("denoise1d", config, report);
  return out.bound_unmet ? 4 : 0;
}

int cmd_image_denoise(RunContext& ctx, const std::string& in, double sigma,
                      const std::string& geometry_name, int degree,
                      bool ensemble, double gamma, const std::string& reference,
                      int threads) {
  const Image noisy = read_pgm(in);
  DenoiseOptions opts;
  opts.geometry = parse_geometry(geometry_name);
  opts.degree = degree;
  opts.gamma = gamma;
  opts.threads = threads;
  const Image out = ensemble
                        ? ensemble_denoise(noisy, sigma, default_ensemble_grid(), opts)
                        : denoise_image(noisy, sigma, opts);
  write_pgm(ctx.path("denoised.pgm").string(), out);

  ordered_json config;
  config["in"] = in;
  config["sigma"] = sigma;
  config["geometry"] = geometry_name;
  config["degree"] = degree;
  config["ensemble"] = ensemble;
  config["gamma"] = gamma;
  config["reference"] = reference;
  ordered_json report;
  report["h"] = out.h;
  report["w"] = out.w;
  if (!reference.empty()) {
    const Image ref = read_pgm(reference);
    report["metrics"] = metrics_to_json(compute_metrics(ref.pixels, out.pixels));
    report["input_metrics"] =
        metrics_to_json(compute_metrics(ref.pixels, noisy.pixels));
  }
  ctx.finish("image-denoise", config, report);
  return 0;
}

int cmd_image_segment(RunContext& ctx, const std::string& in, double sigma,
                      double rel_threshold, int min_region, int threads) {
  const Image img = read_pgm(in);
  SegmentOptions opts;
  opts.sigma = sigma;
  opts.rel_threshold = rel_threshold;
  opts.min_region = min_region;
  opts.denoise.threads = threads;
  const SegmentationResult seg = segment_image(img, opts);

  write_pgm(ctx.path("piecewise.pgm").string(), seg.piecewise_version);
  write_pgm(ctx.path("boundary.pgm").string(), seg.boundary_map);
  Image labels(img.h, img.w);
  for (int i = 0; i < img.size(); ++i) labels.pixels[i] = seg.labels[i];
  write_pgm_raw(ctx.path("labels.pgm").string(), labels,
                std::max(1, seg.region_count), false);

  ordered_json config;
  config["in"] = in;
  config["sigma"] = sigma;
  config["rel_threshold"] = rel_threshold;
  config["min_region"] = min_region;
  ordered_json report;
  report["region_count"] = seg.region_count;
  report["threshold_used"] = seg.threshold_used;
  ctx.finish("image-segment", config, report);
  return 0;
}

int cmd_image_gradmap(RunContext& ctx, const std::string& in) {
  const Image img = read_pgm(in);
  write_pgm(ctx.path("gradmap.pgm").string(), gradient_map(img));
  ordered_json config;
  config["in"] = in;
  ordered_json report;
  report["h"] = img.h;
  report["w"] = img.w;
  ctx.finish("image-gradmap", config, report);
  return 0;
}

int cmd_experiment_sweep(RunContext& ctx, int d, int k, int n, bool continuous,
                         const std::string& sigmas_text,
                         const std::string& methods_text, int trials,
                         std::uint64_t seed, int threads) {
  SignalSpec spec;
  spec.d = d;
  spec.k = k;
  spec.degree = n;
  spec.continuous = continuous;
  const auto sigmas = parse_grid(sigmas_text);
  const auto methods = split_list(methods_text);
  if (methods.empty()) throw UsageError("--methods must name at least one method");
  const auto res = denoising_sweep(spec, sigmas, methods, trials, seed, threads);

  write_experiment_tables(ctx, res, "sigma");
  std::vector<PlotSeries> series;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    PlotSeries s;
    s.name = methods[m];
    for (std::size_t g = 0; g < sigmas.size(); ++g)
      s.y.push_back(res.cells[m][g].mean_mse);
    series.push_back(s);
  }
  write_svg_plot(ctx.path("plot.svg").string(), "Denoising sweep", "sigma",
                 "mean MSE", sigmas, series, true);

  ordered_json config;
  config["d"] = d;
  config["k"] = k;
  config["n"] = n;
  config["continuous"] = continuous;
  config["sigmas"] = sigmas_text;
  config["methods"] = methods_text;
  config["trials"] = trials;
  config["seed"] = seed;
  config["threads"] = threads;
  ctx.finish("experiment-sweep", config, experiment_report(res, "sigma"));
  return 0;
}

int cmd_experiment_cs(RunContext& ctx, int d, int k, int n,
                      const std::string& grid_text,
                      const std::string& methods_text, int trials,
                      double success_tol, std::uint64_t seed, int threads) {
  SignalSpec spec;
  spec.d = d;
  spec.k = k;
  spec.degree = n;
  spec.continuous = false;
  const auto grid = parse_grid(grid_text);
  const auto methods = split_list(methods_text);
  if (methods.empty()) throw UsageError("--methods must name at least one method");
  const auto res =
      cs_experiment(spec, grid, methods, trials, success_tol, seed, threads);

  write_experiment_tables(ctx, res, "m_over_d");
  std::vector<PlotSeries> series;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    PlotSeries s;
    s.name = methods[m];
    for (std::size_t g = 0; g < grid.size(); ++g)
      s.y.push_back(res.cells[m][g].rate);
    series.push_back(s);
  }
  write_svg_plot(ctx.path("plot.svg").string(), "CS recovery rate", "m/d",
                 "recovery rate", grid, series, false);

  ordered_json config;
  config["d"] = d;
  config["k"] = k;
  config["n"] = n;
  config["grid"] = grid_text;
  config["methods"] = methods_text;
  config["trials"] = trials;
  config["success_tol"] = success_tol;
  config["seed"] = seed;
  config["threads"] = threads;
  ctx.finish("experiment-cs", config, experiment_report(res, "m_over_d"));
  return 0;
}

int cmd_experiment_rip(RunContext& ctx, int d, int k, int n,
                       const std::string& mlist_text, int trials,
                       std::uint64_t seed, bool identity) {
  std::vector<double> deltas;
  std::vector<double> ms;
  if (identity) {
    ms.push_back(d);
    deltas.push_back(
        estimate_pn_rip(MeasurementOperator::identity(d), n, k, trials, seed));
  } else {
    for (double mv : parse_grid(mlist_text)) {
      const int m = static_cast<int>(mv);
      if (m < 1 || m > d) throw UsageError("--m-list entries must lie in [1, d]");
      ms.push_back(m);
      deltas.push_back(estimate_pn_rip(
          gaussian_measurement(m, d, Rng::derive_seed(seed, ms.size())), n, k,
          trials, Rng::derive_seed(seed, 1000 + ms.size())));
    }
  }
  {
    std::ofstream csv(ctx.path("results.csv"));
    csv << "m,delta_hat\n";
    for (std::size_t i = 0; i < ms.size(); ++i)
      csv << format_double(ms[i]) << "," << format_double(deltas[i]) << "\n";
  }
  write_svg_plot(ctx.path("plot.svg").string(), "Empirical restricted isometry",
                 "m", "delta_hat", ms, {{"delta_hat", deltas}}, false);

  ordered_json config;
  config["d"] = d;
  config["k"] = k;
  config["n"] = n;
  config["m_list"] = mlist_text;
  config["trials"] = trials;
  config["seed"] = seed;
  config["identity"] = identity;
  ordered_json report;
  report["m"] = ms;
  report["delta_hat"] = deltas;
  ctx.finish("experiment-rip", config, report);
  return 0;
}

int cmd_replay(const std::string& manifest_path, const std::string& new_out) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError("cannot open " + manifest_path);
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const std::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  if (!manifest.contains("args"))
    throw ParseError(manifest_path + ": no args to replay");
  std::vector<std::string> args =
      manifest["args"].get<std::vector<std::string>>();
  if (!new_out.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") {
        args[i + 1] = new_out;
        replaced = true;
      }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(new_out);
    }
  }
  return run_cli(args);
}

// ---------------------------------------------------------------------------

int run_cli(std::vector<std::string> args) {
  CLI::App app{"Piecewise polynomial signal and image recovery toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string in, out, reference, scaling = "sample", method,
              geometry = "hv", sigmas_text, methods_text, grid_text, mlist_text,
              manifest_path, replay_out;
  int k = 0, n = 1, d = 300, trials = 20, max_iters = 50, degree = 1,
      min_region = 16, threads = 2;
  double sigma = -1.0, noise_norm = -1.0, gamma = -1.0, epsilon = -1.0,
         success_tol = 1e-4, rel_threshold = 0.1;
  std::uint64_t seed = 1;
  bool continuous = false, discontinuous = false, ensemble = false,
       json_flag = false, identity = false;

  auto* project = app.add_subcommand("project", "Optimal piecewise polynomial fit");
  project->add_option("--in", in, "input signal CSV")->required();
  project->add_option("--k", k, "number of jumps")->required();
  project->add_option("--n", n, "polynomial degree");
  project->add_flag("--continuous", continuous, "continuity post-processing");
  project->add_option("--scaling", scaling, "sample|normalized coefficient convention");
  project->add_option("--out", out, "output directory")->required();
  project->add_flag("--json", json_flag, "print the report to stdout");

  auto* den1d = app.add_subcommand("denoise1d", "1D signal recovery");
  den1d->add_option("--in", in, "input signal CSV")->required();
  den1d->add_option("--method", method, "bgapn|bgapn-cont|sscosamp")->required();
  den1d->add_option("--k", k, "jump count (sscosamp)");
  den1d->add_option("--n", n, "polynomial degree");
  den1d->add_option("--sigma", sigma, "noise std (bgapn: bound sigma*sqrt(d))");
  den1d->add_option("--noise-norm", noise_norm, "residual bound ||e||_2");
  den1d->add_option("--gamma", gamma, "continuity weight (bgapn-cont)");
  den1d->add_option("--epsilon", epsilon, "stopping threshold");
  den1d->add_option("--max-iters", max_iters, "iteration cap");
  den1d->add_option("--reference", reference, "clean signal CSV for metrics");
  den1d->add_option("--seed", seed, "seed echoed into the manifest");
  den1d->add_option("--out", out, "output directory")->required();
  den1d->add_flag("--json", json_flag, "print the report to stdout");

  auto* image = app.add_subcommand("image", "image pipelines");
  image->require_subcommand(1);
  auto* imden = image->add_subcommand("denoise", "piecewise planar denoising");
  imden->add_option("--in", in, "input PGM")->required();
  imden->add_option("--sigma", sigma, "noise std on the 0..255 scale")->required();
  imden->add_option("--geometry", geometry, "hv|hv-diag difference operator");
  imden->add_option("--degree", degree, "overparameterization degree");
  imden->add_flag("--ensemble", ensemble, "average the default parameter grid");
  imden->add_option("--gamma", gamma, "continuity weight (0 = off)");
  imden->add_option("--reference", reference, "clean PGM for PSNR");
  imden->add_option("--threads", threads, "concurrent ensemble members / tiles");
  imden->add_option("--out", out, "output directory")->required();
  imden->add_flag("--json", json_flag, "print the report to stdout");

  auto* imseg = image->add_subcommand("segment", "boundary map + labels");
  imseg->add_option("--in", in, "input PGM")->required();
  imseg->add_option("--sigma", sigma, "assumed noise std");
  imseg->add_option("--rel-threshold", rel_threshold, "boundary threshold");
  imseg->add_option("--min-region", min_region, "merge regions below this size");
  imseg->add_option("--threads", threads, "concurrent ensemble members / tiles");
  imseg->add_option("--out", out, "output directory")->required();
  imseg->add_flag("--json", json_flag, "print the report to stdout");

  auto* imgrad = image->add_subcommand("gradmap", "gradient magnitude map");
  imgrad->add_option("--in", in, "input PGM")->required();
  imgrad->add_option("--out", out, "output directory")->required();
  imgrad->add_flag("--json", json_flag, "print the report to stdout");

  auto* experiment = app.add_subcommand("experiment", "experiment drivers");
  experiment->require_subcommand(1);
  auto* sweep = experiment->add_subcommand("sweep", "denoising sweep over sigma");
  sweep->add_option("--d", d, "signal length");
  sweep->add_option("--k", k, "jump count")->required();
  sweep->add_option("--n", n, "polynomial degree");
  sweep->add_flag("--discontinuous", discontinuous, "drop the continuity of signals");
  sweep->add_option("--sigmas", sigmas_text, "grid lo:hi:step or a,b,c")->required();
  sweep->add_option("--methods", methods_text, "comma list of methods")->required();
  sweep->add_option("--trials", trials, "trials per grid point");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_option("--out", out, "output directory")->required();
  sweep->add_flag("--json", json_flag, "print the report to stdout");

  auto* cs = experiment->add_subcommand("cs", "compressed sensing recovery rate");
  int d_cs = 100;  // desk-scale default; pass --d 300 for the full size
  cs->add_option("--d", d_cs, "signal length");
  cs->add_option("--k", k, "jump count")->required();
  cs->add_option("--n", n, "polynomial degree");
  cs->add_option("--grid", grid_text, "m/d grid lo:hi:step or a,b,c")->required();
  cs->add_option("--methods", methods_text, "comma list: sscosamp,bgapn")->required();
  cs->add_option("--trials", trials, "trials per grid point");
  cs->add_option("--success-tol", success_tol, "relative error for success");
  cs->add_option("--seed", seed, "master seed");
  cs->add_option("--threads", threads, "worker threads");
  cs->add_option("--out", out, "output directory")->required();
  cs->add_flag("--json", json_flag, "print the report to stdout");

  auto* rip = experiment->add_subcommand("rip", "empirical restricted isometry");
  rip->add_option("--d", d, "signal length");
  rip->add_option("--k", k, "jump count")->required();
  rip->add_option("--n", n, "polynomial degree");
  rip->add_option("--m-list", mlist_text, "measurement counts a,b,c");
  rip->add_flag("--identity", identity, "evaluate the identity operator");
  rip->add_option("--trials", trials, "random signals per operator");
  rip->add_option("--seed", seed, "master seed");
  rip->add_option("--out", out, "output directory")->required();
  rip->add_flag("--json", json_flag, "print the report to stdout");

  auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
  replay->add_option("manifest", manifest_path, "manifest.json path")->required();
  replay->add_option("--out", replay_out, "redirect outputs");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  }

  if (replay->parsed()) return cmd_replay(manifest_path, replay_out);

  RunContext ctx;
  ctx.args = args;
  ctx.out = out;
  ctx.print_json = json_flag;
  fs::create_directories(ctx.out);

  if (project->parsed())
    return cmd_project(ctx, in, k, n, continuous, scaling);
  if (den1d->parsed()) {
    if (method != "bgapn" && method != "bgapn-cont" && method != "sscosamp")
      throw UsageError("--method must be bgapn, bgapn-cont or sscosamp");
    if (method == "sscosamp" && den1d->count("--k") == 0)
      throw UsageError("--method sscosamp requires --k");
    if (method != "sscosamp" && sigma < 0 && noise_norm < 0)
      throw UsageError(method + " requires --sigma or --noise-norm");
    return cmd_denoise1d(ctx, in, method, k, n, sigma, noise_norm, gamma,
                         epsilon, max_iters, reference, seed);
  }
  if (imden->parsed())
    return cmd_image_denoise(ctx, in, sigma, geometry, degree, ensemble,
                             gamma < 0 ? 0.0 : gamma, reference, threads);
  if (imseg->parsed())
    return cmd_image_segment(ctx, in, sigma < 0 ? 0.0 : sigma, rel_threshold,
                             min_region, threads);
  if (imgrad->parsed()) return cmd_image_gradmap(ctx, in);
  if (sweep->parsed())
    return cmd_experiment_sweep(ctx, d, k, n, !discontinuous, sigmas_text,
                                methods_text, trials, seed, threads);
  if (cs->parsed())
    return cmd_experiment_cs(ctx, d_cs, k, n, grid_text, methods_text, trials,
                             success_tol, seed, threads);
  if (rip->parsed()) {
    if (!identity && mlist_text.empty())
      throw UsageError("rip requires --m-list or --identity");
    return cmd_experiment_rip(ctx, d, k, n, mlist_text, trials, seed, identity);
  }
  throw UsageError("no command selected");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args));
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
