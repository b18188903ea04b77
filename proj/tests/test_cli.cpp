// End-to-end tests driving the installed CLI binary through a shell.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "ovp/image.hpp"
#include "ovp/report.hpp"
#include "ovp/rng.hpp"
#include "ovp/signal_gen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return OVP_CLI_PATH; }

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& name)
      : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string operator/(const std::string& p) const { return (dir / p).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli project on a two-level signal") {
  TempDir tmp("ovp_cli_project");
  {
    std::ofstream csv(tmp / "sig.csv");
    csv << "# two level\n0\n0\n0\n5\n5\n5\n";
  }
  REQUIRE(run("project --in " + (tmp / "sig.csv") + " --k 1 --n 0 --out " +
              (tmp / "out")) == 0);
  const json rep = load_json(tmp / "out/report.json");
  CHECK(rep["breakpoints"] == json::array({3}));
  CHECK(rep["sse"].get<double>() <= 1e-15);

  REQUIRE(run("project --in " + (tmp / "sig.csv") + " --k 0 --n 1 --out " +
              (tmp / "flat")) == 0);
  const json flat = load_json(tmp / "flat/report.json");
  CHECK(flat["breakpoints"].empty());
  CHECK(flat["segment_coeffs"].size() == 1);
}

TEST_CASE("cli project matches the enumeration oracle") {
  TempDir tmp("ovp_cli_oracle");
  ovp::Rng rng(123);
  Eigen::VectorXd g(12);
  for (int i = 0; i < 12; ++i) g[i] = rng.normal();
  ovp::write_csv_signal(tmp / "sig.csv", g);
  REQUIRE(run("project --in " + (tmp / "sig.csv") + " --k 2 --n 1 --out " +
              (tmp / "out")) == 0);
  const json rep = load_json(tmp / "out/report.json");
  const double want = oracle::enumeration_min_sse(g, 2, 1);
  CHECK(rep["sse"].get<double>() == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("cli usage and parse errors use distinct exit codes") {
  TempDir tmp("ovp_cli_errors");
  {
    std::ofstream csv(tmp / "sig.csv");
    csv << "1\n2\n";
  }
  // missing required --k for sscosamp
  CHECK(run("denoise1d --in " + (tmp / "sig.csv") +
            " --method sscosamp --out " + (tmp / "o1")) == 2);
  // malformed CSV: line number in the message, exit 3
  {
    std::ofstream csv(tmp / "bad.csv");
    csv << "1.5\nnot-a-number\n";
  }
  const std::string cmd = std::string(cli_path()) + " project --in " +
                          (tmp / "bad.csv") + " --k 0 --out " + (tmp / "o2") +
                          " 2> " + (tmp / "err.txt");
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 3);
  const std::string err = slurp(tmp / "err.txt");
  CHECK(err.find(":2") != std::string::npos);  // the offending line
  // unknown method
  CHECK(run("denoise1d --in " + (tmp / "sig.csv") + " --method tv --out " +
            (tmp / "o3")) == 2);
}

TEST_CASE("cli denoise1d recovers and reports metrics") {
  TempDir tmp("ovp_cli_den1d");
  ovp::SignalSpec spec;
  spec.d = 120;
  spec.k = 4;
  spec.degree = 1;
  spec.continuous = true;
  spec.seed = 9;
  const auto gen = ovp::gen_piecewise_poly(spec);
  ovp::write_csv_signal(tmp / "clean.csv", gen.signal);
  const Eigen::VectorXd noisy = ovp::add_noise(gen.signal, 0.1, 10);
  ovp::write_csv_signal(tmp / "noisy.csv", noisy);

  // clean input, sigma 0: output equals input
  REQUIRE(run("denoise1d --in " + (tmp / "clean.csv") +
              " --method bgapn --sigma 0 --out " + (tmp / "clean_out")) == 0);
  const Eigen::VectorXd rec =
      ovp::read_csv_signal(tmp / "clean_out/recovered.csv");
  CHECK((rec - gen.signal).norm() <= 1e-6 * gen.signal.norm());

  // noisy input with reference: reported MSE below the input MSE
  REQUIRE(run("denoise1d --in " + (tmp / "noisy.csv") +
              " --method bgapn-cont --sigma 0.1 --reference " +
              (tmp / "clean.csv") + " --out " + (tmp / "den_out")) == 0);
  const json rep = load_json(tmp / "den_out/report.json");
  CHECK(rep["metrics"]["mse"].get<double>() <
        rep["input_metrics"]["mse"].get<double>());
}

TEST_CASE("cli image pipeline: gradmap, denoise, segment") {
  TempDir tmp("ovp_cli_image");
  // constant image -> zero gradient map
  ovp::Image flat(12, 12);
  flat.pixels.setConstant(90.0);
  ovp::write_pgm(tmp / "flat.pgm", flat);
  REQUIRE(run("image gradmap --in " + (tmp / "flat.pgm") + " --out " +
              (tmp / "g")) == 0);
  const ovp::Image gm = ovp::read_pgm(tmp / "g/gradmap.pgm");
  CHECK(gm.pixels.norm() == 0.0);

  // two-region synthetic image
  ovp::Image img(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c)
      img.at(r, c) = r < 16 ? 70.0 + 0.5 * c : 190.0 - 0.4 * c;
  ovp::write_pgm(tmp / "img.pgm", img);
  ovp::Image noisy = img;
  noisy.pixels = ovp::add_noise(img.pixels, 10.0, 3);
  for (int i = 0; i < noisy.size(); ++i)
    noisy.pixels[i] = std::clamp(noisy.pixels[i], 0.0, 255.0);
  ovp::write_pgm(tmp / "noisy.pgm", noisy);

  REQUIRE(run("image denoise --in " + (tmp / "noisy.pgm") +
              " --sigma 10 --reference " + (tmp / "img.pgm") + " --out " +
              (tmp / "dn")) == 0);
  const json rep = load_json(tmp / "dn/report.json");
  CHECK(rep["metrics"]["psnr_db"].get<double>() >
        rep["input_metrics"]["psnr_db"].get<double>() + 4.0);

  REQUIRE(run("image segment --in " + (tmp / "img.pgm") + " --out " +
              (tmp / "seg")) == 0);
  const json seg = load_json(tmp / "seg/report.json");
  CHECK(seg["region_count"].get<int>() == 2);
  const ovp::Image labels = ovp::read_pgm(tmp / "seg/labels.pgm");
  CHECK(labels.pixels.maxCoeff() == 2.0);
}

TEST_CASE("cli experiment tables, plots and replay") {
  TempDir tmp("ovp_cli_exp");
  REQUIRE(run("experiment sweep --d 60 --k 2 --n 1 --sigmas 0.1,0.2 "
              "--methods projection-oracle-k,projection-oracle-k-continuity "
              "--trials 3 --seed 4 --out " +
              (tmp / "sw")) == 0);
  // one aggregate row per (sigma, method) plus the header
  {
    std::ifstream csv(tmp / "sw/results.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 1 + 2 * 2);
  }
  CHECK(fs::exists(tmp / "sw/plot.svg"));
  CHECK(slurp(tmp / "sw/plot.svg").find("<svg") != std::string::npos);

  REQUIRE(run("experiment cs --d 40 --k 2 --n 1 --grid 1.0 "
              "--methods sscosamp --trials 5 --seed 4 --out " +
              (tmp / "cs")) == 0);
  const json rep = load_json(tmp / "cs/report.json");
  const double rate = rep["cells"][0]["rate"].get<double>();
  CHECK(rate >= 0.0);
  CHECK(rate <= 1.0);
  {
    std::ifstream csv(tmp / "cs/trials.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 1 + 5);
  }

  // replay reproduces every output byte for byte
  REQUIRE(run("replay " + (tmp / "sw/manifest.json") + " --out " +
              (tmp / "sw2")) == 0);
  for (const char* name : {"results.csv", "trials.csv", "plot.svg", "report.json"})
    CHECK(slurp(tmp / ("sw/" + std::string(name))) ==
          slurp(tmp / ("sw2/" + std::string(name))));

  // rip on the identity: a zero delta row
  REQUIRE(run("experiment rip --d 30 --k 2 --n 1 --identity --trials 3 "
              "--seed 1 --out " +
              (tmp / "rip")) == 0);
  const json rip = load_json(tmp / "rip/report.json");
  CHECK(rip["delta_hat"][0].get<double>() <= 1e-12);
}
