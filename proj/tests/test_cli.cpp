#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "nlc/cli/cli.hpp"
#include "nlc/io/csv.hpp"

using nlc::cli::run;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

nlc::io::CsvTable table(const std::string& text) {
  std::istringstream is(text);
  return nlc::io::read_csv(is);
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nlc_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("cli: noiseless acv template is half a cosine") {
  const auto r = call({"formula", "--template", "acv", "--r", "1", "--alpha", "6.2832", "--lambda",
                       "6.2832", "--nsr", "0", "--umax", "3"});
  REQUIRE(r.code == 0);
  const auto t = table(r.out);
  REQUIRE(t.header == std::vector<std::string>{"lag", "acv"});
  CHECK(t.rows() == 1001);
  CHECK(t.column("lag").back() == doctest::Approx(3.0));
  double gap = 0;
  for (std::size_t k = 0; k < t.rows(); ++k)
    gap = std::max(gap, std::abs(t.column("acv")[k] - 0.5 * std::cos(6.2832 * t.column("lag")[k])));
  CHECK(gap < 1e-15);
}

TEST_CASE("cli: simulate is reproducible for a fixed seed") {
  const std::vector<std::string> args{"simulate", "--model", "hopf-exact", "--nsr", "0.1", "--periods", "10", "--seed", "7"};
  const auto a = call(args);
  const auto b = call(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto t = table(a.out);
  CHECK(t.header == std::vector<std::string>{"t", "x", "y"});
  CHECK(t.rows() == 1001);  // 100 stored rows per period plus the start

  auto other = args;
  other.back() = "8";
  CHECK(call(other).out != a.out);

  ::setenv(nlc::cli::kSeedEnv, "7", 1);
  const auto from_env = call({"simulate", "--model", "hopf-exact", "--nsr", "0.1", "--periods", "10"});
  ::unsetenv(nlc::cli::kSeedEnv);
  CHECK(from_env.out == a.out);
}

TEST_CASE("cli: every model writes its columns") {
  for (const std::string model : {"hopf-linear", "hopf-leading", "reduced"}) {
    CAPTURE(model);
    const auto r = call({"simulate", "--model", model, "--nsr", "0.1", "--periods", "2", "--seed", "3"});
    REQUIRE(r.code == 0);
    const auto t = table(r.out);
    CHECK(t.rows() == 201);
    CHECK(t.has("tau"));
    CHECK(t.has("x"));
    CHECK(t.has("y"));
  }
}

TEST_CASE("cli: several paths go to numbered files, written atomically") {
  TempDir dir;
  const auto r = call({"simulate", "--nsr", "0.1", "--periods", "1", "--paths", "3", "-o", dir.file("p.csv")});
  REQUIRE(r.code == 0);
  for (int k = 0; k < 3; ++k) CHECK(fs::exists(dir.file("p_" + std::to_string(k) + ".csv")));
  for (const auto& e : fs::directory_iterator(dir.path)) CHECK(e.path().extension() != ".tmp");
  CHECK(call({"simulate", "--nsr", "0.1", "--periods", "1", "--paths", "3"}).code == 1);
}

TEST_CASE("cli: usage errors exit 1") {
  TempDir dir;
  CHECK(call({"simulate", "--nsr", "0.1", "--sigma", "0.3"}).code == 1);
  CHECK(call({"simulate", "--no-such-flag"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"simulate", "--r", "-1"}).code == 1);
  CHECK(call({"simulate", "--model", "lorenz"}).code == 1);
  CHECK(call({"fit", "--target", "acv", "-i", dir.file("missing.csv")}).code == 1);

  write_file(dir.file("ragged.csv"), "a,b\n1,2\n3\n");
  auto r = call({"analyze", "--method", "acv", "-i", dir.file("ragged.csv"), "--dt", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find(":3:") != std::string::npos);

  write_file(dir.file("text.csv"), "a\n1\nx\n");
  r = call({"analyze", "--method", "kurtosis", "-i", dir.file("text.csv"), "--dt", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("non-numeric") != std::string::npos);

  write_file(dir.file("nodt.csv"), "a\n1\n2\n");
  CHECK(call({"analyze", "--method", "acv", "-i", dir.file("nodt.csv")}).code == 1);
  CHECK(call({"validate", "--criteria", "12"}).code == 1);
}

TEST_CASE("cli: numerical failures exit 2") {
  TempDir dir;
  std::ostringstream csv;
  csv << "lag,acv\n";
  for (int k = 0; k < 100; ++k) csv << 0.1 * k << ',' << std::exp(-0.1 * k) << '\n';
  write_file(dir.file("ou.csv"), csv.str());
  const auto r = call({"fit", "--target", "acv", "-i", dir.file("ou.csv")});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("cli: json config fills flags and the command line wins") {
  TempDir dir;
  write_file(dir.file("c.json"), R"({"threads": 1, "simulate": {"nsr": 0.1, "periods": 3, "seed": 5}})");
  auto r = call({"--config", dir.file("c.json"), "simulate"});
  REQUIRE(r.code == 0);
  CHECK(table(r.out).rows() == 301);
  const auto direct = call({"simulate", "--nsr", "0.1", "--periods", "3", "--seed", "5"});
  CHECK(r.out == direct.out);

  r = call({"--config", dir.file("c.json"), "simulate", "--periods", "2"});
  REQUIRE(r.code == 0);
  CHECK(table(r.out).rows() == 201);

  write_file(dir.file("bad.json"), R"({"simulate": {"no_such_key": 1}})");
  r = call({"--config", dir.file("bad.json"), "simulate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no_such_key") != std::string::npos);

  write_file(dir.file("broken.json"), "{nope");
  CHECK(call({"--config", dir.file("broken.json"), "simulate"}).code == 1);
}

TEST_CASE("cli: formula -> fit recovers the generating parameters") {
  TempDir dir;
  const double lambda = 2 * pi, nsr = 0.1;
  const double sigma = std::sqrt(2 * lambda * nsr * nsr);
  REQUIRE(call({"formula", "--template", "acv", "--nsr", "0.1", "--umax", "30", "--points", "3001",
                "-o", dir.file("acv.csv")})
              .code == 0);
  const auto r = call({"fit", "--target", "acv", "-i", dir.file("acv.csv")});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["target"] == "acv");
  CHECK(j["n_points"].get<int>() > 16);
  CHECK(j["params"]["r"].get<double>() == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(j["params"]["alpha"].get<double>() == doctest::Approx(2 * pi).epsilon(1e-5));
  CHECK(j["params"]["lambda"].get<double>() == doctest::Approx(lambda).epsilon(1e-4));
  CHECK(j["params"]["sigma"].get<double>() == doctest::Approx(sigma).epsilon(1e-5));
  CHECK(j["derived"]["period"].get<double>() == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(j["derived"]["nsr"].get<double>() == doctest::Approx(nsr).epsilon(1e-4));
  CHECK(j["derived"]["focal_lyapunov"].get<double>() == doctest::Approx(pi).epsilon(1e-4));
  CHECK(j.contains("residual"));
  CHECK(j["derived"].contains("sigma_sq_over_acv0"));
}

TEST_CASE("cli: analyze estimators on a simulated series") {
  TempDir dir;
  REQUIRE(call({"simulate", "--nsr", "0.1", "--periods", "200", "--seed", "2", "-o", dir.file("s.csv")}).code == 0);

  auto r = call({"analyze", "--method", "acv", "-i", dir.file("s.csv"), "--max-lag", "2"});
  REQUIRE(r.code == 0);
  auto t = table(r.out);
  CHECK(t.rows() == 201);
  CHECK(t.column("acv")[0] == doctest::Approx(0.5).epsilon(0.1));

  r = call({"analyze", "--method", "psd", "-i", dir.file("s.csv"), "--segments", "4", "--window", "hann"});
  REQUIRE(r.code == 0);
  t = table(r.out);
  const auto& psd = t.column("psd");
  const auto peak = std::max_element(psd.begin(), psd.end()) - psd.begin();
  CHECK(t.column("omega")[static_cast<std::size_t>(peak)] == doctest::Approx(2 * pi).epsilon(0.05));

  r = call({"analyze", "--method", "kde", "-i", dir.file("s.csv"), "--column", "y", "--points", "64"});
  REQUIRE(r.code == 0);
  CHECK(table(r.out).rows() == 64);

  r = call({"analyze", "--method", "kurtosis", "-i", dir.file("s.csv")});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["kurtosis"].get<double>() == doctest::Approx(1.5).epsilon(0.1));
}

TEST_CASE("cli: decompose presets and a plugin") {
  TempDir dir;
  auto r = call({"decompose", "--preset", "vdp", "--cycle-out", dir.file("c.csv"), "--frame-out",
                 dir.file("f.csv"), "--j0-out", dir.file("j.csv")});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["period"].get<double>() == doctest::Approx(6.6633).epsilon(1e-4));
  CHECK(j["stable"].get<bool>());
  CHECK(nlc::io::read_csv(fs::path(dir.file("c.csv"))).rows() == 1024);
  CHECK(nlc::io::read_csv(fs::path(dir.file("f.csv"))).header.size() == 5);
  CHECK(nlc::io::read_csv(fs::path(dir.file("j.csv"))).header.size() == 2);

  r = call({"decompose", "--preset", "hopf", "--lambda", "3"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["period"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(j["monodromy_radius"].get<double>() == doctest::Approx(std::exp(-3.0)).epsilon(1e-6));

  const auto preset = nlohmann::json::parse(call({"decompose", "--preset", "vdp", "--mu", "2"}).out);
  r = call({"decompose", "--plugin", NLC_TEST_PLUGIN, "--plugin-param", "2"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["period"].get<double>() == doctest::Approx(preset["period"].get<double>()).epsilon(1e-8));
  CHECK(j["monodromy_radius"].get<double>() ==
        doctest::Approx(preset["monodromy_radius"].get<double>()).epsilon(1e-4));

  CHECK(call({"decompose", "--preset", "vdp", "--guess", "1,2,3"}).code == 1);
  CHECK(call({"decompose", "--preset", "hopf", "--guess", "0,0"}).code == 2);
}

TEST_CASE("cli: validate runs selected criteria") {
  const auto r = call({"validate", "--criteria", "7,9", "--nino34", "/nonexistent/n34.csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("[PASS] 7 frame invariants") != std::string::npos);
  CHECK(r.out.find("[PASS] 9 Wiener-Khintchine") != std::string::npos);
  const auto skip = call({"validate", "--criteria", "11", "--nino34", "/nonexistent/n34.csv"});
  CHECK(skip.code == 0);
  CHECK(skip.out.find("[SKIP] 11") != std::string::npos);
}
