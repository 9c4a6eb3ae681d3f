#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dhs/cli.hpp"
#include "dhs/config.hpp"
#include "dhs/errors.hpp"
#include "support.hpp"

namespace dhs {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "dhs");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("dhs_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write_config(const json& j, const std::string& name = "config.json") const {
    std::ofstream(file(name)) << j.dump(2);
    return file(name);
  }

 private:
  fs::path path_;
};

json model_json() {
  std::ifstream in(test::config_path("model.json"));
  return json::parse(in);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kConfigError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kConfigError);
  EXPECT_EQ(run({"check"}).code, cli::kConfigError);
  const auto missing = run({"check", "--config", "/nonexistent/config.json"});
  EXPECT_EQ(missing.code, cli::kConfigError);
  EXPECT_EQ(json::parse(missing.out)["error"]["kind"], "configuration");
  EXPECT_EQ(run({"spectrum", "--config", test::config_path("model.json"), "--grid", "1"}).code, cli::kConfigError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, CheckExitCodes) {
  const auto ok = run({"check", "--config", test::config_path("model.json")});
  EXPECT_EQ(ok.code, cli::kOk) << ok.err;
  const json rep = json::parse(ok.out)["report"];
  EXPECT_GT(rep["delta0_estimate"].get<double>(), 0.0);

  TempDir dir;
  json j = model_json();
  j["nonlinearity"]["params"]["nu"] = 2.5;
  const auto gap = run({"check", "--config", dir.write_config(j)});
  EXPECT_EQ(gap.code, cli::kFailed);
  EXPECT_NE(gap.err.find("(R3) failed"), std::string::npos) << gap.err;

  j = model_json();
  j["matrices"] = {{0, 1, 1, 0}};
  EXPECT_EQ(run({"check", "--config", dir.write_config(j)}).code, cli::kFailed);
  // Not (R0) but a malformed matrix: a configuration error.
  j["matrices"] = {{0, 1, 2, 0}};
  const auto asym = run({"check", "--config", dir.write_config(j)});
  EXPECT_EQ(asym.code, cli::kConfigError);
  EXPECT_NE(asym.err.find("matrices[0]"), std::string::npos) << asym.err;
}

TEST(Cli, SpectrumAndBands) {
  TempDir dir;
  const auto s = run({"spectrum", "--config", test::config_path("model.json"), "--window", "8", "--out",
                      dir.path().string()});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  const json j = json::parse(s.out);
  EXPECT_TRUE(j["inclusion"]["passed"].get<bool>());
  EXPECT_NEAR(j["band_extrema"]["positive"][1].get<double>(), 3.0, 1e-9);
  EXPECT_NEAR(j["band_extrema"]["negative"][1].get<double>(), -1.0, 1e-9);
  EXPECT_TRUE(fs::exists(dir.path() / "bands.csv"));
  EXPECT_EQ(slurp(dir.path() / "spectrum.json"), s.out);

  const auto b = run({"bands", "--config", test::config_path("period2.json"), "--grid", "4"});
  ASSERT_EQ(b.code, cli::kOk);
  std::istringstream lines(b.out);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "theta,band_1,band_2,band_3,band_4");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Config, RoundTripsThroughJson) {
  for (const char* name : {"model.json", "period2.json", "n2.json"}) {
    const ProblemConfig c = load_config(test::config_path(name));
    EXPECT_EQ(parse_config(to_json(c)), c) << name;
    EXPECT_NO_THROW(PeriodicCoefficients(c.coefficient_matrices())) << name;
  }
  ProblemConfig c = load_config(test::config_path("model.json"));
  c.solver.starts = {{StartStrategy::GaussianBump, 2.0, 3.0, {}}, {StartStrategy::Random, 1.0, {}, {}}};
  c.window.boundary = Boundary::Periodic;
  EXPECT_EQ(parse_config(to_json(c)), c);
  EXPECT_NE(c.with_parameter(5.0), c);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const json& j) {
    try {
      parse_config(j);
    } catch (const ConfigurationError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  json j = model_json();
  j.erase("block_dim");
  EXPECT_EQ(message(j), "block_dim: missing");
  j = model_json();
  j["matrices"] = {{0, -1, -1}};
  EXPECT_NE(message(j).find("matrices[0]: expected 4 entries"), std::string::npos);
  j = model_json();
  j["nonlinearity"]["family"] = "cubic";
  EXPECT_NE(message(j).find("cubic"), std::string::npos);
  j = model_json();
  j["window"]["boundary"] = "reflecting";
  EXPECT_NE(message(j).find("window.boundary"), std::string::npos);
  j = model_json();
  j["solver"]["starts"] = {{{"strategy", "gaussian_bump"}, {"amplitude", -1}}};
  EXPECT_NE(message(j).find("solver.starts[0].amplitude"), std::string::npos);
  j = model_json();
  j["period"] = 2;
  EXPECT_NE(message(j).find("matrices: expected 2"), std::string::npos);
}

TEST(OrbitCsv, RoundTripsExactly) {
  std::mt19937_64 rng(1);
  const auto x = test::random_vector(Window::symmetric(5), 2, rng);
  std::stringstream s;
  write_orbit_csv(s, x);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "n,x1_1,x1_2,x2_1,x2_2");
  EXPECT_EQ(read_orbit_csv(s, 2), x);
  std::stringstream again(s.str());
  EXPECT_THROW(read_orbit_csv(again, 1), DimensionError);
  std::stringstream gap("n,x1_1,x2_1\n-1,0,0\n1,0,0\n");
  EXPECT_THROW(read_orbit_csv(gap, 1), ConfigurationError);
  std::stringstream bad("n,x1_1,x2_1\n0,zero,0\n");
  EXPECT_THROW(read_orbit_csv(bad, 1), ConfigurationError);
}

// Two fixed-seed solves write identical bytes, and every orbit verifies.
TEST(Cli, SolveIsReproducibleAndEveryOrbitVerifies) {
  TempDir a, b;
  const std::string config = test::config_path("model.json");
  const auto first = run({"solve", "--config", config, "--window", "32", "--out", a.path().string()});
  ASSERT_EQ(first.code, cli::kOk) << first.err;
  const auto second = run({"solve", "--config", config, "--window", "32", "--out", b.path().string()});
  ASSERT_EQ(second.code, cli::kOk);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(slurp(a.path() / "solve.json"), slurp(b.path() / "solve.json"));

  const json report = json::parse(first.out);
  ASSERT_FALSE(report["orbits"].empty());
  for (const auto& o : report["orbits"]) {
    const std::string file = o["file"];
    EXPECT_EQ(slurp(a.path() / file), slurp(b.path() / file));
    const auto v = run({"verify", "--config", config, "--orbit", a.file(file)});
    EXPECT_EQ(v.code, cli::kOk) << file << ": " << v.err;
  }

  // A corrupted orbit fails, an orbit with the wrong N is a configuration error.
  const std::string orbit = a.file("orbit_0.csv");
  BlockVector x = read_orbit_csv(orbit, 1);
  x.block(0)[0] += 0.1;
  write_orbit_csv(a.file("bad.csv"), x);
  const auto bad = run({"verify", "--config", config, "--orbit", a.file("bad.csv")});
  EXPECT_EQ(bad.code, cli::kFailed);
  EXPECT_EQ(json::parse(bad.out)["report"]["dhs_residual_worst_node"], 0);
  EXPECT_EQ(run({"verify", "--config", test::config_path("n2.json"), "--orbit", orbit}).code, cli::kConfigError);
  EXPECT_EQ(run({"verify", "--config", config, "--orbit", a.file("missing.csv")}).code, cli::kConfigError);
}

TEST(Cli, SolveRespectsTheCheck) {
  TempDir dir;
  json j = model_json();
  j["nonlinearity"] = {{"family", "quadratic"}, {"params", {{"c", 4}}}};
  const std::string config = dir.write_config(j);
  const auto refused = run({"solve", "--config", config, "--window", "16"});
  EXPECT_EQ(refused.code, cli::kFailed);
  EXPECT_NE(refused.err.find("--skip-check"), std::string::npos);
  const auto none = run({"solve", "--config", config, "--window", "16", "--skip-check"});
  EXPECT_EQ(none.code, cli::kNoOrbit) << none.err;
  EXPECT_TRUE(json::parse(none.out)["orbits"].empty());

  j = model_json();
  j["window"]["boundary"] = "periodic";
  EXPECT_EQ(run({"solve", "--config", dir.write_config(j), "--skip-check"}).code, cli::kConfigError);
}

}  // namespace
}  // namespace dhs
