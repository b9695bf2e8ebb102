#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shatterlab/io.hpp"
#include "shatterlab/noise.hpp"
#include "shatterlab/specr.hpp"

using namespace shatterlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;  // stdout and stderr
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(SHATTERLAB_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("shatterlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const {
    io::write_file_atomic(path(name), content);
    return path(name);
  }
  std::string zero4() const { return write("zero.mtx", "%%MatrixMarket matrix coordinate complex general\n4 4 0\n"); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, PerturbFullDensity) {
  const auto in = zero4();
  const auto r = cli("perturb " + in + " --rho 1 --seed 5 --out " + path("p.mtx"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto m = io::read_matrix_market(path("p.mtx"));
  EXPECT_EQ(m.matrix.nnz(), 16);
  EXPECT_EQ(m.matrix, sample_sparse_noise({4, 1.0, 1.0, 5}));
  ASSERT_TRUE(fs::exists(path("p.mtx.manifest.json")));
  const auto first = io::read_file(path("p.mtx"));
  ASSERT_EQ(cli("perturb " + in + " --rho 1 --seed 5 --out " + path("q.mtx")).code, 0);
  EXPECT_EQ(io::read_file(path("q.mtx")), first);
}

TEST_F(Cli, PerturbBadRho) {
  const auto r = cli("perturb " + zero4() + " --rho 1.5 --seed 5 --out " + path("p.mtx"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("rho <= 1"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(path("p.mtx")));
}

TEST_F(Cli, ParseErrorsAndMissingFiles) {
  const auto bad = write("bad.mtx", "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 x 0\n");
  auto r = cli("diagnose " + bad);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("bad.mtx:3:5"), std::string::npos) << r.out;
  r = cli("specr " + path("missing.mtx") + " --rho 0.5 --eps 0.1 --delta 0.001 --seed 1");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(cli("perturb").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
}

TEST_F(Cli, DiagnoseDiagonalAndJordan) {
  const auto d = write("d.mtx", "%%MatrixMarket matrix coordinate real general\n3 3 2\n2 2 1\n3 3 3\n");
  auto r = cli("diagnose " + d + " --json");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["schema"], "shatterlab.diagnose/1");
  EXPECT_NEAR(j["eta"].get<double>(), 1.0, 1e-14);
  const auto jb = write("j.mtx", "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 2 1\n2 3 1\n");
  r = cli("diagnose " + jb);
  ASSERT_EQ(r.code, 0) << r.out;
  j = json::parse(r.out);
  EXPECT_TRUE(j["defective"].get<bool>());
  EXPECT_EQ(j["kappa_v_upper"], "inf");
  EXPECT_EQ(j["kappa_v_lower"], "inf");
  r = cli("diagnose " + jb + " --csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# schema=shatterlab.diagnose/1", 0), 0u);
  EXPECT_NE(r.out.find(",inf,"), std::string::npos);
}

TEST_F(Cli, DiagnoseOfPerturbIsReproducible) {
  const auto in = zero4();
  ASSERT_EQ(cli("perturb " + in + " --rho 1 --seed 9 --out " + path("p.mtx")).code, 0);
  const auto a = cli("diagnose " + path("p.mtx"));
  const auto b = cli("diagnose " + path("p.mtx"));
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, PseudospectrumGrid) {
  const auto d = write("d.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n2 2 5\n");
  const auto r = cli("pseudospectrum " + d + " --eps 0.1 --center 2.5,0 --radius 3 --res 4 --out " + path("g.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(io::read_file(path("g.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema=shatterlab.pseudospectrum/1");
  std::getline(in, line);
  EXPECT_EQ(line, "re,im,sigma_min");
  std::vector<double> field;
  while (std::getline(in, line)) field.push_back(io::parse_double(line.substr(line.rfind(',') + 1)));
  ASSERT_EQ(field.size(), 16u);
  const auto g = pseudospectrum_grid(io::read_matrix_market(d).matrix.to_dense(), {0.1}, {2.5, 0.0}, 3.0, 4);
  EXPECT_EQ(field, g.sigma_min_field);
  // nodes nearest 0 and 5 are (0.5, 1) and (4.5, 1): spacing 2
  for (double s : {g.at(1, 1), g.at(3, 1)}) EXPECT_LE(s, g.spacing());
}

TEST_F(Cli, SpecrKOne) {
  const auto in = write("i.mtx", "%%MatrixMarket matrix coordinate real general\n8 8 8\n1 1 2\n2 2 2\n3 3 2\n4 4 2\n"
                                 "5 5 2\n6 6 2\n7 7 2\n8 8 2\n");
  const auto r = cli("specr " + in + " --rho 0.5 --eps 0.1 --delta 0.001 --seed 3 --k 1 --with-oracle");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  SpecrConfig cfg;
  cfg.rho = 0.5;
  cfg.seed = 3;
  cfg.k_override = 1;
  const auto lib = specr_estimate(io::read_matrix_market(in).matrix, cfg);
  rng::Stream s(3, rng::Domain::GaussVector, 0, 0);
  Vector b(8);
  for (int i = 0; i < 8; ++i) b[i] = s.complex_gaussian();
  const double ratio = (lib.perturbed.to_dense() * b).norm() / b.norm();
  EXPECT_NEAR(j["estimate"].get<double>(), ratio, 1e-12 * ratio);
  EXPECT_EQ(j["k_used"], 1);
  EXPECT_TRUE(j.contains("oracle"));
}

TEST_F(Cli, SpecrWithinEps) {
  std::string text = "%%MatrixMarket matrix coordinate real general\n64 64 64\n";
  for (int i = 1; i <= 64; ++i) text += std::to_string(i) + " " + std::to_string(i) + " 2\n";
  const auto in = write("two.mtx", text);
  const auto r = cli("specr " + in + " --rho 0.25 --eps 0.1 --delta 0.001 --seed 5 --with-oracle");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(json::parse(r.out)["oracle"]["within_eps"].get<bool>());
}

TEST_F(Cli, ExperimentDryRunAndMalformed) {
  auto r = cli("experiment " + std::string(SHATTERLAB_CONFIG_DIR) + "/tail_m0.json --dry-run --out-dir " + path("x"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("trials: 4000"), std::string::npos);
  EXPECT_NE(r.out.find("estimated_matvecs: 128000"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("x")));
  const auto bad = write("bad.json", R"({"schema": "shatterlab.experiment/1", "campaign": "coupon", "seed": 1,
      "trials": 10, "n": 16, "c_list": [1, "two"]})");
  r = cli("experiment " + bad);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("/c_list/1"), std::string::npos) << r.out;
  const auto dom = write("dom.json", R"({"schema": "shatterlab.experiment/1", "campaign": "coupon", "seed": 1,
      "trials": 10, "n": 4, "c_list": [1]})");
  EXPECT_EQ(cli("experiment " + dom).code, 2);
}

TEST_F(Cli, ExperimentWritesFilesAndReplays) {
  const auto cfg = write("c.json", R"({"schema": "shatterlab.experiment/1", "campaign": "tail", "name": "t",
      "seed": 4, "trials": 400, "rho": 1, "family": {"kind": "zero", "n": 6},
      "eps_grid": {"start": 1, "stop": 0.01, "points": 20}})");
  auto r = cli("experiment " + cfg + " --out-dir " + path("run"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"t_cdf.csv", "t_trials.csv", "t_summary.json", "t_manifest.json"})
    EXPECT_TRUE(fs::exists(path("run/") + f)) << f;
  const auto summary = json::parse(io::read_file(path("run/t_summary.json")));
  EXPECT_TRUE(summary["result"]["fitted_slope"].is_number());
  r = cli("replay " + path("run/t_manifest.json") + " --out-dir " + path("again"));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"t_cdf.csv", "t_trials.csv", "t_summary.json"})
    EXPECT_EQ(io::read_file(path("run/") + f), io::read_file(path("again/") + f)) << f;
}

TEST_F(Cli, ReplayPerturb) {
  ASSERT_EQ(cli("perturb " + zero4() + " --rho 0.5 --seed 2 --out " + path("a/p.mtx")).code, 0);
  const auto before = io::read_file(path("a/p.mtx"));
  fs::remove(path("a/p.mtx"));
  ASSERT_EQ(cli("replay " + path("a/p.mtx.manifest.json")).code, 0);
  EXPECT_EQ(io::read_file(path("a/p.mtx")), before);
  auto m = json::parse(io::read_file(path("a/p.mtx.manifest.json")));
  m["config"]["seed"] = 3;
  io::write_file_atomic(path("a/tampered.json"), m.dump());
  EXPECT_EQ(cli("replay " + path("a/tampered.json")).code, 1);
}

TEST_F(Cli, ThreadCap) {
  const auto in = zero4();
  EXPECT_EQ(cli("diagnose " + in).code, 0);
  const std::string env = "SHATTERLAB_THREADS=abc ";
  FILE* p = popen((env + SHATTERLAB_CLI + " diagnose " + in + " >/dev/null 2>&1").c_str(), "r");
  EXPECT_EQ(WEXITSTATUS(pclose(p)), 1);
}
