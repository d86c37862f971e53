#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "anisograph/graph.hpp"
#include "anisograph/spectral.hpp"
#include "support/oracles.hpp"

namespace ag = anisograph;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("anisograph_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  CliResult run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" + ANISOGRAPH_CLI_PATH + "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

  fs::path dir_;
};

std::string line_with(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) return line;
  }
  return {};
}

}  // namespace

TEST_F(Cli, BuildGraphPaperGrid) {
  const auto r = run("build-graph --kind se2 --nx 28 --ny 28 --orient 6 --epsilon 0.3162 --alpha 1 --knn 16");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("effective-config: command=build-graph", 0), 0u);
  EXPECT_EQ(line_with(r.out, "vertices:"), "vertices: 4704");
  EXPECT_FALSE(line_with(r.out, "neighbors: in-slice").empty());
  EXPECT_TRUE(fs::exists(path("graph.clgr")));
}

TEST_F(Cli, BuildGraphSphereForcesIsotropicMetric) {
  const auto r = run("build-graph --kind s2 --level 0 --knn 8 --out s.clgr");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_with(r.out, "vertices:"), "vertices: 12");
  const auto f = ag::load_graph(path("s.clgr").string());
  EXPECT_EQ(f.graph.metric.epsilon(), 1.0);
  EXPECT_EQ(f.graph.metric.xi(), 1.0);
}

TEST_F(Cli, BuildGraphUsageErrors) {
  EXPECT_EQ(run("build-graph --kind se2 --nx 4 --orient 2 --alpha 1 --xi 1").code, 2);
  EXPECT_EQ(run("build-graph --kind se2 --nx 4 --orient 2").code, 2);
  EXPECT_EQ(run("build-graph --kind hyperbolic --nx 4").code, 2);
  EXPECT_EQ(run("build-graph --kind se2 --nx 0 --orient 2 --alpha 1").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 6 --orient 4 --epsilon 0.5 --alpha 1 --out a.clgr").code, 0);
  ASSERT_EQ(run("build-graph --kind se2 --nx 6 --orient 4 --epsilon 0.5 --alpha 1 --out b.clgr").code, 0);
  EXPECT_EQ(read_file(path("a.clgr")), read_file(path("b.clgr")));
  ASSERT_EQ(run("diffuse --graph a.clgr --impulse 3 --tau 1 --out a.csv").code, 0);
  ASSERT_EQ(run("diffuse --graph a.clgr --impulse 3 --tau 1 --out b.csv").code, 0);
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
}

TEST_F(Cli, InfoSummarizes) {
  ASSERT_EQ(run("build-graph --kind so3 --level 1 --orient 2 --epsilon 0.5 --xi 0.8 --out g.clgr").code, 0);
  const auto r = run("info --graph g.clgr");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_with(r.out, "kind:"), "kind: so3");
  EXPECT_EQ(line_with(r.out, "vertices:"), "vertices: 84");
}

TEST_F(Cli, DiffuseZeroTimeIsImpulse) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 4 --orient 2 --alpha 1 --out g.clgr").code, 0);
  const auto r = run("diffuse --graph g.clgr --impulse 5 --tau 0 --out d.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(read_file(path("d.csv")));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "vertex_id,x,y,theta,value");
  int rows = 0;
  while (std::getline(in, line)) {
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_NEAR(v, rows == 5 ? 1.0 : 0.0, 1e-10) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 32);
}

TEST_F(Cli, DiffuseTotalMatchesDenseOracle) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 6 --orient 4 --epsilon 0.3162 --alpha 1 --out g.clgr").code, 0);
  const auto r = run("diffuse --graph g.clgr --impulse 40 --tau 2 --out d.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = ag::load_graph(path("g.clgr").string());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f.graph.vertex_count()), 1);
  x(40, 0) = 1.0;
  const double expected = oracle::spectral_heat(ag::laplacian(f.graph).matrix.to_dense(), x, 2.0).sum();
  const auto total = line_with(r.out, "total: ");
  ASSERT_FALSE(total.empty());
  EXPECT_NEAR(std::stod(total.substr(7)), expected, 1e-6);
  const auto aniso = line_with(r.out, "anisotropy: ");
  ASSERT_FALSE(aniso.empty());
  EXPECT_GT(std::stod(aniso.substr(aniso.find("ratio=") + 6)), 1.0);
}

TEST_F(Cli, DiffuseSphereCoordinatesAndRange) {
  ASSERT_EQ(run("build-graph --kind s2 --level 1 --out s.clgr").code, 0);
  ASSERT_EQ(run("diffuse --graph s.clgr --impulse 0 --tau 1 --out d.csv").code, 0);
  const auto csv = read_file(path("d.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "vertex_id,alpha,beta,gamma,value");
  EXPECT_EQ(run("diffuse --graph s.clgr --impulse 42 --tau 1").code, 2);
}

TEST_F(Cli, CheckEquivariance) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 8 --orient 4 --epsilon 0.3162 --alpha 1 --out g.clgr").code, 0);
  auto r = run("check-equivariance --graph g.clgr --quarter-turns 1");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_FALSE(line_with(r.out, "PASS").empty());
  r = run("check-equivariance --graph g.clgr --quarter-turns 0");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_with(r.out, "relative_frobenius_error:"), "relative_frobenius_error: 0");
  ASSERT_EQ(run("build-graph --kind se2 --nx 8 --ny 6 --orient 4 --alpha 1 --out rect.clgr").code, 0);
  EXPECT_EQ(run("check-equivariance --graph rect.clgr --quarter-turns 1").code, 2);
}

TEST_F(Cli, CheckEquivarianceFailsOnSubsampledGraph) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 8 --orient 4 --epsilon 0.3162 --alpha 1 --out g.clgr").code, 0);
  ASSERT_EQ(run("sample --graph g.clgr --edges 0.5 --seed 3 --out s.clgr").code, 0);
  const auto r = run("check-equivariance --graph s.clgr --quarter-turns 1");
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_FALSE(line_with(r.out, "FAIL").empty());
}

TEST_F(Cli, EigenmapsFirstRowIsNullSpace) {
  ASSERT_EQ(run("build-graph --kind r2 --nx 6 --out g.clgr").code, 0);
  ASSERT_EQ(run("eigenmaps --graph g.clgr --k 5 --clsg em").code, 0);
  std::istringstream in(read_file(path("eigenmaps.csv")));
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header.substr(0, 14), "k,lambda,v0,v1");
  const auto c1 = first.find(',');
  EXPECT_LE(std::abs(std::stod(first.substr(c1 + 1, first.find(',', c1 + 1) - c1 - 1))), 1e-9);
  const auto vectors = ag::load_signal(path("em.vectors.clsg").string());
  EXPECT_EQ(vectors.rows(), 36);
  EXPECT_EQ(vectors.cols(), 5);
  EXPECT_EQ(ag::load_signal(path("em.values.clsg").string()).rows(), 5);
  EXPECT_EQ(run("eigenmaps --graph g.clgr --k 37").code, 2);
}

TEST_F(Cli, SampleEdgesFullRateIsIdentity) {
  ASSERT_EQ(run("build-graph --kind se2 --nx 6 --orient 4 --alpha 1 --out g.clgr").code, 0);
  ASSERT_EQ(run("sample --graph g.clgr --edges 1.0 --out s.clgr").code, 0);
  const auto a = ag::load_graph(path("g.clgr").string()).graph;
  const auto b = ag::load_graph(path("s.clgr").string()).graph;
  EXPECT_EQ(a.adjacency.cols, b.adjacency.cols);
  EXPECT_EQ(a.adjacency.row_ptr, b.adjacency.row_ptr);
  EXPECT_EQ(run("sample --graph g.clgr --edges 0.5 --vertices 0.5").code, 2);
  EXPECT_EQ(run("sample --graph g.clgr").code, 2);
  ASSERT_EQ(run("sample --graph g.clgr --vertices 0.5 --seed 9 --out v.clgr").code, 0);
  EXPECT_EQ(ag::load_graph(path("v.clgr").string()).graph.vertex_count(), 72u);
}

TEST_F(Cli, TrainDemoZeroEpochs) {
  const auto r = run("train-demo --epochs 0 --grid 8 --orient 4 --train-size 16 --test-size 8 --model m.clmd");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("effective-config: command=train-demo epochs=0", 0), 0u);
  const auto csv = read_file(path("metrics.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,loss,accuracy,rotation_consistency");
  EXPECT_TRUE(fs::exists(path("m.clmd")));
  EXPECT_EQ(run("train-demo --pool avg").code, 2);
  EXPECT_EQ(run("train-demo --lr -1").code, 2);
}

TEST_F(Cli, CorruptFilesExitOne) {
  ASSERT_EQ(run("build-graph --kind r2 --nx 4 --out g.clgr").code, 0);
  auto bytes = read_file(path("g.clgr"));
  bytes[0] = 'Z';
  std::ofstream(path("bad.clgr"), std::ios::binary) << bytes;
  const auto r = run("info --graph bad.clgr");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("format error: bad magic"), std::string::npos) << r.err;
  std::ofstream(path("short.clgr"), std::ios::binary) << bytes.substr(0, 10);
  EXPECT_EQ(run("info --graph short.clgr").code, 1);
  EXPECT_EQ(run("info --graph missing.clgr").code, 1);
}
