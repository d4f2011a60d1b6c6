#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "drlp/model_io.hpp"
#include "drlp/problems.hpp"
#include "drlp/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace drlp;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(DRLP_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + "drlp_cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<json> jsonl(const std::string& path) {
  std::vector<json> out;
  std::ifstream f(path);
  std::string line;
  while (std::getline(f, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

void write_csv(const std::string& path, const Matrix& X, const Vector& Y) {
  std::ofstream f(path);
  f.precision(17);
  for (Eigen::Index j = 0; j < X.cols(); ++j) f << "x" << j + 1 << ",";
  f << "y\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) f << X(i, j) << ",";
    f << Y[i] << "\n";
  }
}

std::pair<Matrix, Vector> synthetic(int N, int p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X = Matrix::NullaryExpr(N, p, [&] { return rng.uniform(-2, 2); });
  Vector beta = rng.uniform_vector(p, -1, 1);
  Vector Y = X * beta + Vector::NullaryExpr(N, [&] { return 0.3 * rng.uniform(-1, 1); });
  return {X, Y};
}

void expect_nonincreasing(const std::vector<json>& trace) {
  ASSERT_FALSE(trace.empty());
  double last = std::numeric_limits<double>::infinity();
  for (const json& r : trace) {
    const double f = r["f"].get<double>();
    EXPECT_LE(f, last + 1e-9 * (1 + std::abs(last)));
    last = f;
  }
}

}  // namespace

TEST(Cli, RandomNetIsDeterministic) {
  const std::string a = tmp("rn_a.json"), b = tmp("rn_b.json");
  ASSERT_EQ(run("random-net --topology 2,10,10,1 --seed 7 --out " + a).code, 0);
  ASSERT_EQ(run("random-net --topology 2,10,10,1 --seed 7 --out " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(load_model(a).net.widths(), (std::vector<int>{2, 10, 10, 1}));
  EXPECT_EQ(run("random-net --topology 2").code, 1);
  EXPECT_EQ(run("random-net").code, 1);
}

TEST(Cli, SolveOneDimensionalDemo) {
  const std::string model = tmp("deep1d.json"), trace = tmp("deep1d.jsonl"), out = tmp("deep1d_out.json");
  ASSERT_EQ(run("random-net --topology 1,50,10,10,10,10,10,1 --seed 3 --out " + model).code, 0);
  const CliRun r = run("solve --model " + model + " --x0 0 --trace " + trace + " --out " + out);
  ASSERT_EQ(r.code, 0);
  const json o = json::parse(slurp(out));
  EXPECT_EQ(o["status"], "LocalMinimum");
  for (const char* key : {"x", "f", "steps", "wall_ms"}) EXPECT_TRUE(o.contains(key)) << key;
  const auto records = jsonl(trace);
  expect_nonincreasing(records);
  for (const json& rec : records)
    for (const char* key : {"step", "phase", "x", "f", "neuron", "t", "alpha"}) EXPECT_TRUE(rec.contains(key));
}

TEST(Cli, SolveTraceIsByteIdentical) {
  const std::string model = tmp("det.json"), t1 = tmp("det1.jsonl"), t2 = tmp("det2.jsonl");
  ASSERT_EQ(run("random-net --topology 2,10,10,10,1 --seed 5 --out " + model).code, 0);
  const std::string common = "solve --model " + model + " --x0-random --seed 11 --out " + tmp("det_out.json");
  ASSERT_EQ(run(common + " --trace " + t1).code, 0);
  ASSERT_EQ(run(common + " --trace " + t2).code, 0);
  EXPECT_EQ(slurp(t1), slurp(t2));
  EXPECT_FALSE(slurp(t1).empty());
}

TEST(Cli, SolveExitCodes) {
  const std::string model = tmp("unbounded.json");
  save_model(model, fixtures::pass_through());
  CliRun r = run("solve --model " + model + " --x0 0");
  EXPECT_EQ(r.code, 2);
  const json o = json::parse(r.out);
  EXPECT_EQ(o["status"], "Unbounded");
  EXPECT_TRUE(o.contains("direction"));
  EXPECT_EQ(run("solve --model " + tmp("does_not_exist.json") + " --x0 0").code, 1);
  EXPECT_EQ(run("solve --model " + model + " --x0 0,1").code, 1);
  EXPECT_EQ(run("solve --model " + model + " --x0 0 --max-steps 0").code, 1);

  const std::string small = tmp("steplimit.json");
  save_model(small, build_random({2, 10, 10, 10, 1}, 4));
  EXPECT_EQ(run("solve --model " + small + " --x0 0.3,0.2 --max-steps 1").code, 4);
}

TEST(Cli, SolveMultiStart) {
  const std::string model = tmp("multi.json");
  save_model(model, build_random({2, 10, 10, 10, 1}, 9));
  const CliRun single = run("solve --model " + model + " --x0-random --seed 1");
  const CliRun multi = run("solve --model " + model + " --x0-random --seed 1 --starts 4");
  ASSERT_EQ(multi.code, 0);
  ASSERT_EQ(single.code, 0);
  EXPECT_LE(json::parse(multi.out)["f"].get<double>(), json::parse(single.out)["f"].get<double>() + 1e-12);
}

TEST(Cli, QuantileLadMatchesExhaustiveVertices) {
  const auto [X, Y] = synthetic(15, 2, 11);
  const std::string data = tmp("lad.csv");
  write_csv(data, X, Y);
  const CliRun r = run("quantile --data " + data + " --alpha 0.5 --lambda 0 --x0 0,0,0");
  ASSERT_EQ(r.code, 0);
  const json o = json::parse(r.out);
  EXPECT_NEAR(o["f"].get<double>(), 0.5 * oracle::lad_exhaustive(X, Y), 1e-8);
  EXPECT_EQ(o["coefficients"].size(), 3u);
  EXPECT_EQ(o["names"][0], "(intercept)");
}

TEST(Cli, LassoWithoutPenaltyIsLeastSquares) {
  const auto [X, Y] = synthetic(10, 3, 21);
  const std::string data = tmp("lasso.csv");
  write_csv(data, X, Y);
  const CliRun r = run("lasso --data " + data + " --lambda 0 --x0 0,0,0");
  ASSERT_EQ(r.code, 0);
  const json o = json::parse(r.out);
  const Vector ls = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(o["coefficients"][j].get<double>(), ls[j], 1e-8);
}

TEST(Cli, CladFindsCertifiedMinimum) {
  Matrix X(6, 1);
  X << 0.5, 1.0, 1.5, 2.0, -1.0, 3.0;
  Vector Y(6);
  Y << 1.2, 1.8, 3.5, 3.9, 0.4, 5.7;
  const std::string data = tmp("clad.csv");
  write_csv(data, X, Y);
  const CliRun r = run("clad --data " + data + " --x0 0.5");
  ASSERT_EQ(r.code, 0);
  const json o = json::parse(r.out);
  Vector theta(1);
  theta << o["x"][0].get<double>();
  auto loss = [&](const Vector& t) {
    double s = 0;
    for (int i = 0; i < 6; ++i) s += std::abs(Y[i] - std::max(X(i, 0) * t[0], 0.0));
    return s;
  };
  EXPECT_GE(oracle::probe_ball(loss, theta, 1e-4, 1000, 2), -1e-8);
}

TEST(Cli, TrainL1WritesModel) {
  const std::string base = tmp("base.json"), data = tmp("train.csv"), trained = tmp("trained.json");
  ASSERT_EQ(run("random-net --topology 2,3,2,1 --seed 2 --out " + base).code, 0);
  const auto [X, Y] = synthetic(8, 2, 5);
  write_csv(data, X, Y);
  const CliRun r = run("train-l1 --model " + base + " --data " + data + " --out-model " + trained);
  ASSERT_TRUE(r.code == 0 || r.code == 3) << r.out;
  const Model m = load_model(trained);
  double before = 0, after = 0;
  const Model b = load_model(base);
  for (int i = 0; i < 8; ++i) {
    before += std::abs(eval(b.net, X.row(i).transpose()) - Y[i]);
    after += std::abs(eval(m.net, X.row(i).transpose()) - Y[i]);
  }
  EXPECT_LE(after, before + 1e-12);
  EXPECT_NEAR(json::parse(r.out)["f"].get<double>(), after, 1e-9);
}

TEST(Cli, Bounds) {
  const CliRun r = run("bounds --topology 2,2,1");
  ASSERT_EQ(r.code, 0);
  const json o = json::parse(r.out);
  EXPECT_EQ(o["montufar"], 8);
  EXPECT_LE(o["improved"].get<int>(), 8);
  // numbers too large for 64 bits are printed in full
  const CliRun big = run("bounds --topology 64,64,64,64");
  ASSERT_EQ(big.code, 0);
  EXPECT_NE(big.out.find("6277101735386680763835789423207666416102355444464034512896"), std::string::npos);
  EXPECT_EQ(run("bounds --topology 2,x").code, 1);
}

TEST(Cli, Regions) {
  const std::string e1 = tmp("e1.json"), zero = tmp("zero.json");
  save_model(e1, fixtures::e1());
  CliRun r = run("regions --model " + e1 + " --box -10,10 --samples 100000 --seed 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["empirical"], 7);
  save_model(zero, ReluNetwork({Matrix::Zero(2, 2), Matrix::Zero(1, 2)}, {Vector::Zero(2), Vector::Zero(1)}));
  r = run("regions --model " + zero + " --box -1,1,-2,2 --samples 1000");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["empirical"], 1);
  EXPECT_EQ(run("regions --model " + zero + " --box -1,1,2").code, 1);
}

TEST(Cli, CheckRegularNetwork) {
  const std::string model = tmp("check.json");
  ASSERT_EQ(run("random-net --topology 3,6,5,1 --seed 4 --out " + model).code, 0);
  const CliRun r = run("check --model " + model + " --seed 1 --points 50");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS gradient_fd"), std::string::npos);
  EXPECT_NE(r.out.find("PASS vertex_pseudoinverse"), std::string::npos) << r.out;
}

TEST(Cli, CheckReportsDuplicatedHyperplanes) {
  const std::string model = tmp("dup.json");
  save_model(model, ReluNetwork({fixtures::mat(3, 2, {1, -1, 1, -1, 1, 1}), fixtures::mat(1, 3, {1, 1, 1})},
                                {fixtures::vec({0, 0, 0}), fixtures::vec({0})}));
  const CliRun r = run("check --model " + model + " --seed 1 --points 20");
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.out.find("FAIL vertex_pseudoinverse: NonRegular"), std::string::npos) << r.out;
}

TEST(Cli, CheckZeroWeights) {
  const std::string model = tmp("zero_check.json");
  save_model(model, ReluNetwork({Matrix::Zero(3, 2), Matrix::Zero(1, 3)}, {Vector::Zero(3), Vector::Zero(1)}));
  const CliRun r = run("check --model " + model + " --points 20");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS gradient_fd"), std::string::npos);
}
