#include <gtest/gtest.h>

#include <limits>

#include "drlp/problems.hpp"
#include "drlp/quadratic.hpp"
#include "drlp/rng.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace drlp;
using fixtures::vec;

namespace {

// Network that is identically zero on R^n.
ReluNetwork zero_net(int n) { return ReluNetwork({Matrix::Zero(1, n), Matrix::Zero(1, 1)}, {vec({0}), vec({0})}); }

void expect_strictly_decreasing(const SolveOutcome& out) {
  double last = std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : out.trace) {
    if (r.phase != Phase::Pivot) continue;
    EXPECT_LT(r.f, last) << "step " << r.step;
    last = r.f;
  }
}

}  // namespace

TEST(Quadratic, RejectsBadForms) {
  EXPECT_THROW(QuadraticObjective(fixtures::mat(2, 2, {1, 1, 0, 1}), vec({0, 0}), 0), std::invalid_argument);
  EXPECT_THROW(QuadraticObjective(fixtures::mat(2, 2, {1, 0, 0, -1}), vec({0, 0}), 0), std::invalid_argument);
  EXPECT_THROW(QuadraticObjective(fixtures::mat(1, 1, {1}), vec({0, 0}), 0), DimensionError);
}

TEST(Quadratic, SegmentParabola) {
  const QuadraticObjective q(fixtures::mat(1, 1, {1}), vec({0}), 0);
  Parabola p = segment_parabola(q, vec({3}), vec({1}));
  EXPECT_DOUBLE_EQ(p.a, 1);
  EXPECT_DOUBLE_EQ(p.b, 6);
  EXPECT_DOUBLE_EQ(p.c, 9);
  p = segment_parabola(q, vec({3}), vec({0}));
  EXPECT_EQ(p.a, 0);
  EXPECT_EQ(p.b, 0);
  EXPECT_EQ(p.c, 9);

  Rng rng(3);
  const Matrix B = Matrix::NullaryExpr(3, 3, [&] { return rng.uniform(-1, 1); });
  const QuadraticObjective r(B.transpose() * B, rng.uniform_vector(3, -1, 1), 0.7);
  const Vector x = rng.uniform_vector(3, -1, 1), v = rng.uniform_vector(3, -1, 1);
  p = segment_parabola(r, x, v);
  for (double t : {0.1, 0.7}) EXPECT_NEAR(r.value(x + t * v), p.a * t * t + p.b * t + p.c, 1e-10);
}

TEST(Quadratic, ParabolaStep) {
  EXPECT_DOUBLE_EQ(parabola_step(1, -4, 10), 2);
  EXPECT_DOUBLE_EQ(parabola_step(1, -4, 1), 1);
  EXPECT_DOUBLE_EQ(parabola_step(0, -1, 5), 5);
  EXPECT_DOUBLE_EQ(parabola_step(1, -4, std::numeric_limits<double>::infinity()), 2);
}

TEST(Quadratic, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  const Matrix B = Matrix::NullaryExpr(4, 4, [&] { return rng.uniform(-1, 1); });
  const QuadraticObjective q(B.transpose() * B, rng.uniform_vector(4, -1, 1), 1.5);
  const Vector x = rng.uniform_vector(4, -1, 1);
  const Vector fd = oracle::fd_gradient([&](const Vector& y) { return q.value(y); }, x);
  EXPECT_LE((q.gradient(x) - fd).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(Quadratic, PureQuadraticOneStep) {
  // |x - (1,2)|^2
  const QuadraticObjective q(Matrix::Identity(2, 2), vec({-2, -4}), 5);
  const SolveOutcome out = solve_quadratic(zero_net(2), q, vec({0, 0}));
  ASSERT_EQ(out.status, SolveStatus::LocalMinimum) << out.message;
  EXPECT_LE((out.x - vec({1, 2})).lpNorm<Eigen::Infinity>(), 1e-8);
  int moves = 0;
  for (const TraceRecord& r : out.trace) moves += r.phase == Phase::Pivot;
  EXPECT_EQ(moves, 1);
}

TEST(Quadratic, ReluPlusParabola) {
  // relu(x - 1) + x^2
  const ReluNetwork net({fixtures::mat(1, 1, {1}), fixtures::mat(1, 1, {1})}, {vec({-1}), vec({0})});
  const QuadraticObjective q(fixtures::mat(1, 1, {1}), vec({0}), 0);
  for (double x0 : {3.0, -2.0, 0.5}) {
    const SolveOutcome out = solve_quadratic(net, q, vec({x0}));
    ASSERT_EQ(out.status, SolveStatus::LocalMinimum) << out.message;
    EXPECT_NEAR(out.x[0], 0.0, 1e-10) << x0;
    expect_strictly_decreasing(out);
  }
}

TEST(Quadratic, KinkMinimum) {
  // |x| + 0.25 (x - 1)^2: one-sided slopes at 0 are 0.5 and -1.5
  const ReluNetwork net({fixtures::mat(2, 1, {1, -1}), fixtures::mat(1, 2, {1, 1})}, {vec({0, 0}), vec({0})});
  const PairGroups pairs(net, {{{0, 0}, {0, 1}}});
  const QuadraticObjective q(fixtures::mat(1, 1, {0.25}), vec({-0.5}), 0.25);
  const SolveOutcome out = solve_quadratic(net, q, vec({4}), {}, pairs);
  ASSERT_EQ(out.status, SolveStatus::LocalMinimum) << out.message;
  EXPECT_NEAR(out.x[0], 0.0, 1e-12);
  expect_strictly_decreasing(out);
}

TEST(Quadratic, UnboundedWhenQuadraticIsFlat) {
  const QuadraticObjective q(Matrix::Zero(1, 1), vec({0}), 0);
  const SolveOutcome out = solve_quadratic(fixtures::pass_through(), q, vec({0}));
  EXPECT_EQ(out.status, SolveStatus::Unbounded);
}

TEST(Quadratic, RandomNetPlusConvexQuadraticIsLocalMin) {
  Rng rng(77);
  for (int seed = 0; seed < 8; ++seed) {
    const ReluNetwork net = build_random({3, 6, 5, 1}, 200 + seed);
    const Matrix B = Matrix::NullaryExpr(3, 3, [&] { return rng.uniform(-1, 1); });
    const QuadraticObjective q(B.transpose() * B + 0.1 * Matrix::Identity(3, 3), Vector::Zero(3), 0);
    SolverOptions o;
    o.seed = seed;
    const SolveOutcome out = solve_quadratic(net, q, rng.uniform_vector(3, -1, 1), o);
    ASSERT_EQ(out.status, SolveStatus::LocalMinimum) << out.message;
    expect_strictly_decreasing(out);
    auto total = [&](const Vector& y) { return eval(net, y) + q.value(y); };
    EXPECT_GE(oracle::probe_ball(total, out.x, 1e-4, 1000, seed), -1e-8);
  }
}
