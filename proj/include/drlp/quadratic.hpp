#pragma once

#include "drlp/network.hpp"
#include "drlp/solver.hpp"

namespace drlp {

// q(x) = x^T A x + <lin, x> + constant, A symmetric positive semidefinite.
class QuadraticObjective {
 public:
  QuadraticObjective() = default;
  QuadraticObjective(Matrix A, Vector lin, double constant);

  int dim() const { return static_cast<int>(A_.rows()); }
  const Matrix& A() const { return A_; }
  const Vector& lin() const { return lin_; }
  double constant() const { return constant_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

 private:
  Matrix A_;
  Vector lin_;
  double constant_ = 0.0;
};

struct Parabola {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// q(x + t v) = a t^2 + b t + c
Parabola segment_parabola(const QuadraticObjective& q, const Vector& x, const Vector& v);
// Minimizer of a t^2 + b t on [0, t_max]; t_max may be +inf.
double parabola_step(double a, double b, double t_max);

// Minimizes eval(net, x) + q(x). Visits arbitrary points, not only vertices.
SolveOutcome solve_quadratic(const ReluNetwork& net, const QuadraticObjective& q, const Vector& x0,
                             const SolverOptions& opts = {}, const PairGroups& pairs = {});

}  // namespace drlp
