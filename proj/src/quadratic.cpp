#include "drlp/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drlp {

QuadraticObjective::QuadraticObjective(Matrix A, Vector lin, double constant)
    : A_(std::move(A)), lin_(std::move(lin)), constant_(constant) {
  if (A_.rows() != A_.cols()) throw DimensionError("quadratic form must be square");
  if (lin_.size() != A_.rows()) throw DimensionError("linear term length must match the quadratic form");
  const double scale = 1.0 + A_.cwiseAbs().maxCoeff();
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("quadratic form is not symmetric");
  }
  if (A_.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw std::invalid_argument("quadratic form is not positive semidefinite");
    }
  }
}

double QuadraticObjective::value(const Vector& x) const { return x.dot(A_ * x) + lin_.dot(x) + constant_; }

Vector QuadraticObjective::gradient(const Vector& x) const { return (A_ + A_.transpose()) * x + lin_; }

Parabola segment_parabola(const QuadraticObjective& q, const Vector& x, const Vector& v) {
  return {v.dot(q.A() * v), x.dot((q.A() + q.A().transpose()) * v) + q.lin().dot(v), q.value(x)};
}

double parabola_step(double a, double b, double t_max) {
  if (a > 0.0) return std::clamp(-b / (2.0 * a), 0.0, t_max);
  return t_max;
}

namespace {

// Orthonormal basis of the complement of span(basis); basis vectors are
// orthonormal already.
Matrix complement_basis(const std::vector<Vector>& basis, int n) {
  if (basis.empty()) return Matrix::Identity(n, n);
  Matrix B(n, basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) B.col(i) = basis[i];
  Eigen::HouseholderQR<Matrix> qr(B);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - static_cast<int>(basis.size()));
}

}  // namespace

SolveOutcome solve_quadratic(const ReluNetwork& net, const QuadraticObjective& q, const Vector& x0,
                             const SolverOptions& opts, const PairGroups& pairs) {
  const int n0 = net.input_dim();
  if (q.dim() != n0) throw DimensionError("quadratic objective dimension must match the network input");

  DrlSimplex starter(net, opts, pairs);
  SolverState st = starter.initialize(x0);
  std::vector<NeuronIndex> active;
  std::vector<TraceRecord> trace;

  auto total = [&](const Vector& x) { return eval(net, x) + q.value(x); };
  auto record = [&](Phase phase, std::optional<NeuronIndex> c = std::nullopt,
                    std::optional<double> t = std::nullopt, std::optional<double> alpha = std::nullopt) {
    if (!opts.keep_trace && !opts.on_record) return;
    TraceRecord r{st.steps, phase, st.x, total(st.x), c, t, alpha};
    if (opts.on_record) opts.on_record(r);
    if (opts.keep_trace) trace.push_back(std::move(r));
  };
  auto finish = [&](SolveStatus status, std::string message = {}) {
    SolveOutcome out;
    out.status = status;
    out.x = st.x;
    out.f = total(st.x);
    out.steps = st.steps;
    out.message = std::move(message);
    out.trace = trace;
    return out;
  };

  for (;;) {
    if (st.steps >= opts.max_steps) return finish(SolveStatus::StepLimit, "step limit reached");
    const Vector g = q.gradient(st.x) + gradient(net, st.s);
    const double tol = effective_descent_tol(opts.descent_tol, g);
    const Matrix U = owner_columns(net, st.s, active);
    const int m = static_cast<int>(active.size());

    // Project -g away from active normals it would cross, until stable.
    Vector v = -g;
    std::vector<Vector> basis;
    std::vector<bool> used(m, false);
    for (bool changed = true; changed;) {
      changed = false;
      for (int i = 0; i < m; ++i) {
        if (used[i]) continue;
        const Vector u = U.col(i);
        if (u.dot(v) >= -1e-12 * u.norm() * v.norm()) continue;
        Vector w = u;
        for (const Vector& b : basis) w -= b.dot(w) * b;
        used[i] = true;
        changed = true;
        if (w.norm() <= 1e-12 * u.norm()) continue;
        w.normalize();
        basis.push_back(w);
        v -= v.dot(w) * w;
      }
    }

    std::optional<Vector> dir;
    if (v.norm() > tol) {
      dir = v;
      // Minimize the quadratic model on the face of the used constraints.
      const Matrix Z = complement_basis(basis, n0);
      if (Z.cols() > 0) {
        const Matrix H = 2.0 * Z.transpose() * q.A() * Z;
        Eigen::LDLT<Matrix> ldlt(H);
        const Vector D = ldlt.vectorD();
        if (ldlt.info() == Eigen::Success && D.minCoeff() > 1e-12 * std::max(1.0, D.maxCoeff())) {
          const Vector vn = -(Z * ldlt.solve(Z.transpose() * g));
          bool ok = vn.dot(g) < 0.0;
          for (int i = 0; i < m && ok; ++i) {
            if (!used[i] && U.col(i).dot(vn) < -1e-12 * U.col(i).norm() * vn.norm()) ok = false;
          }
          if (ok) dir = vn;
        }
      }
    } else if (m > 0) {
      // Multiplier test: leaving hyperplane i along its axis.
      PseudoInverse P;
      try {
        P = build_pseudoinverse(net, st.s, active, opts.dep_tol);
      } catch (const DependentColumn& e) {
        SolveOutcome out = finish(SolveStatus::NonRegular, e.what());
        out.diagnostic = active;
        return out;
      }
      const AxisChoice choice = choose_axis(P, g);
      if (choice.row >= 0 && choice.alpha < -tol) dir = choice.axis;
    }

    if (dir) {
      const Vector& d = *dir;
      std::vector<NeuronIndex> stay;
      NeuronSet ignore(net.layout());
      for (int i = 0; i < m; ++i) {
        ignore.insert(active[i]);
        if (std::abs(U.col(i).dot(d)) <= 1e-9 * U.col(i).norm() * d.norm()) stay.push_back(active[i]);
      }
      const AdvanceResult adv = advance_max(net, st.x, d, st.s, ignore, pairs, opts.zero_tol);
      const Parabola par = segment_parabola(q, st.x, d);
      const double slope = g.dot(d);
      if (!adv && par.a <= 1e-14 * d.squaredNorm()) {
        SolveOutcome out = finish(SolveStatus::Unbounded, "objective decreases without bound along the direction");
        out.direction = d;
        return out;
      }
      const double t_max = adv ? std::max(adv->step, 0.0) : std::numeric_limits<double>::infinity();
      const double t = parabola_step(par.a, slope, t_max);
      const bool hit = adv && t >= t_max;
      st.x += t * d;
      if (hit) {
        stay.push_back(adv->neuron);
        flip_in_place(st.s, adv->neuron, pairs);
      }
      active = std::move(stay);
      if (opts.position_correction_every > 0 && !active.empty()) {
        try {
          st.P = build_pseudoinverse(net, st.s, active, opts.dep_tol);
        } catch (const DependentColumn& e) {
          SolveOutcome out = finish(SolveStatus::NonRegular, e.what());
          out.diagnostic = active;
          return out;
        }
        position_correction(net, st);
      }
      st.next_flip = 0;
      ++st.steps;
      record(Phase::Pivot, hit ? std::optional<NeuronIndex>(adv->neuron) : std::nullopt, t, slope / d.norm());
      continue;
    }

    if (st.next_flip < m) {
      const NeuronIndex c = active[st.next_flip];
      flip_in_place(st.s, c, pairs);
      ++st.next_flip;
      ++st.steps;
      record(Phase::Flip, c);
      continue;
    }
    record(Phase::Certify);
    return finish(SolveStatus::LocalMinimum);
  }
}

}  // namespace drlp
