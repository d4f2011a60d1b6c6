#include "drlp/solver.hpp"

#include <cmath>
#include <limits>

namespace drlp {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::LocalMinimum: return "LocalMinimum";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NonRegular: return "NonRegular";
    case SolveStatus::StepLimit: return "StepLimit";
  }
  return "unknown";
}

double effective_descent_tol(double descent_tol, const Vector& g) { return descent_tol * (1.0 + g.norm()); }

AxisChoice choose_axis(const PseudoInverse& P, const Vector& g) {
  AxisChoice best;
  best.alpha = std::numeric_limits<double>::infinity();
  for (int k = 0; k < P.size(); ++k) {
    const double nrm = P.rows.row(k).norm();
    if (nrm == 0.0) continue;
    const double a = P.rows.row(k).dot(g.transpose()) / nrm;
    if (a < best.alpha) {
      best.alpha = a;
      best.row = k;
    }
  }
  if (best.row >= 0) best.axis = P.row(best.row);
  return best;
}

CertificationReport certify_local_min(const ReluNetwork& net, const SolverState& state, double descent_tol,
                                      const PairGroups& pairs, double dep_tol) {
  CertificationReport rep;
  rep.local_min = true;
  PseudoInverse P = state.P;
  ActivationPattern s = state.s;
  auto check = [&](int k, const Vector& g) {
    const Vector a = P.row(k);
    const double value = a.dot(g);
    rep.checks.push_back({P.owners[k], s.active(P.owners[k]), value});
    if (value < -effective_descent_tol(descent_tol, g) * a.norm()) rep.local_min = false;
  };
  Vector g = gradient(net, s);
  for (int k = 0; k < P.size(); ++k) check(k, g);
  for (int k = 0; k < P.size(); ++k) {
    const NeuronIndex c = P.owners[k];
    flip_in_place(s, c, pairs);
    P = update_axis_new_region(std::move(P), k, net, s, c, dep_tol);
    g = gradient(net, s);
    check(k, g);
  }
  return rep;
}

void position_correction(const ReluNetwork& net, SolverState& state) {
  if (state.P.size() == 0) return;
  const LayerValues args = subjective_arguments(net, state.s, state.x);
  Vector r(state.P.size());
  for (int i = 0; i < state.P.size(); ++i) {
    const NeuronIndex c = state.P.owners[i];
    r[i] = state.s.active(c) ? args[c.layer][c.pos] : -args[c.layer][c.pos];
  }
  state.x -= state.P.rows.transpose() * r;
}

void refresh_pseudoinverse(const ReluNetwork& net, SolverState& state, double dep_tol) {
  state.P = build_pseudoinverse(net, state.s, state.P.owners, dep_tol);
}

double biorthogonality_drift(const ReluNetwork& net, const SolverState& state, const Vector& y) {
  if (state.P.size() == 0) return 0.0;
  const Vector v = state.P.rows.transpose() * y;
  return (owner_products(state.P, net, state.s, v) - y).lpNorm<Eigen::Infinity>();
}

DrlSimplex::DrlSimplex(const ReluNetwork& net, SolverOptions opts, PairGroups pairs)
    : net_(net), opts_(std::move(opts)), pairs_(std::move(pairs)), rng_(opts_.seed) {}

NeuronSet DrlSimplex::owner_set(const PseudoInverse& P) const {
  NeuronSet set(net_.layout());
  for (const NeuronIndex& c : P.owners) set.insert(c);
  return set;
}

void DrlSimplex::guard_drift(SolverState& st) {
  if (opts_.drift_tol <= 0 || st.P.size() == 0) return;
  const Vector y = rng_.unit_direction(st.P.size());
  if (biorthogonality_drift(net_, st, y) > opts_.drift_tol) refresh_pseudoinverse(net_, st, opts_.dep_tol);
}

void DrlSimplex::record(const SolverState& st, Phase phase, std::optional<NeuronIndex> c,
                        std::optional<double> t, std::optional<double> alpha) {
  if (!opts_.keep_trace && !opts_.on_record) return;
  TraceRecord r{st.steps, phase, st.x, eval(net_, st.x), c, t, alpha};
  if (opts_.on_record) opts_.on_record(r);
  if (opts_.keep_trace) trace_.push_back(std::move(r));
}

SolveOutcome DrlSimplex::finish(SolverState& st, SolveStatus status, std::string message) {
  SolveOutcome out;
  out.status = status;
  out.x = st.x;
  out.f = eval(net_, st.x);
  out.steps = st.steps;
  out.message = std::move(message);
  if (opts_.keep_trace) out.trace = trace_;
  return out;
}

SolverState DrlSimplex::initialize(const Vector& x0) {
  if (x0.size() != net_.input_dim()) throw DimensionError("x0 has the wrong length");
  SolverState st;
  st.P = PseudoInverse::empty(net_.input_dim());
  Vector x = x0;
  for (int attempt = 0;; ++attempt) {
    st.s = activation_pattern(net_, x);
    for (const auto& [a, b] : pairs_.pairs()) st.s.set(b, !st.s.active(a));
    if (critical_indices(net_, st.s, x, opts_.zero_tol).empty() || attempt == 64) break;
    x = x0 + 1e-7 * rng_.unit_direction(x0.size());
  }
  st.x = x;
  return st;
}

std::optional<SolveOutcome> DrlSimplex::find_vertex(SolverState& st) {
  const int n0 = net_.input_dim();
  while (st.P.size() < n0) {
    if (st.steps >= opts_.max_steps) return finish(st, SolveStatus::StepLimit, "step limit during vertex search");
    const Vector g = gradient(net_, st.s);
    Vector v = -g;
    v -= project(st.P, net_, st.s, v);
    bool flat = v.norm() <= 1e-12 * (1.0 + g.norm());
    if (flat) {
      // Gradient lies in the span of the tracked normals: any direction in
      // the orthogonal complement keeps f constant.
      // Redraw if the sample happens to lie (almost) in that span.
      for (int attempt = 0; attempt < 32; ++attempt) {
        v = rng_.unit_direction(n0);
        v -= project(st.P, net_, st.s, v);
        if (v.norm() > 1e-3) break;
      }
    }
    const NeuronSet ignore = owner_set(st.P);
    AdvanceResult adv = advance_max(net_, st.x, v, st.s, ignore, pairs_, opts_.zero_tol);
    if (!adv && flat) {
      v = -v;
      adv = advance_max(net_, st.x, v, st.s, ignore, pairs_, opts_.zero_tol);
    }
    if (!adv) {
      if (!flat) {
        SolveOutcome out = finish(st, SolveStatus::Unbounded, "no crossing along the projected descent direction");
        out.direction = v;
        return out;
      }
      SolveOutcome out = finish(st, SolveStatus::NonRegular, "current region contains a line of constant value and has no vertex");
      out.diagnostic = st.P.owners;
      return out;
    }
    if (adv->step * v.norm() < -1e-9 * (1.0 + st.x.lpNorm<Eigen::Infinity>())) {
      SolveOutcome out = finish(st, SolveStatus::NonRegular, "pattern mismatch: backward step during vertex search");
      out.diagnostic = st.P.owners;
      out.diagnostic.push_back(adv->neuron);
      return out;
    }
    st.x += adv->step * v;
    const std::vector<NeuronIndex> owners = st.P.owners;
    try {
      st.P = add_axis(std::move(st.P), net_, st.s, adv->neuron, opts_.dep_tol);
    } catch (const DependentColumn& e) {
      SolveOutcome out = finish(st, SolveStatus::NonRegular, e.what());
      out.diagnostic = owners;
      out.diagnostic.push_back(adv->neuron);
      return out;
    }
    ++st.steps;
    record(st, Phase::FindVertex, adv->neuron, adv->step, v.dot(g) / v.norm());
  }
  if (opts_.position_correction_every > 0) {
    position_correction(net_, st);
    record(st, Phase::Correct);
  }
  return std::nullopt;
}

SolveOutcome DrlSimplex::run(SolverState& st) {
  const int n0 = net_.input_dim();
  std::vector<NeuronIndex> owners;  // owners before the step in progress
  auto non_regular = [&](const std::exception& e, NeuronIndex c) {
    SolveOutcome out = finish(st, SolveStatus::NonRegular, e.what());
    out.diagnostic = owners;
    out.diagnostic.push_back(c);
    return out;
  };
  for (;;) {
    if (st.steps >= opts_.max_steps) return finish(st, SolveStatus::StepLimit, "step limit reached");
    const Vector g = gradient(net_, st.s);
    const AxisChoice choice = choose_axis(st.P, g);
    owners = st.P.owners;
    if (choice.row >= 0 && choice.alpha < -effective_descent_tol(opts_.descent_tol, g)) {
      const int i = choice.row;
      const NeuronSet ignore = owner_set(st.P);
      PseudoInverse reduced = remove_pseudorow(st.P, i);
      const AdvanceResult adv = advance_max(net_, st.x, choice.axis, st.s, ignore, pairs_, opts_.zero_tol);
      if (!adv) {
        SolveOutcome out = finish(st, SolveStatus::Unbounded, "no crossing along a descending axis");
        out.direction = choice.axis;
        return out;
      }
      const NeuronIndex c = adv->neuron;
      if (adv->step * choice.axis.norm() < -1e-9 * (1.0 + st.x.lpNorm<Eigen::Infinity>())) {
        return non_regular(std::runtime_error("pattern mismatch: backward pivot step"), c);
      }
      st.x += adv->step * choice.axis;
      try {
        st.P = add_axis(std::move(reduced), net_, st.s, c, opts_.dep_tol);
        flip_in_place(st.s, c, pairs_);
        // the new owner sits in the last row
        const int last = st.P.size() - 1;
        st.P = update_axis_new_region(std::move(st.P), last, net_, st.s, c, opts_.dep_tol);
        guard_drift(st);
      } catch (const DependentColumn& e) {
        return non_regular(e, c);
      } catch (const Degenerate& e) {
        return non_regular(e, c);
      }
      st.next_flip = 0;
      ++st.steps;
      ++st.pivots;
      record(st, Phase::Pivot, c, adv->step, choice.alpha);
      if (opts_.position_correction_every > 0 && st.pivots % opts_.position_correction_every == 0) {
        position_correction(net_, st);
        record(st, Phase::Correct);
      }
      if (opts_.axis_refresh_every > 0 && st.pivots % opts_.axis_refresh_every == 0) {
        try {
          refresh_pseudoinverse(net_, st, opts_.dep_tol);
        } catch (const DependentColumn& e) {
          return non_regular(e, c);
        }
      }
      continue;
    }
    if (st.next_flip >= n0) {
      record(st, Phase::Certify, std::nullopt, std::nullopt, choice.alpha);
      return finish(st, SolveStatus::LocalMinimum);
    }
    const NeuronIndex c = st.P.owners[st.next_flip];
    try {
      flip_in_place(st.s, c, pairs_);
      st.P = update_axis_new_region(std::move(st.P), st.next_flip, net_, st.s, c, opts_.dep_tol);
      guard_drift(st);
    } catch (const Degenerate& e) {
      return non_regular(e, c);
    } catch (const DependentColumn& e) {
      return non_regular(e, c);
    }
    ++st.next_flip;
    ++st.steps;
    record(st, Phase::Flip, c, std::nullopt, choice.alpha);
  }
}

SolveOutcome DrlSimplex::solve(const Vector& x0) {
  trace_.clear();
  SolverState st = initialize(x0);
  if (auto early = find_vertex(st)) return *early;
  return run(st);
}

SolveOutcome drlsimplex(const ReluNetwork& net, const Vector& x0, const SolverOptions& opts,
                        const PairGroups& pairs) {
  DrlSimplex solver(net, opts, pairs);
  return solver.solve(x0);
}

}  // namespace drlp
