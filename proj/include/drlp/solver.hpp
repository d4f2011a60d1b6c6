#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drlp/network.hpp"
#include "drlp/primitives.hpp"
#include "drlp/rng.hpp"
#include "drlp/trace.hpp"

namespace drlp {

struct SolverOptions {
  int max_steps = 10000;
  double zero_tol = kZeroTol;
  double dep_tol = kDepTol;
  // scaled by (1 + |grad|) before use
  double descent_tol = 1e-9;
  int position_correction_every = 1;  // 0 = off
  int axis_refresh_every = 64;        // 0 = off
  // rebuild P early once |A^T P^T y - y|_inf exceeds this for a random unit y; 0 = off
  double drift_tol = 1e-9;
  std::uint64_t seed = 0;
  bool keep_trace = true;
  TraceSink on_record;
};

struct SolverState {
  Vector x;
  ActivationPattern s;
  PseudoInverse P;  // owners = tracked critical neurons C
  int next_flip = 0;  // 0-based position in P.owners
  int steps = 0;
  int pivots = 0;
};

enum class SolveStatus { LocalMinimum, Unbounded, NonRegular, StepLimit };

const char* status_name(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::StepLimit;
  Vector x;
  double f = 0.0;
  Vector direction;                      // Unbounded witness
  std::vector<NeuronIndex> diagnostic;   // NonRegular culprits
  std::string message;
  int steps = 0;
  std::vector<TraceRecord> trace;
};

struct AxisChoice {
  Vector axis;
  double alpha = 0.0;  // <g, a>/|a|
  int row = -1;
};

// Row of P minimizing <g, a>/|a|.
AxisChoice choose_axis(const PseudoInverse& P, const Vector& g);
double effective_descent_tol(double descent_tol, const Vector& g);

struct AxisCheck {
  NeuronIndex owner;
  bool active = false;  // owner's bit when the axis was evaluated
  double value = 0.0;   // <a, grad_s>
};

struct CertificationReport {
  bool local_min = false;
  std::vector<AxisCheck> checks;  // 2 n0 entries
};

// Evaluates all 2 n0 region-separating axes at a vertex, flipping owners
// cumulatively. The passed state is not modified.
CertificationReport certify_local_min(const ReluNetwork& net, const SolverState& state,
                                      double descent_tol = 1e-9, const PairGroups& pairs = {},
                                      double dep_tol = kDepTol);

// Moves x onto the owners' hyperplanes: x <- x - (A+)^T r with r the
// oriented subjective arguments of the owners.
void position_correction(const ReluNetwork& net, SolverState& state);
// |A^T P^T y - y|_inf, a one-pass estimate of how far P A is from I.
double biorthogonality_drift(const ReluNetwork& net, const SolverState& state, const Vector& y);
// Rebuilds P from scratch for the current owners (throws DependentColumn).
void refresh_pseudoinverse(const ReluNetwork& net, SolverState& state, double dep_tol = kDepTol);

class DrlSimplex {
 public:
  DrlSimplex(const ReluNetwork& net, SolverOptions opts = {}, PairGroups pairs = {});

  // Pattern at x0; x0 is nudged off hyperplanes first if needed.
  SolverState initialize(const Vector& x0);
  // Descends onto a vertex. Returns an outcome only if the search ends
  // early (unbounded, non-regular, step limit).
  std::optional<SolveOutcome> find_vertex(SolverState& state);
  // Main pivot loop from a vertex.
  SolveOutcome run(SolverState& state);
  SolveOutcome solve(const Vector& x0);

  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  void record(const SolverState& st, Phase phase, std::optional<NeuronIndex> c = std::nullopt,
              std::optional<double> t = std::nullopt, std::optional<double> alpha = std::nullopt);
  SolveOutcome finish(SolverState& st, SolveStatus status, std::string message = {});
  NeuronSet owner_set(const PseudoInverse& P) const;
  // Refreshes P if it has drifted; throws DependentColumn like the refresh.
  void guard_drift(SolverState& st);

  const ReluNetwork& net_;
  SolverOptions opts_;
  PairGroups pairs_;
  Rng rng_;
  std::vector<TraceRecord> trace_;
};

SolveOutcome drlsimplex(const ReluNetwork& net, const Vector& x0, const SolverOptions& opts = {},
                        const PairGroups& pairs = {});

}  // namespace drlp
