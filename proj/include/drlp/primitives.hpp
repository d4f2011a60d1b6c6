#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "drlp/network.hpp"

namespace drlp {

// New column lies (numerically) in the span of the current ones.
class DependentColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Axis update denominator vanished.
class Degenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rows of A+ for the matrix A whose columns are the oriented normals of
// `owners` (under a pattern held by the caller). Row k belongs to owners[k].
struct PseudoInverse {
  using Rows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Rows rows;
  std::vector<NeuronIndex> owners;

  static PseudoInverse empty(int n0) { return {Rows(0, n0), {}}; }
  int size() const { return static_cast<int>(rows.rows()); }
  int dim() const { return static_cast<int>(rows.cols()); }
  Vector row(int k) const { return rows.row(k).transpose(); }
};

constexpr double kDepTol = 1e-8;
constexpr double kZeroTol = 1e-9;

// <v, u~_{s,c}> for each owner c, gathered from one inner-product pass.
Vector owner_products(const PseudoInverse& P, const ReluNetwork& net, const ActivationPattern& s,
                      const Vector& v);

// (A+)^T w. With w_i = <v, column_i> this is the projection of v onto the
// column span.
Vector project(const PseudoInverse& P, const Vector& column_products);
Vector project(const PseudoInverse& P, const ReluNetwork& net, const ActivationPattern& s,
               const Vector& v);

// Low-level form: `column_products` must hold <u, column_i> for the current
// columns.
PseudoInverse add_pseudorow(PseudoInverse P, const Vector& u, const Vector& column_products,
                            NeuronIndex owner, double dep_tol = kDepTol);
PseudoInverse add_pseudorow(PseudoInverse P, const ReluNetwork& net, const ActivationPattern& s,
                            const Vector& u, NeuronIndex owner, double dep_tol = kDepTol);
PseudoInverse remove_pseudorow(PseudoInverse P, int row);
PseudoInverse add_axis(PseudoInverse P, const ReluNetwork& net, const ActivationPattern& s,
                       NeuronIndex c, double dep_tol = kDepTol);

ActivationPattern flip(ActivationPattern s, NeuronIndex c);
// Flips c and, if paired, its partner.
ActivationPattern flip(ActivationPattern s, NeuronIndex c, const PairGroups& pairs);
void flip_in_place(ActivationPattern& s, NeuronIndex c, const PairGroups& pairs);

// Recomputes row `row` (owner c) after s_new = flip(s_old, c). Other rows
// are still valid axes under s_new.
PseudoInverse update_axis_new_region(PseudoInverse P, int row, const ReluNetwork& net,
                                     const ActivationPattern& s_new, NeuronIndex c,
                                     double dep_tol = kDepTol);

struct Crossing {
  double step = 0.0;
  NeuronIndex neuron;
  int ties = 0;  // other candidates at the same step
};

// nullopt means unbounded along v.
using AdvanceResult = std::optional<Crossing>;

AdvanceResult advance_max(const ReluNetwork& net, const Vector& x, const Vector& v,
                          const ActivationPattern& s, const NeuronSet& ignore,
                          const PairGroups& pairs = {}, double zero_tol = kZeroTol);

// From-scratch oracle / refresh: pseudoinverse of the oriented-normal
// columns of `owners` under s. Throws DependentColumn if rank deficient.
PseudoInverse build_pseudoinverse(const ReluNetwork& net, const ActivationPattern& s,
                                  const std::vector<NeuronIndex>& owners, double dep_tol = kDepTol);
// Columns u~_{s,c} for the owners, as an n0 x m matrix.
Matrix owner_columns(const ReluNetwork& net, const ActivationPattern& s,
                     const std::vector<NeuronIndex>& owners);

}  // namespace drlp
