#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "drlp/pattern.hpp"

namespace drlp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One vector per hidden layer (ReLU arguments, inner products, ...).
using LayerValues = std::vector<Vector>;
// Entries in {-1, 0, +1}.
using HyperplanePattern = std::vector<std::vector<int>>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// f(x) = W_{L+1} g_L(...g_1(x)) + b_{L+1},  g_l(y) = ReLU(W_l y + b_l).
// weights[k] / biases[k] hold W_{k+1} / b_{k+1}.
class ReluNetwork {
 public:
  ReluNetwork() = default;
  ReluNetwork(std::vector<Matrix> weights, std::vector<Vector> biases);

  int input_dim() const { return widths_.front(); }
  int hidden_layers() const { return static_cast<int>(weights_.size()) - 1; }
  // n_0 .. n_{L+1}
  const std::vector<int>& widths() const { return widths_; }
  std::vector<int> hidden_widths() const;
  const NeuronLayout& layout() const { return layout_; }
  std::size_t neuron_count() const { return layout_.size(); }

  const Matrix& weight(int k) const { return weights_[k]; }
  const Vector& bias(int k) const { return biases_[k]; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

 private:
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  std::vector<int> widths_;
  NeuronLayout layout_;
};

// Neuron pairs whose (W, b) rows are exact negatives. The first member is
// the representative; the second always carries the complementary bit.
class PairGroups {
 public:
  PairGroups() = default;
  PairGroups(const ReluNetwork& net, std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs);

  bool empty() const { return pairs_.empty(); }
  const std::vector<std::pair<NeuronIndex, NeuronIndex>>& pairs() const { return pairs_; }
  std::optional<NeuronIndex> partner(NeuronIndex c) const;
  bool is_secondary(NeuronIndex c) const;
  bool is_secondary_flat(std::size_t k) const { return !secondary_.empty() && secondary_[k] != 0; }

 private:
  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs_;
  NeuronLayout layout_;
  std::vector<int> partner_;  // flat index of partner or -1
  std::vector<std::uint8_t> secondary_;
};

ActivationPattern empty_pattern(const ReluNetwork& net);

double eval(const ReluNetwork& net, const Vector& x);
LayerValues relu_arguments(const ReluNetwork& net, const Vector& x);
HyperplanePattern hyperplane_pattern(const ReluNetwork& net, const Vector& x, double zero_tol);
ActivationPattern activation_pattern(const ReluNetwork& net, const Vector& x);
bool is_compatible(const HyperplanePattern& h, const ActivationPattern& s);

double subjective_eval(const ReluNetwork& net, const ActivationPattern& s, const Vector& x);
LayerValues subjective_arguments(const ReluNetwork& net, const ActivationPattern& s, const Vector& x);

// (W_{L+1} diag(s_L) W_L ... diag(s_1) W_1)^T
Vector gradient(const ReluNetwork& net, const ActivationPattern& s);
// Unoriented normal v~ of neuron c under s.
Vector normal(const ReluNetwork& net, const ActivationPattern& s, NeuronIndex c);
// v~ negated when c is inactive in s.
Vector oriented_normal(const ReluNetwork& net, const ActivationPattern& s, NeuronIndex c);
// Entry (l,j) is <w, oriented_normal(s, (l,j))>; one bias-free pass.
LayerValues inner_products_all(const ReluNetwork& net, const ActivationPattern& s, const Vector& w);
// Row j of element l is the unoriented normal of (l,j). Costs n_0 passes.
std::vector<Matrix> all_normals(const ReluNetwork& net, const ActivationPattern& s);

std::vector<NeuronIndex> critical_indices(const ReluNetwork& net, const ActivationPattern& s,
                                          const Vector& x, double zero_tol);
int critical_kernel_dim(const ReluNetwork& net, const ActivationPattern& s, const Vector& x,
                        double zero_tol);

// Test oracle: every pattern compatible with H(x) at tolerance zero_tol.
std::vector<ActivationPattern> enumerate_compatible(const ReluNetwork& net, const Vector& x,
                                                    double zero_tol, std::size_t cap = 1u << 16);

}  // namespace drlp
