#include "drlp/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace drlp {

namespace {

void check_input(const ReluNetwork& net, const Vector& x) {
  if (x.size() != net.input_dim()) {
    throw DimensionError("input has length " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(net.input_dim()));
  }
}

void check_pattern(const ReluNetwork& net, const ActivationPattern& s) {
  if (!(s.layout() == net.layout())) throw DimensionError("activation pattern shape does not match network");
}

Vector relu(const Vector& a) { return a.cwiseMax(0.0); }

}  // namespace

ReluNetwork::ReluNetwork(std::vector<Matrix> weights, std::vector<Vector> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.size() < 2) throw DimensionError("network needs at least one hidden layer");
  if (weights_.size() != biases_.size()) throw DimensionError("weight and bias counts differ");
  widths_.push_back(static_cast<int>(weights_[0].cols()));
  if (widths_[0] < 1) throw DimensionError("input width must be positive");
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const Matrix& W = weights_[k];
    if (W.cols() != widths_.back()) {
      throw DimensionError("W" + std::to_string(k + 1) + " has " + std::to_string(W.cols()) +
                           " columns, expected " + std::to_string(widths_.back()));
    }
    if (W.rows() < 1) throw DimensionError("W" + std::to_string(k + 1) + " has no rows");
    if (biases_[k].size() != W.rows()) {
      throw DimensionError("b" + std::to_string(k + 1) + " length does not match W" +
                           std::to_string(k + 1) + " rows");
    }
    if (!W.allFinite() || !biases_[k].allFinite()) {
      throw DimensionError("non-finite entry in layer " + std::to_string(k + 1));
    }
    widths_.push_back(static_cast<int>(W.rows()));
  }
  if (widths_.back() != 1) throw DimensionError("output layer must have exactly one row");
  layout_ = NeuronLayout(hidden_widths());
}

std::vector<int> ReluNetwork::hidden_widths() const {
  return std::vector<int>(widths_.begin() + 1, widths_.end() - 1);
}

PairGroups::PairGroups(const ReluNetwork& net, std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs)
    : pairs_(std::move(pairs)), layout_(net.layout()), partner_(net.neuron_count(), -1),
      secondary_(net.neuron_count(), 0) {
  for (const auto& [a, b] : pairs_) {
    if (!layout_.contains(a) || !layout_.contains(b)) throw DimensionError("pair index out of range");
    if (a.layer != b.layer || a.pos == b.pos) {
      throw DimensionError("pair " + to_string(a) + "-" + to_string(b) + " must join two neurons of one layer");
    }
    std::size_t fa = layout_.flat(a), fb = layout_.flat(b);
    if (partner_[fa] != -1 || partner_[fb] != -1) {
      throw DimensionError("neuron appears in more than one pair");
    }
    const Matrix& W = net.weight(a.layer);
    const Vector& bias = net.bias(a.layer);
    if (W.row(a.pos) != -W.row(b.pos) || bias[a.pos] != -bias[b.pos]) {
      throw DimensionError("pair " + to_string(a) + "-" + to_string(b) + " rows are not exact negatives");
    }
    partner_[fa] = static_cast<int>(fb);
    partner_[fb] = static_cast<int>(fa);
    secondary_[fb] = 1;
  }
}

std::optional<NeuronIndex> PairGroups::partner(NeuronIndex c) const {
  if (partner_.empty()) return std::nullopt;
  int p = partner_[layout_.flat(c)];
  if (p < 0) return std::nullopt;
  return layout_.unflat(static_cast<std::size_t>(p));
}

bool PairGroups::is_secondary(NeuronIndex c) const {
  return !secondary_.empty() && secondary_[layout_.flat(c)] != 0;
}

ActivationPattern empty_pattern(const ReluNetwork& net) { return ActivationPattern(net.layout()); }

LayerValues relu_arguments(const ReluNetwork& net, const Vector& x) {
  check_input(net, x);
  const int L = net.hidden_layers();
  LayerValues args(L);
  Vector y = x;
  for (int k = 0; k < L; ++k) {
    args[k] = net.weight(k) * y + net.bias(k);
    y = relu(args[k]);
  }
  return args;
}

double eval(const ReluNetwork& net, const Vector& x) {
  check_input(net, x);
  const int L = net.hidden_layers();
  Vector y = x;
  for (int k = 0; k < L; ++k) y = relu(net.weight(k) * y + net.bias(k));
  return (net.weight(L) * y + net.bias(L))(0);
}

HyperplanePattern hyperplane_pattern(const ReluNetwork& net, const Vector& x, double zero_tol) {
  const LayerValues args = relu_arguments(net, x);
  const double thresh = zero_tol * (1.0 + x.lpNorm<Eigen::Infinity>());
  HyperplanePattern h(args.size());
  for (std::size_t l = 0; l < args.size(); ++l) {
    h[l].resize(args[l].size());
    for (Eigen::Index j = 0; j < args[l].size(); ++j) {
      double a = args[l][j];
      h[l][j] = std::abs(a) <= thresh ? 0 : (a > 0 ? 1 : -1);
    }
  }
  return h;
}

ActivationPattern activation_pattern(const ReluNetwork& net, const Vector& x) {
  const LayerValues args = relu_arguments(net, x);
  ActivationPattern s = empty_pattern(net);
  for (int l = 0; l < static_cast<int>(args.size()); ++l) {
    for (int j = 0; j < args[l].size(); ++j) s.set({l, j}, args[l][j] > 0.0);
  }
  return s;
}

bool is_compatible(const HyperplanePattern& h, const ActivationPattern& s) {
  if (static_cast<int>(h.size()) != s.layers()) throw DimensionError("pattern depth mismatch");
  for (int l = 0; l < s.layers(); ++l) {
    if (static_cast<int>(h[l].size()) != s.layout().width(l)) throw DimensionError("pattern width mismatch");
    for (int j = 0; j < s.layout().width(l); ++j) {
      double sv = s.active({l, j}) ? 0.5 : -0.5;
      if (h[l][j] * sv < 0) return false;
    }
  }
  return true;
}

LayerValues subjective_arguments(const ReluNetwork& net, const ActivationPattern& s, const Vector& x) {
  check_input(net, x);
  check_pattern(net, s);
  const int L = net.hidden_layers();
  LayerValues args(L);
  Vector y = x;
  for (int k = 0; k < L; ++k) {
    args[k] = net.weight(k) * y + net.bias(k);
    y = s.mask(k).cwiseProduct(args[k]);
  }
  return args;
}

double subjective_eval(const ReluNetwork& net, const ActivationPattern& s, const Vector& x) {
  check_input(net, x);
  check_pattern(net, s);
  const int L = net.hidden_layers();
  Vector y = x;
  for (int k = 0; k < L; ++k) y = s.mask(k).cwiseProduct(net.weight(k) * y + net.bias(k));
  return (net.weight(L) * y + net.bias(L))(0);
}

Vector gradient(const ReluNetwork& net, const ActivationPattern& s) {
  check_pattern(net, s);
  const int L = net.hidden_layers();
  Eigen::RowVectorXd r = net.weight(L).row(0);
  for (int k = L - 1; k >= 0; --k) {
    r = r.cwiseProduct(s.mask(k).transpose()) * net.weight(k);
  }
  return r.transpose();
}

Vector normal(const ReluNetwork& net, const ActivationPattern& s, NeuronIndex c) {
  check_pattern(net, s);
  if (!net.layout().contains(c)) throw DimensionError("neuron " + to_string(c) + " out of range");
  Eigen::RowVectorXd r = net.weight(c.layer).row(c.pos);
  for (int k = c.layer - 1; k >= 0; --k) {
    r = r.cwiseProduct(s.mask(k).transpose()) * net.weight(k);
  }
  return r.transpose();
}

Vector oriented_normal(const ReluNetwork& net, const ActivationPattern& s, NeuronIndex c) {
  Vector v = normal(net, s, c);
  if (!s.active(c)) v = -v;
  return v;
}

LayerValues inner_products_all(const ReluNetwork& net, const ActivationPattern& s, const Vector& w) {
  check_input(net, w);
  check_pattern(net, s);
  const int L = net.hidden_layers();
  LayerValues out(L);
  Vector u = net.weight(0) * w;
  for (int k = 0;; ++k) {
    // sign is +1 where active, -1 where inactive
    out[k] = u.cwiseProduct((2.0 * s.mask(k).array() - 1.0).matrix());
    if (k + 1 == L) break;
    u = net.weight(k + 1) * s.mask(k).cwiseProduct(u);
  }
  return out;
}

std::vector<Matrix> all_normals(const ReluNetwork& net, const ActivationPattern& s) {
  check_pattern(net, s);
  const int L = net.hidden_layers();
  std::vector<Matrix> V(L);
  V[0] = net.weight(0);
  for (int k = 1; k < L; ++k) V[k] = net.weight(k) * (s.mask(k - 1).asDiagonal() * V[k - 1]);
  return V;
}

std::vector<NeuronIndex> critical_indices(const ReluNetwork& net, const ActivationPattern& s,
                                          const Vector& x, double zero_tol) {
  const LayerValues args = subjective_arguments(net, s, x);
  const std::vector<Matrix> V = all_normals(net, s);
  std::vector<NeuronIndex> out;
  for (int l = 0; l < static_cast<int>(V.size()); ++l) {
    for (int j = 0; j < V[l].rows(); ++j) {
      double nrm = V[l].row(j).norm();
      if (nrm > zero_tol && std::abs(args[l][j]) <= zero_tol * (1.0 + nrm)) out.push_back({l, j});
    }
  }
  return out;
}

int critical_kernel_dim(const ReluNetwork& net, const ActivationPattern& s, const Vector& x,
                        double zero_tol) {
  const std::vector<NeuronIndex> crit = critical_indices(net, s, x, zero_tol);
  const int n0 = net.input_dim();
  if (crit.empty()) return n0;
  Matrix N(crit.size(), n0);
  for (std::size_t i = 0; i < crit.size(); ++i) N.row(i) = normal(net, s, crit[i]).transpose();
  Eigen::JacobiSVD<Matrix> svd(N);
  const Vector& sv = svd.singularValues();
  const double thresh = zero_tol * std::max(1.0, sv(0));
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > thresh ? 1 : 0;
  return n0 - rank;
}

std::vector<ActivationPattern> enumerate_compatible(const ReluNetwork& net, const Vector& x,
                                                    double zero_tol, std::size_t cap) {
  const HyperplanePattern h = hyperplane_pattern(net, x, zero_tol);
  ActivationPattern base = empty_pattern(net);
  std::vector<NeuronIndex> zeros;
  for (int l = 0; l < static_cast<int>(h.size()); ++l) {
    for (int j = 0; j < static_cast<int>(h[l].size()); ++j) {
      if (h[l][j] == 0) zeros.push_back({l, j});
      base.set({l, j}, h[l][j] > 0);
    }
  }
  if (zeros.size() >= 63 || (std::size_t{1} << zeros.size()) > cap) {
    throw CapExceeded(std::to_string(zeros.size()) + " zero arguments exceed the enumeration cap");
  }
  std::vector<ActivationPattern> out;
  const std::size_t count = std::size_t{1} << zeros.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    ActivationPattern s = base;
    for (std::size_t i = 0; i < zeros.size(); ++i) s.set(zeros[i], (mask >> i) & 1u);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace drlp
