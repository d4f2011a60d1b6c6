#include "drlp/bounds.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "drlp/rng.hpp"

namespace drlp {

namespace {

void check_topology(const std::vector<int>& topology) {
  if (topology.size() < 2) throw std::invalid_argument("topology needs an input width and at least one hidden width");
  for (int w : topology) {
    if (w < 1) throw std::invalid_argument("widths must be positive");
  }
}

}  // namespace

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt montufar_bound(const std::vector<int>& topology) {
  check_topology(topology);
  BigInt prod = 1;
  int running_min = topology[0];
  for (std::size_t i = 1; i < topology.size(); ++i) {
    running_min = std::min(running_min, topology[i]);
    BigInt sum = 0;
    for (int j = 0; j <= running_min; ++j) sum += binomial(topology[i], j);
    prod *= sum;
  }
  return prod;
}

BigInt improved_bound(const std::vector<int>& topology) {
  check_topology(topology);
  // The constraint on j_i only depends on m = min(n0, n1 - j1, ..., n_{i-1} - j_{i-1}),
  // so sum over J layer by layer keyed on m.
  std::map<int, BigInt> layer{{topology[0], BigInt(1)}};
  for (std::size_t i = 1; i < topology.size(); ++i) {
    const int n = topology[i];
    std::map<int, BigInt> next;
    for (const auto& [m, weight] : layer) {
      for (int j = 0; j <= std::min(m, n); ++j) next[std::min(m, n - j)] += weight * binomial(n, j);
    }
    layer = std::move(next);
  }
  BigInt total = 0;
  for (const auto& [m, weight] : layer) total += weight;
  return total;
}

BigInt improved_bound_enumerated(const std::vector<int>& topology) {
  check_topology(topology);
  const std::size_t L = topology.size() - 1;
  std::vector<int> j(L + 1, 0);
  BigInt total = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i > L) {
      BigInt prod = 1;
      for (std::size_t k = 1; k <= L; ++k) prod *= binomial(topology[k], j[k]);
      total += prod;
      return;
    }
    int cap = std::min(topology[0], topology[i]);
    for (std::size_t k = 1; k < i; ++k) cap = std::min(cap, topology[k] - j[k]);
    for (j[i] = 0; j[i] <= cap; ++j[i]) rec(i + 1);
  };
  rec(1);
  return total;
}

std::vector<int> bound_topology(const ReluNetwork& net) {
  return std::vector<int>(net.widths().begin(), net.widths().end() - 1);
}

std::size_t count_regions_empirical(const ReluNetwork& net, const Box& box, std::size_t samples,
                                    std::uint64_t seed) {
  if (box.lower.size() != net.input_dim() || box.upper.size() != net.input_dim()) {
    throw DimensionError("box dimension must match the network input");
  }
  Rng rng(seed);
  std::unordered_set<std::string> seen;
  Vector x(net.input_dim());
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lower[i], box.upper[i]);
    seen.insert(activation_pattern(net, x).key());
  }
  return seen.size();
}

}  // namespace drlp
