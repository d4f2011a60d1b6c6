#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "drlp/network.hpp"

namespace drlp {

using BigInt = boost::multiprecision::cpp_int;

// Topologies here are (n0, n1, ..., nL): input width and hidden widths,
// without the output layer.

BigInt binomial(int n, int k);

// prod_{i=1..L} sum_{j=0}^{min(n0..ni)} C(ni, j)
BigInt montufar_bound(const std::vector<int>& topology);

// sum over j in J of prod_i C(ni, ji), where
// ji <= min(n0, n1 - j1, ..., n_{i-1} - j_{i-1}, ni).
BigInt improved_bound(const std::vector<int>& topology);

// Literal enumeration of J; exponential, for cross-checking small cases.
BigInt improved_bound_enumerated(const std::vector<int>& topology);

// Drops the output width of a network.
std::vector<int> bound_topology(const ReluNetwork& net);

struct Box {
  Vector lower;
  Vector upper;
};

// Distinct activation patterns over `samples` uniform points in the box.
std::size_t count_regions_empirical(const ReluNetwork& net, const Box& box, std::size_t samples,
                                    std::uint64_t seed);

}  // namespace drlp
