#pragma once

#include "drlp/network.hpp"

namespace drlp::fixtures {

inline Matrix mat(int r, int c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// relu(x1-x2) + relu(x1+x2) - 1, then relu
inline ReluNetwork e1() {
  return ReluNetwork({mat(2, 2, {1, -1, 1, 1}), mat(1, 2, {1, 1}), mat(1, 1, {1})},
                     {vec({0, 0}), vec({-1}), vec({0})});
}

// (1,2,1,1), W1 = (1,1)^T, W2 = (1,-1), zero biases
inline ReluNetwork e2() {
  return ReluNetwork({mat(2, 1, {1, 1}), mat(1, 2, {1, -1}), mat(1, 1, {1})},
                     {vec({0, 0}), vec({0}), vec({0})});
}

// like e2 with W1 = (1,-1)^T
inline ReluNetwork e2_prime() {
  return ReluNetwork({mat(2, 1, {1, -1}), mat(1, 2, {1, -1}), mat(1, 1, {1})},
                     {vec({0, 0}), vec({0}), vec({0})});
}

// relu(relu(x1) - relu(x2) - 1)
inline ReluNetwork e3() {
  return ReluNetwork({mat(2, 2, {1, 0, 0, 1}), mat(1, 2, {1, -1}), mat(1, 1, {1})},
                     {vec({0, 0}), vec({-1}), vec({0})});
}

// f(x) = relu(x)
inline ReluNetwork single_relu() {
  return ReluNetwork({mat(1, 1, {1}), mat(1, 1, {1})}, {vec({0}), vec({0})});
}

// f(x) = -relu(x + 100): linear and unbounded below for x > -100
inline ReluNetwork pass_through() {
  return ReluNetwork({mat(1, 1, {1}), mat(1, 1, {-1})}, {vec({100}), vec({0})});
}

// |x1| + |x2|
inline ReluNetwork abs_corner() {
  return ReluNetwork({mat(4, 2, {1, 0, -1, 0, 0, 1, 0, -1}), mat(1, 4, {1, 1, 1, 1})},
                     {vec({0, 0, 0, 0}), vec({0})});
}

}  // namespace drlp::fixtures
