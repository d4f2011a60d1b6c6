#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace drlp {

// mt19937_64 with a fixed bits-to-double mapping, so sequences are identical
// on every standard library (std::uniform_real_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  // Random unit vector (normalized uniform cube sample; not rotation
  // invariant, which is fine for perturbations).
  Eigen::VectorXd unit_direction(Eigen::Index n) {
    for (;;) {
      Eigen::VectorXd v = uniform_vector(n, -1.0, 1.0);
      double nrm = v.norm();
      if (nrm > 1e-3) return v / nrm;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace drlp
