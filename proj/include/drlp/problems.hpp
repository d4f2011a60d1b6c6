#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlp/network.hpp"
#include "drlp/quadratic.hpp"

namespace drlp {

struct RegressionData {
  Matrix X;  // N x p
  Vector Y;  // N
  std::vector<std::string> predictor_names;
  std::string response_name;

  int samples() const { return static_cast<int>(X.rows()); }
  int predictors() const { return static_cast<int>(X.cols()); }
};

void validate(const RegressionData& data);

struct LpInstance {
  Vector c;  // minimize <c, x>
  Matrix A;  // subject to A x <= b, x >= 0
  Vector b;
  double alpha = 1.0;  // penalty weight
};

// Network plus pair metadata (and non-fatal builder warnings).
struct CompiledProblem {
  ReluNetwork net;
  PairGroups pairs;
  std::vector<std::string> warnings;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Widths n0 .. n_{L+1}; weights and biases i.i.d. uniform(low, high), drawn
// layer by layer (W1, b1, W2, b2, ...), row-major.
ReluNetwork build_random(const std::vector<int>& topology, std::uint64_t seed, double low = -1.0,
                         double high = 1.0);

// Pinball loss sum_i rho_alpha(y_i - theta_0 - <theta_{1..p}, x_i>) + lambda |theta_{1..p}|_1
// over theta = (theta_0, ..., theta_p).
CompiledProblem build_quantile_lasso(const RegressionData& data, double alpha, double lambda);

// sum_i |y_i - max(<theta, x_i>, 0)|, theta in R^p.
CompiledProblem build_clad(const RegressionData& data);

// sum_i |f_theta(x_i) - y_i| as a function of the first layer of `base`.
// Coordinates: W1 row-major, then b1.
CompiledProblem build_l1_first_layer(const ReluNetwork& base, const RegressionData& data);
Vector first_layer_coordinates(const ReluNetwork& base);
ReluNetwork with_first_layer(const ReluNetwork& base, const Vector& theta);

struct LassoProblem {
  CompiledProblem penalty;  // lambda |theta|_1
  QuadraticObjective fit;   // |Y - X theta|^2
};
LassoProblem build_lasso(const RegressionData& data, double lambda);

// <c,x> + alpha (sum_i ReLU(A_i x - b_i) + sum_i ReLU(-x_i)); the <c,x>
// term uses a pair of units.
CompiledProblem build_from_lp(const LpInstance& lp);

// Comma-separated numeric table, optional header row. Response is the named
// column (header name or 1-based index) or the last column.
RegressionData load_csv(const std::string& path, const std::optional<std::string>& response_col = std::nullopt);
RegressionData parse_csv(const std::string& text, const std::optional<std::string>& response_col = std::nullopt);

}  // namespace drlp
