#include "drlp/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "drlp/rng.hpp"

namespace drlp {

void validate(const RegressionData& data) {
  if (data.X.rows() < 1 || data.X.cols() < 1) throw DimensionError("regression data needs N >= 1 and p >= 1");
  if (data.Y.size() != data.X.rows()) throw DimensionError("response length must equal the number of rows");
  if (!data.X.allFinite() || !data.Y.allFinite()) throw DimensionError("regression data has non-finite entries");
}

ReluNetwork build_random(const std::vector<int>& topology, std::uint64_t seed, double low, double high) {
  if (topology.size() < 3) throw DimensionError("topology needs input, at least one hidden layer and output");
  if (topology.back() != 1) throw DimensionError("output width must be 1");
  for (int w : topology) {
    if (w < 1) throw DimensionError("widths must be positive");
  }
  Rng rng(seed);
  std::vector<Matrix> W;
  std::vector<Vector> b;
  for (std::size_t k = 0; k + 1 < topology.size(); ++k) {
    Matrix M(topology[k + 1], topology[k]);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = rng.uniform(low, high);
    }
    W.push_back(std::move(M));
    b.push_back(rng.uniform_vector(topology[k + 1], low, high));
  }
  return ReluNetwork(std::move(W), std::move(b));
}

CompiledProblem build_quantile_lasso(const RegressionData& data, double alpha, double lambda) {
  validate(data);
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const int N = data.samples(), p = data.predictors(), n0 = p + 1;
  const int H = 2 * (N + p);
  Matrix W1 = Matrix::Zero(H, n0);
  Vector b1 = Vector::Zero(H);
  Matrix W2(1, H);
  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs;
  for (int i = 0; i < N; ++i) {
    // relu(y_i - <x~_i, theta>) weighted alpha; its negation weighted 1 - alpha
    W1(i, 0) = -1.0;
    W1.row(i).tail(p) = -data.X.row(i);
    b1[i] = data.Y[i];
    W1.row(N + i) = -W1.row(i);
    b1[N + i] = -b1[i];
    W2(0, i) = alpha;
    W2(0, N + i) = 1.0 - alpha;
    pairs.push_back({{0, i}, {0, N + i}});
  }
  for (int j = 0; j < p; ++j) {
    const int r = 2 * N + j;
    W1(r, 1 + j) = lambda;
    W1.row(r + p) = -W1.row(r);
    W2(0, r) = 1.0;
    W2(0, r + p) = 1.0;
    pairs.push_back({{0, r}, {0, r + p}});
  }
  ReluNetwork net({W1, W2}, {b1, Vector::Zero(1)});
  PairGroups groups(net, std::move(pairs));
  return {std::move(net), std::move(groups), {}};
}

CompiledProblem build_clad(const RegressionData& data) {
  validate(data);
  const int N = data.samples();
  Matrix W2(2 * N, N);
  W2 << Matrix::Identity(N, N), -Matrix::Identity(N, N);
  Vector b2(2 * N);
  b2 << -data.Y, data.Y;
  ReluNetwork net({data.X, W2, Matrix::Ones(1, 2 * N)}, {Vector::Zero(N), b2, Vector::Zero(1)});
  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs;
  for (int i = 0; i < N; ++i) pairs.push_back({{1, i}, {1, N + i}});
  PairGroups groups(net, std::move(pairs));
  return {std::move(net), std::move(groups), {}};
}

namespace {

Matrix block_diag(const Matrix& W, int copies) {
  Matrix D = Matrix::Zero(W.rows() * copies, W.cols() * copies);
  for (int i = 0; i < copies; ++i) D.block(i * W.rows(), i * W.cols(), W.rows(), W.cols()) = W;
  return D;
}

Vector tile(const Vector& b, int copies) { return b.replicate(copies, 1); }

}  // namespace

Vector first_layer_coordinates(const ReluNetwork& base) {
  const Matrix& W = base.weight(0);
  const int n1 = static_cast<int>(W.rows()), n0 = static_cast<int>(W.cols());
  Vector theta(n1 * (n0 + 1));
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n0; ++j) theta[i * n0 + j] = W(i, j);
  }
  theta.tail(n1) = base.bias(0);
  return theta;
}

ReluNetwork with_first_layer(const ReluNetwork& base, const Vector& theta) {
  const int n1 = base.widths()[1], n0 = base.widths()[0];
  if (theta.size() != n1 * (n0 + 1)) throw DimensionError("first-layer coordinate vector has the wrong length");
  std::vector<Matrix> W = base.weights();
  std::vector<Vector> b = base.biases();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n0; ++j) W[0](i, j) = theta[i * n0 + j];
  }
  b[0] = theta.tail(n1);
  return ReluNetwork(std::move(W), std::move(b));
}

CompiledProblem build_l1_first_layer(const ReluNetwork& base, const RegressionData& data) {
  validate(data);
  const int n0 = base.input_dim(), n1 = base.widths()[1], L = base.hidden_layers();
  if (data.predictors() != n0) {
    throw DimensionError("data has " + std::to_string(data.predictors()) + " predictors, base network expects " +
                         std::to_string(n0));
  }
  const int N = data.samples(), dim = n1 * (n0 + 1);
  std::vector<Matrix> W;
  std::vector<Vector> b;

  Matrix M = Matrix::Zero(N * n1, dim);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < n1; ++k) {
      M.block(i * n1 + k, k * n0, 1, n0) = data.X.row(i);
      M(i * n1 + k, n1 * n0 + k) = 1.0;
    }
  }
  W.push_back(std::move(M));
  b.push_back(Vector::Zero(N * n1));
  for (int k = 1; k < L; ++k) {
    W.push_back(block_diag(base.weight(k), N));
    b.push_back(tile(base.bias(k), N));
  }
  const Matrix D = block_diag(base.weight(L), N);
  Matrix last(2 * N, D.cols());
  last << D, -D;
  Vector last_b(2 * N);
  last_b.head(N) = -data.Y + tile(base.bias(L), N);
  last_b.tail(N) = -last_b.head(N);
  W.push_back(std::move(last));
  b.push_back(std::move(last_b));
  W.push_back(Matrix::Ones(1, 2 * N));
  b.push_back(Vector::Zero(1));

  ReluNetwork net(std::move(W), std::move(b));
  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs;
  for (int i = 0; i < N; ++i) pairs.push_back({{L, i}, {L, N + i}});
  PairGroups groups(net, std::move(pairs));
  CompiledProblem out{std::move(net), std::move(groups), {}};
  if (N * n1 > dim) {
    out.warnings.push_back("the origin is generically a non-regular vertex (" + std::to_string(N * n1) +
                           " first-layer hyperplanes through it in dimension " + std::to_string(dim) +
                           "); start away from it");
  }
  return out;
}

LassoProblem build_lasso(const RegressionData& data, double lambda) {
  validate(data);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const int p = data.predictors();
  Matrix W1(2 * p, p);
  W1 << lambda * Matrix::Identity(p, p), -lambda * Matrix::Identity(p, p);
  ReluNetwork net({W1, Matrix::Ones(1, 2 * p)}, {Vector::Zero(2 * p), Vector::Zero(1)});
  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs;
  for (int j = 0; j < p; ++j) pairs.push_back({{0, j}, {0, p + j}});
  PairGroups groups(net, std::move(pairs));
  const Matrix XtX = data.X.transpose() * data.X;
  // symmetrize exactly; the product can be off by an ulp
  const Matrix A = 0.5 * (XtX + XtX.transpose());
  QuadraticObjective fit(A, -2.0 * data.X.transpose() * data.Y, data.Y.squaredNorm());
  return {{std::move(net), std::move(groups), {}}, std::move(fit)};
}

CompiledProblem build_from_lp(const LpInstance& lp) {
  const int n0 = static_cast<int>(lp.c.size());
  const int n = static_cast<int>(lp.A.rows());
  if (n0 < 1) throw DimensionError("cost vector must be nonempty");
  if (n > 0 && lp.A.cols() != n0) throw DimensionError("constraint matrix width must equal the cost length");
  if (lp.b.size() != n) throw DimensionError("right-hand side length must equal the constraint count");
  if (!(lp.alpha > 0.0)) throw std::invalid_argument("penalty alpha must be positive");
  const int H = 2 + n + n0;
  Matrix W1 = Matrix::Zero(H, n0);
  Vector b1 = Vector::Zero(H);
  Matrix W2(1, H);
  W1.row(0) = lp.c.transpose();
  W1.row(1) = -lp.c.transpose();
  W2(0, 0) = 1.0;
  W2(0, 1) = -1.0;
  for (int i = 0; i < n; ++i) {
    W1.row(2 + i) = lp.A.row(i);
    b1[2 + i] = -lp.b[i];
    W2(0, 2 + i) = lp.alpha;
  }
  for (int i = 0; i < n0; ++i) {
    W1(2 + n + i, i) = -1.0;
    W2(0, 2 + n + i) = lp.alpha;
  }
  ReluNetwork net({W1, W2}, {b1, Vector::Zero(1)});
  PairGroups groups(net, {{{0, 0}, {0, 1}}});
  return {std::move(net), std::move(groups), {}};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

RegressionData parse_csv(const std::string& text, const std::optional<std::string>& response_col) {
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, cells)
  std::stringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    rows.push_back({lineno, split(line)});
  }
  if (rows.empty()) throw ParseError("empty file");
  const std::size_t cols = rows.front().second.size();
  if (cols < 2) throw ParseError("need at least one predictor and one response column");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  const auto& head = rows.front().second;
  if (std::any_of(head.begin(), head.end(), [](const std::string& c) { return !parse_number(c); })) {
    names = head;
    first_data = 1;
  } else {
    for (std::size_t c = 0; c < cols; ++c) names.push_back("x" + std::to_string(c + 1));
  }
  if (first_data >= rows.size()) throw ParseError("no data rows after the header");

  std::size_t response = cols - 1;
  if (response_col) {
    auto it = std::find(names.begin(), names.end(), *response_col);
    if (first_data == 1 && it != names.end()) {
      response = static_cast<std::size_t>(it - names.begin());
    } else {
      auto idx = parse_number(*response_col);
      if (!idx || *idx < 1 || *idx > static_cast<double>(cols) || *idx != static_cast<int>(*idx)) {
        throw ParseError("unknown response column '" + *response_col + "'");
      }
      response = static_cast<std::size_t>(*idx) - 1;
    }
  }

  const std::size_t N = rows.size() - first_data;
  RegressionData data;
  data.X.resize(N, cols - 1);
  data.Y.resize(N);
  for (std::size_t r = 0; r < N; ++r) {
    const auto& [lineno, cells] = rows[first_data + r];
    if (cells.size() != cols) {
      throw ParseError("row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                       " columns, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0, k = 0; c < cols; ++c) {
      auto v = parse_number(cells[c]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("row " + std::to_string(lineno) + ", column " + std::to_string(c + 1) + ": '" +
                         cells[c] + "' is not a finite number");
      }
      if (c == response) {
        data.Y[r] = *v;
      } else {
        data.X(r, k++) = *v;
      }
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (c == response) {
      data.response_name = names[c];
    } else {
      data.predictor_names.push_back(names[c]);
    }
  }
  return data;
}

RegressionData load_csv(const std::string& path, const std::optional<std::string>& response_col) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), response_col);
}

}  // namespace drlp
