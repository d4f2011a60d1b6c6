#include "drlp/model_io.hpp"

#include <fstream>

#include "drlp/problems.hpp"

namespace drlp {

using nlohmann::json;

namespace {

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + " is not a number");
  return v.get<double>();
}

Vector vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Matrix matrix_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + " must be a nonempty 2-D array");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix M(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(row_where + " has inconsistent length");
    for (std::size_t c = 0; c < cols; ++c) M(r, c) = number(j[r][c], row_where + "[" + std::to_string(c) + "]");
  }
  return M;
}

NeuronIndex neuron_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError(where + " must be [layer, position]");
  }
  return {j[0].get<int>() - 1, j[1].get<int>() - 1};
}

}  // namespace

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Model model_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("model must be a JSON object");
  for (const char* key : {"widths", "weights", "biases"}) {
    if (!j.contains(key)) throw ParseError(std::string("model is missing \"") + key + "\"");
  }
  const json& jw = j["weights"];
  const json& jb = j["biases"];
  if (!jw.is_array() || !jb.is_array()) throw ParseError("weights and biases must be arrays");
  std::vector<Matrix> W;
  std::vector<Vector> b;
  for (std::size_t k = 0; k < jw.size(); ++k) W.push_back(matrix_from(jw[k], "weights[" + std::to_string(k) + "]"));
  for (std::size_t k = 0; k < jb.size(); ++k) b.push_back(vector_from(jb[k], "biases[" + std::to_string(k) + "]"));
  ReluNetwork net;
  try {
    net = ReluNetwork(std::move(W), std::move(b));
  } catch (const DimensionError& e) {
    throw ParseError(std::string("inconsistent model: ") + e.what());
  }
  std::vector<int> widths;
  try {
    widths = j["widths"].get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ParseError("widths must be an integer array");
  }
  if (widths != net.widths()) throw ParseError("declared widths do not match the weight shapes");

  std::vector<std::pair<NeuronIndex, NeuronIndex>> pairs;
  if (j.contains("pairs") && !j["pairs"].is_null()) {
    const json& jp = j["pairs"];
    if (!jp.is_array()) throw ParseError("pairs must be an array");
    for (std::size_t k = 0; k < jp.size(); ++k) {
      const std::string where = "pairs[" + std::to_string(k) + "]";
      if (!jp[k].is_array() || jp[k].size() != 2) throw ParseError(where + " must hold two neurons");
      pairs.push_back({neuron_from(jp[k][0], where), neuron_from(jp[k][1], where)});
    }
  }
  try {
    PairGroups groups(net, std::move(pairs));
    return {std::move(net), std::move(groups)};
  } catch (const DimensionError& e) {
    throw ParseError(std::string("invalid pairs: ") + e.what());
  }
}

json model_to_json(const ReluNetwork& net, const PairGroups& pairs) {
  json j;
  j["widths"] = net.widths();
  j["weights"] = json::array();
  j["biases"] = json::array();
  for (int k = 0; k <= net.hidden_layers(); ++k) {
    const Matrix& W = net.weight(k);
    json rows = json::array();
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      std::vector<double> row(W.cols());
      for (Eigen::Index c = 0; c < W.cols(); ++c) row[c] = W(r, c);
      rows.push_back(row);
    }
    j["weights"].push_back(rows);
    j["biases"].push_back(to_json(net.bias(k)));
  }
  if (!pairs.empty()) {
    json jp = json::array();
    for (const auto& [a, b] : pairs.pairs()) {
      jp.push_back({{a.layer + 1, a.pos + 1}, {b.layer + 1, b.pos + 1}});
    }
    j["pairs"] = jp;
  }
  return j;
}

Model load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
  return model_from_json(j);
}

void save_model(const std::string& path, const ReluNetwork& net, const PairGroups& pairs) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << model_to_json(net, pairs).dump() << '\n';
}

}  // namespace drlp
