#pragma once

#include <string>

#include <json.hpp>

#include "drlp/network.hpp"

namespace drlp {

struct Model {
  ReluNetwork net;
  PairGroups pairs;
};

// {"widths": [...], "weights": [W1, ...] (row-major 2-D arrays),
//  "biases": [b1, ...], "pairs": [[[l,j1],[l,j2]], ...] (optional, 1-based)}
Model model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ReluNetwork& net, const PairGroups& pairs = {});

Model load_model(const std::string& path);
void save_model(const std::string& path, const ReluNetwork& net, const PairGroups& pairs = {});

nlohmann::json to_json(const Vector& v);

}  // namespace drlp
