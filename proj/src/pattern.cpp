#include "drlp/pattern.hpp"

#include <stdexcept>

namespace drlp {

std::string to_string(NeuronIndex c) {
  return "(" + std::to_string(c.layer + 1) + "," + std::to_string(c.pos + 1) + ")";
}

NeuronLayout::NeuronLayout(const std::vector<int>& hidden_widths) : widths_(hidden_widths) {
  offsets_.reserve(widths_.size() + 1);
  offsets_.push_back(0);
  for (int w : widths_) {
    if (w < 1) throw std::invalid_argument("layer width must be positive");
    offsets_.push_back(offsets_.back() + static_cast<std::size_t>(w));
  }
}

NeuronIndex NeuronLayout::unflat(std::size_t k) const {
  for (int l = 0; l < layers(); ++l) {
    if (k < offsets_[l + 1]) return {l, static_cast<int>(k - offsets_[l])};
  }
  throw std::out_of_range("flat neuron index out of range");
}

bool NeuronLayout::contains(NeuronIndex c) const {
  return c.layer >= 0 && c.layer < layers() && c.pos >= 0 && c.pos < widths_[c.layer];
}

ActivationPattern::ActivationPattern(NeuronLayout layout)
    : layout_(std::move(layout)), values_(Eigen::VectorXd::Zero(layout_.size())) {}

ActivationPattern ActivationPattern::from_layers(const std::vector<std::vector<int>>& bits) {
  std::vector<int> widths;
  for (const auto& layer : bits) widths.push_back(static_cast<int>(layer.size()));
  ActivationPattern s{NeuronLayout(widths)};
  for (int l = 0; l < static_cast<int>(bits.size()); ++l) {
    for (int j = 0; j < widths[l]; ++j) s.set({l, j}, bits[l][j] != 0);
  }
  return s;
}

void ActivationPattern::flip(NeuronIndex c) {
  double& v = values_[layout_.flat(c)];
  v = 1.0 - v;
}

std::vector<std::vector<int>> ActivationPattern::to_layers() const {
  std::vector<std::vector<int>> out(layers());
  for (int l = 0; l < layers(); ++l) {
    out[l].resize(layout_.width(l));
    for (int j = 0; j < layout_.width(l); ++j) out[l][j] = active({l, j}) ? 1 : 0;
  }
  return out;
}

std::string ActivationPattern::key() const {
  std::string k(size(), '0');
  for (std::size_t i = 0; i < size(); ++i) {
    if (values_[i] != 0.0) k[i] = '1';
  }
  return k;
}

bool ActivationPattern::operator==(const ActivationPattern& o) const {
  return layout_ == o.layout_ && values_ == o.values_;
}

}  // namespace drlp
