#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drlp {

// Hidden neuron (layer, position), both 0-based. Layer 0 is the first
// hidden layer.
struct NeuronIndex {
  int layer = 0;
  int pos = 0;

  auto operator<=>(const NeuronIndex&) const = default;
};

std::string to_string(NeuronIndex c);

// Flat numbering of all hidden neurons, layer by layer.
class NeuronLayout {
 public:
  NeuronLayout() = default;
  explicit NeuronLayout(const std::vector<int>& hidden_widths);

  int layers() const { return static_cast<int>(widths_.size()); }
  int width(int l) const { return widths_[l]; }
  const std::vector<int>& widths() const { return widths_; }
  std::size_t offset(int l) const { return offsets_[l]; }
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.back(); }

  std::size_t flat(NeuronIndex c) const { return offsets_[c.layer] + c.pos; }
  NeuronIndex unflat(std::size_t k) const;
  bool contains(NeuronIndex c) const;

  bool operator==(const NeuronLayout& o) const { return widths_ == o.widths_; }

 private:
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;  // layers()+1 entries
};

// Activation pattern s. Stored as 0.0/1.0 doubles so a layer can be used
// directly as a diagonal mask in the forward passes.
class ActivationPattern {
 public:
  ActivationPattern() = default;
  explicit ActivationPattern(NeuronLayout layout);  // all inactive
  static ActivationPattern from_layers(const std::vector<std::vector<int>>& bits);

  const NeuronLayout& layout() const { return layout_; }
  int layers() const { return layout_.layers(); }
  std::size_t size() const { return layout_.size(); }

  bool active(NeuronIndex c) const { return values_[layout_.flat(c)] != 0.0; }
  bool active_flat(std::size_t k) const { return values_[k] != 0.0; }
  void set(NeuronIndex c, bool on) { values_[layout_.flat(c)] = on ? 1.0 : 0.0; }
  void flip(NeuronIndex c);

  // Mask for hidden layer l (length n_l).
  Eigen::VectorXd::ConstSegmentReturnType mask(int l) const {
    return values_.segment(layout_.offset(l), layout_.width(l));
  }

  std::vector<std::vector<int>> to_layers() const;
  // Compact key, one char per neuron ('0'/'1'); used for region counting.
  std::string key() const;

  bool operator==(const ActivationPattern& o) const;

 private:
  NeuronLayout layout_;
  Eigen::VectorXd values_;
};

// Constant-time membership set over hidden neurons.
class NeuronSet {
 public:
  NeuronSet() = default;
  explicit NeuronSet(const NeuronLayout& layout) : layout_(layout), bits_(layout.size(), 0) {}

  void insert(NeuronIndex c) { bits_[layout_.flat(c)] = 1; }
  void erase(NeuronIndex c) { bits_[layout_.flat(c)] = 0; }
  bool contains(NeuronIndex c) const { return !bits_.empty() && bits_[layout_.flat(c)] != 0; }
  bool contains_flat(std::size_t k) const { return !bits_.empty() && bits_[k] != 0; }

 private:
  NeuronLayout layout_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace drlp
