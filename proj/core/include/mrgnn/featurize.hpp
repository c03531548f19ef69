#pragma once

#include <string>
#include <vector>

#include "mrgnn/graph.hpp"
#include "mrgnn/tensor.hpp"

namespace mrgnn {

// Per-atom feature layout, concatenated in this order:
//   [element one-hot: vocabulary + trailing "other" slot]
//   [degree one-hot: 0..max_degree, capped]
//   [formal charge one-hot: charge_min..charge_max, clipped]
//   [aromatic flag: one entry]
//   [explicit hydrogen count one-hot: 0..max_h_count, capped]
// then zero-padded on the right to output_dim columns.
struct FeaturizerConfig {
  std::vector<std::string> element_vocabulary = default_element_vocabulary();
  int max_degree = 6;
  int charge_min = -2;
  int charge_max = 2;
  int max_h_count = 4;
  int output_dim = 75;

  static std::vector<std::string> default_element_vocabulary();

  int element_slots() const { return static_cast<int>(element_vocabulary.size()) + 1; }
  int degree_slots() const { return max_degree + 1; }
  int charge_slots() const { return charge_max - charge_min + 1; }
  int h_slots() const { return max_h_count + 1; }
  // Width before padding (35 with defaults).
  int intrinsic_width() const {
    return element_slots() + degree_slots() + charge_slots() + 1 + h_slots();
  }

  // Throws ConfigError when output_dim < intrinsic_width or ranges are empty.
  void check() const;

  // Stable content fingerprint; part of feature-cache keys.
  std::string fingerprint() const;

  bool operator==(const FeaturizerConfig&) const = default;
};

// One row per atom, graph.atom_count() x config.output_dim.
Tensor featurize(const MolecularGraph& graph, const FeaturizerConfig& config);

}  // namespace mrgnn
