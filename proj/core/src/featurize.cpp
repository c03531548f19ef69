#include "mrgnn/featurize.hpp"

#include <algorithm>
#include <sstream>

#include "mrgnn/errors.hpp"

namespace mrgnn {

std::vector<std::string> FeaturizerConfig::default_element_vocabulary() {
  return {"C",  "N",  "O",  "S",  "F",  "Si", "P",  "Cl",
          "Br", "Mg", "Na", "Ca", "Fe", "As", "Al", "I"};
}

void FeaturizerConfig::check() const {
  if (element_vocabulary.empty()) throw ConfigError("featurizer: empty element vocabulary");
  if (max_degree < 0 || max_h_count < 0) {
    throw ConfigError("featurizer: degree and hydrogen caps must be non-negative");
  }
  if (charge_min > charge_max) throw ConfigError("featurizer: charge_min > charge_max");
  if (output_dim < intrinsic_width()) {
    std::ostringstream os;
    os << "featurizer: output_dim " << output_dim << " smaller than intrinsic width "
       << intrinsic_width();
    throw ConfigError(os.str());
  }
}

std::string FeaturizerConfig::fingerprint() const {
  std::ostringstream os;
  for (const auto& e : element_vocabulary) os << e << ',';
  os << '|' << max_degree << '|' << charge_min << '|' << charge_max << '|' << max_h_count
     << '|' << output_dim;
  return os.str();
}

Tensor featurize(const MolecularGraph& graph, const FeaturizerConfig& config) {
  config.check();
  Tensor out(graph.atom_count(), config.output_dim);
  for (int i = 0; i < graph.atom_count(); ++i) {
    const AtomNode& atom = graph.atom(i);
    int col = 0;

    auto it = std::find(config.element_vocabulary.begin(), config.element_vocabulary.end(),
                        atom.element);
    int element_idx = it == config.element_vocabulary.end()
                          ? static_cast<int>(config.element_vocabulary.size())
                          : static_cast<int>(it - config.element_vocabulary.begin());
    out.at(i, col + element_idx) = 1.0;
    col += config.element_slots();

    int degree = std::min(graph.degree(i), config.max_degree);
    out.at(i, col + degree) = 1.0;
    col += config.degree_slots();

    int charge = std::clamp(atom.formal_charge, config.charge_min, config.charge_max);
    out.at(i, col + (charge - config.charge_min)) = 1.0;
    col += config.charge_slots();

    out.at(i, col) = atom.aromatic ? 1.0 : 0.0;
    col += 1;

    int h = std::min(atom.explicit_hydrogens, config.max_h_count);
    out.at(i, col + h) = 1.0;
  }
  return out;
}

}  // namespace mrgnn
