#pragma once

#include <cstdint>

#include "mrgnn/dataset.hpp"
#include "mrgnn/graph.hpp"

namespace mrgnn {

// Desk-scale labeled pair generator. A pair is positive exactly when the
// first molecule carries a carboxyl-like fragment and the second carries a
// ring hydroxyl; the two motifs sit at different hop radii, so solving the
// task requires both a short- and a longer-range view of each graph.
struct SyntheticSpec {
  int n_pairs = 0;          // >= 2; classes come out balanced
  std::uint64_t seed = 1;
};

// Carbon with a doubly bonded terminal oxygen and a singly bonded terminal
// oxygen (acid-like; esters fail the terminal-degree test).
bool has_carboxyl_fragment(const MolecularGraph& graph);

// Terminal oxygen singly bonded to an atom that lies on a ring.
bool has_ring_hydroxyl(const MolecularGraph& graph);

// Deterministic per seed: molecules are built, emitted as SMILES, reparsed,
// and their labels validated against the motif predicates before emission.
// Negatives mix motif-on-one-side-only and motif-free pairs, including
// near-miss fragments (esters, chain hydroxyls, bare rings).
LabeledPairDataset generate_synthetic(const SyntheticSpec& spec);

// Rows for the TSV writer: score 999 for positives, 0 for negatives, so the
// file loads through the binary-threshold path unchanged.
std::vector<PairFileRow> synthetic_rows(const LabeledPairDataset& data);

}  // namespace mrgnn
