#include "mrgnn/synthetic.hpp"

#include <string>
#include <utility>

#include "mrgnn/errors.hpp"
#include "mrgnn/rng.hpp"
#include "mrgnn/smiles.hpp"

namespace mrgnn {

bool has_carboxyl_fragment(const MolecularGraph& graph) {
  for (int i = 0; i < graph.atom_count(); ++i) {
    if (graph.atom(i).element != "C") continue;
    bool double_o = false;
    bool single_o = false;
    for (int j : graph.neighbors(i)) {
      if (graph.atom(j).element != "O" || graph.degree(j) != 1) continue;
      auto kind = graph.bond_between(i, j);
      if (kind == BondKind::Double) double_o = true;
      if (kind == BondKind::Single) single_o = true;
    }
    if (double_o && single_o) return true;
  }
  return false;
}

bool has_ring_hydroxyl(const MolecularGraph& graph) {
  std::vector<bool> on_cycle = atoms_on_cycle(graph);
  for (int i = 0; i < graph.atom_count(); ++i) {
    if (graph.atom(i).element != "O" || graph.degree(i) != 1) continue;
    int nb = graph.neighbors(i)[0];
    if (on_cycle[static_cast<std::size_t>(nb)] &&
        graph.bond_between(i, nb) == BondKind::Single) {
      return true;
    }
  }
  return false;
}

namespace {

AtomNode make_atom(const char* element, bool aromatic = false) {
  AtomNode a;
  a.element = element;
  a.aromatic = aromatic;
  return a;
}

std::string pick_chain_element(Rng& rng) {
  auto r = rng.below(100);
  if (r < 70) return "C";
  if (r < 82) return "N";
  if (r < 92) return "O";
  return "S";
}

// Linear chain of `len` atoms; attached to `attach` when attach >= 0.
// Occasional C=C double bonds; heteroatoms always bond single.
void grow_chain(MolecularGraph& g, Rng& rng, int attach, int len) {
  int prev = attach;
  for (int i = 0; i < len; ++i) {
    int id = g.add_atom(make_atom(pick_chain_element(rng).c_str()));
    if (prev >= 0) {
      BondKind kind = BondKind::Single;
      if (g.atom(prev).element == "C" && g.atom(id).element == "C" && rng.below(100) < 12) {
        kind = BondKind::Double;
      }
      g.add_bond(prev, id, kind);
    }
    prev = id;
  }
}

// Appends a 5/6-ring (aromatic rings are benzene-like). The first ring atom
// is the attachment point for anything built before it.
void add_ring(MolecularGraph& g, Rng& rng) {
  bool aromatic = rng.below(100) < 60;
  int size = aromatic ? 6 : (rng.below(2) == 0 ? 5 : 6);
  int base = g.atom_count();
  for (int i = 0; i < size; ++i) g.add_atom(make_atom("C", aromatic));
  BondKind kind = aromatic ? BondKind::Aromatic : BondKind::Single;
  for (int i = 0; i < size; ++i) g.add_bond(base + i, base + (i + 1) % size, kind);
}

int pick_atom(const std::vector<int>& candidates, Rng& rng) {
  return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
}

std::vector<int> atoms_where(const MolecularGraph& g, bool want_on_cycle) {
  std::vector<bool> on_cycle = atoms_on_cycle(g);
  std::vector<int> out;
  for (int i = 0; i < g.atom_count(); ++i) {
    if (on_cycle[static_cast<std::size_t>(i)] == want_on_cycle && g.degree(i) < 3) {
      out.push_back(i);
    }
  }
  return out;
}

void graft_carboxyl(MolecularGraph& g, Rng& rng) {
  std::vector<int> spots;
  for (int i = 0; i < g.atom_count(); ++i) {
    if (g.degree(i) < 3) spots.push_back(i);
  }
  int attach = pick_atom(spots, rng);
  int c = g.add_atom(make_atom("C"));
  g.add_bond(attach, c, BondKind::Single);
  g.add_bond(c, g.add_atom(make_atom("O")), BondKind::Double);
  g.add_bond(c, g.add_atom(make_atom("O")), BondKind::Single);
}

// Near miss for the carboxyl rule: ester (the single-bonded oxygen is not
// terminal) or bare aldehyde (no single-bonded oxygen at all).
void graft_carbonyl_decoy(MolecularGraph& g, Rng& rng) {
  std::vector<int> spots;
  for (int i = 0; i < g.atom_count(); ++i) {
    if (g.degree(i) < 3) spots.push_back(i);
  }
  int attach = pick_atom(spots, rng);
  int c = g.add_atom(make_atom("C"));
  g.add_bond(attach, c, BondKind::Single);
  g.add_bond(c, g.add_atom(make_atom("O")), BondKind::Double);
  if (rng.below(2) == 0 && g.atom_count() + 2 <= 12) {
    int o = g.add_atom(make_atom("O"));
    g.add_bond(c, o, BondKind::Single);
    g.add_bond(o, g.add_atom(make_atom("C")), BondKind::Single);
  }
}

void graft_hydroxyl(MolecularGraph& g, Rng& rng, bool on_ring) {
  std::vector<int> spots = atoms_where(g, on_ring);
  int attach = pick_atom(spots, rng);
  g.add_bond(attach, g.add_atom(make_atom("O")), BondKind::Single);
}

MolecularGraph build_skeleton(Rng& rng, bool with_ring, int chain_len) {
  MolecularGraph g;
  if (with_ring) {
    add_ring(g, rng);
    if (chain_len > 0) grow_chain(g, rng, 0, chain_len);
  } else {
    grow_chain(g, rng, -1, chain_len);
  }
  return g;
}

enum class Role { CarboxylSide, NoCarboxylSide, RingHydroxylSide, NoRingHydroxylSide };

MolecularGraph build_for_role(Rng& rng, Role role) {
  switch (role) {
    case Role::CarboxylSide: {
      bool ring = rng.below(100) < 30;
      MolecularGraph g = build_skeleton(
          rng, ring, ring ? static_cast<int>(rng.range(0, 2)) : static_cast<int>(rng.range(3, 6)));
      graft_carboxyl(g, rng);
      return g;
    }
    case Role::NoCarboxylSide: {
      bool ring = rng.below(100) < 30;
      MolecularGraph g = build_skeleton(
          rng, ring, ring ? static_cast<int>(rng.range(0, 2)) : static_cast<int>(rng.range(4, 8)));
      if (rng.below(100) < 40) graft_carbonyl_decoy(g, rng);
      return g;
    }
    case Role::RingHydroxylSide: {
      MolecularGraph g = build_skeleton(rng, true, static_cast<int>(rng.range(0, 3)));
      graft_hydroxyl(g, rng, /*on_ring=*/true);
      return g;
    }
    case Role::NoRingHydroxylSide: {
      auto which = rng.below(100);
      if (which < 35) {
        // Ring present, hydroxyl on the chain: the long-range cue alone
        // must not fire the rule.
        MolecularGraph g = build_skeleton(rng, true, static_cast<int>(rng.range(1, 3)));
        graft_hydroxyl(g, rng, /*on_ring=*/false);
        return g;
      }
      if (which < 70) {
        return build_skeleton(rng, true, static_cast<int>(rng.range(0, 3)));
      }
      MolecularGraph g = build_skeleton(rng, false, static_cast<int>(rng.range(4, 7)));
      if (rng.below(2) == 0) graft_hydroxyl(g, rng, /*on_ring=*/false);
      return g;
    }
  }
  throw ValidationError("synthetic: unknown role");
}

bool role_satisfied(Role role, const MolecularGraph& g) {
  switch (role) {
    case Role::CarboxylSide:
      return has_carboxyl_fragment(g);
    case Role::NoCarboxylSide:
      return !has_carboxyl_fragment(g);
    case Role::RingHydroxylSide:
      return has_ring_hydroxyl(g);
    case Role::NoRingHydroxylSide:
      return !has_ring_hydroxyl(g);
  }
  return false;
}

// Emits, reparses and re-checks the motif so the label is guaranteed for the
// SMILES that actually lands in the dataset.
std::string make_molecule(Rng& rng, Role role) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    MolecularGraph g = build_for_role(rng, role);
    if (g.atom_count() < 4 || g.atom_count() > 12) continue;
    std::string smiles = emit_smiles(g);
    MolecularGraph back = parse_smiles(smiles);
    if (role_satisfied(role, back)) return smiles;
  }
  throw ValidationError("synthetic: failed to build a molecule for its role");
}

}  // namespace

LabeledPairDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_pairs < 2) {
    throw ConfigError("synthetic: n_pairs must be at least 2, got " +
                      std::to_string(spec.n_pairs));
  }
  Rng rng(mix_seed(spec.seed, 0x5f9e));

  LabeledPairDataset data;
  data.num_labels = 2;
  data.provenance.source = "synthetic(seed=" + std::to_string(spec.seed) + ")";
  data.provenance.rows_read = static_cast<std::size_t>(spec.n_pairs);

  int n_pos = spec.n_pairs / 2;
  for (int i = 0; i < n_pos; ++i) {
    data.records.push_back({make_molecule(rng, Role::CarboxylSide),
                            make_molecule(rng, Role::RingHydroxylSide), 1});
  }
  for (int i = 0; i < spec.n_pairs - n_pos; ++i) {
    switch (i % 3) {
      case 0:
        data.records.push_back({make_molecule(rng, Role::NoCarboxylSide),
                                make_molecule(rng, Role::RingHydroxylSide), 0});
        break;
      case 1:
        data.records.push_back({make_molecule(rng, Role::CarboxylSide),
                                make_molecule(rng, Role::NoRingHydroxylSide), 0});
        break;
      default:
        data.records.push_back({make_molecule(rng, Role::NoCarboxylSide),
                                make_molecule(rng, Role::NoRingHydroxylSide), 0});
    }
  }
  rng.shuffle(data.records);
  return data;
}

std::vector<PairFileRow> synthetic_rows(const LabeledPairDataset& data) {
  std::vector<PairFileRow> rows;
  rows.reserve(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const PairRecord& rec = data.records[i];
    rows.push_back({rec.smiles_a, rec.smiles_b, rec.label == 1 ? 999 : 0, i + 1});
  }
  return rows;
}

}  // namespace mrgnn
