#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mrgnn {

enum class BondKind { Single, Double, Triple, Aromatic };

const char* bond_kind_name(BondKind kind);
std::optional<BondKind> bond_kind_from_name(const std::string& name);

// Heavy atom. Hydrogens never appear as nodes; explicit H counts (from
// bracket atoms, e.g. [nH]) ride along as a feature.
struct AtomNode {
  std::string element;        // symbol as written, e.g. "C", "Cl", "Na"
  int formal_charge = 0;
  bool aromatic = false;
  int explicit_hydrogens = 0;
};

struct Bond {
  int a = 0;  // always a < b
  int b = 0;
  BondKind kind = BondKind::Single;
};

// Undirected connected molecular graph. Invariants, enforced by the builder
// and checked by validate(): at least one atom, no self loops, no duplicate
// edges, adjacency symmetric with every neighbor list sorted ascending.
class MolecularGraph {
 public:
  MolecularGraph() = default;

  int add_atom(AtomNode atom);
  // Adds an undirected edge; throws ValidationError on self loops, duplicate
  // edges or out-of-range endpoints.
  void add_bond(int a, int b, BondKind kind);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const AtomNode& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  AtomNode& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  // Sorted ascending.
  const std::vector<int>& neighbors(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  bool has_bond(int a, int b) const;
  std::optional<BondKind> bond_between(int a, int b) const;

  bool connected() const;
  int component_count() const;

  // Returns human-readable invariant violations; empty means valid. add_atom
  // and add_bond keep the graph valid by construction, so this mostly guards
  // hand-built or deserialized graphs.
  std::vector<std::string> validate() const;

 private:
  std::vector<AtomNode> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
};

// Degree -> weight bucket: min(degree, cap). Shared by every degree-indexed
// layer so parameter tables stay finite.
inline int degree_bucket(int degree, int cap) { return degree < cap ? degree : cap; }

// True per atom when it lies on some cycle. An atom is on a cycle exactly
// when it has an incident non-bridge edge, so this runs bridge detection.
std::vector<bool> atoms_on_cycle(const MolecularGraph& graph);

// JSON interchange:
//   {"atoms":[{"element":"C","charge":0,"aromatic":false,"h":0},...],
//    "bonds":[[0,1,"single"],...]}
std::string graph_to_json(const MolecularGraph& graph);
MolecularGraph graph_from_json(const std::string& text);

}  // namespace mrgnn
