#include "mrgnn/graph.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "mrgnn/errors.hpp"

namespace mrgnn {

const char* bond_kind_name(BondKind kind) {
  switch (kind) {
    case BondKind::Single: return "single";
    case BondKind::Double: return "double";
    case BondKind::Triple: return "triple";
    case BondKind::Aromatic: return "aromatic";
  }
  return "single";
}

std::optional<BondKind> bond_kind_from_name(const std::string& name) {
  if (name == "single") return BondKind::Single;
  if (name == "double") return BondKind::Double;
  if (name == "triple") return BondKind::Triple;
  if (name == "aromatic") return BondKind::Aromatic;
  return std::nullopt;
}

int MolecularGraph::add_atom(AtomNode atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

void MolecularGraph::add_bond(int a, int b, BondKind kind) {
  if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count()) {
    std::ostringstream os;
    os << "bond endpoint out of range: (" << a << "," << b << ") with " << atom_count()
       << " atoms";
    throw ValidationError(os.str());
  }
  if (a == b) throw ValidationError("self bond on atom " + std::to_string(a));
  if (has_bond(a, b)) {
    throw ValidationError("duplicate bond between atoms " + std::to_string(a) + " and " +
                          std::to_string(b));
  }
  if (a > b) std::swap(a, b);
  bonds_.push_back(Bond{a, b, kind});
  auto insert_sorted = [](std::vector<int>& list, int v) {
    list.insert(std::lower_bound(list.begin(), list.end(), v), v);
  };
  insert_sorted(adjacency_[static_cast<std::size_t>(a)], b);
  insert_sorted(adjacency_[static_cast<std::size_t>(b)], a);
}

bool MolecularGraph::has_bond(int a, int b) const {
  if (a < 0 || b < 0 || a >= atom_count() || b >= atom_count()) return false;
  const auto& n = adjacency_[static_cast<std::size_t>(a)];
  return std::binary_search(n.begin(), n.end(), b);
}

std::optional<BondKind> MolecularGraph::bond_between(int a, int b) const {
  for (const Bond& bond : bonds_) {
    if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) return bond.kind;
  }
  return std::nullopt;
}

int MolecularGraph::component_count() const {
  if (atoms_.empty()) return 0;
  std::vector<char> seen(atoms_.size(), 0);
  int components = 0;
  std::vector<int> stack;
  for (int start = 0; start < atom_count(); ++start) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    ++components;
    stack.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : neighbors(v)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

bool MolecularGraph::connected() const { return component_count() == 1; }

std::vector<std::string> MolecularGraph::validate() const {
  std::vector<std::string> problems;
  if (atoms_.empty()) problems.push_back("graph has no atoms");
  for (const Bond& b : bonds_) {
    if (b.a >= b.b) problems.push_back("bond endpoints not normalized (a < b)");
    if (b.a < 0 || b.b >= atom_count()) problems.push_back("bond endpoint out of range");
  }
  for (int i = 0; i < atom_count(); ++i) {
    const auto& n = adjacency_[static_cast<std::size_t>(i)];
    if (!std::is_sorted(n.begin(), n.end())) {
      problems.push_back("neighbor list of atom " + std::to_string(i) + " not sorted");
    }
    if (std::adjacent_find(n.begin(), n.end()) != n.end()) {
      problems.push_back("duplicate neighbor on atom " + std::to_string(i));
    }
    for (int w : n) {
      if (w == i) problems.push_back("self loop on atom " + std::to_string(i));
      if (w < 0 || w >= atom_count()) {
        problems.push_back("neighbor out of range on atom " + std::to_string(i));
      } else {
        const auto& back = adjacency_[static_cast<std::size_t>(w)];
        if (!std::binary_search(back.begin(), back.end(), i)) {
          problems.push_back("adjacency not symmetric between " + std::to_string(i) + " and " +
                             std::to_string(w));
        }
      }
    }
  }
  for (const AtomNode& a : atoms_) {
    if (a.element.empty()) problems.push_back("atom with empty element symbol");
    if (a.explicit_hydrogens < 0) problems.push_back("negative hydrogen count");
  }
  return problems;
}

std::string graph_to_json(const MolecularGraph& graph) {
  nlohmann::json atoms = nlohmann::json::array();
  for (int i = 0; i < graph.atom_count(); ++i) {
    const AtomNode& a = graph.atom(i);
    atoms.push_back({{"element", a.element},
                     {"charge", a.formal_charge},
                     {"aromatic", a.aromatic},
                     {"h", a.explicit_hydrogens}});
  }
  nlohmann::json bonds = nlohmann::json::array();
  for (const Bond& b : graph.bonds()) {
    bonds.push_back({b.a, b.b, bond_kind_name(b.kind)});
  }
  return nlohmann::json{{"atoms", atoms}, {"bonds", bonds}}.dump();
}

std::vector<bool> atoms_on_cycle(const MolecularGraph& graph) {
  int n = graph.atom_count();
  std::vector<bool> on_cycle(static_cast<std::size_t>(n), false);
  std::vector<int> disc(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  int timer = 0;

  // Iterative Tarjan bridge search; a non-bridge tree edge or any back edge
  // puts both endpoints on a cycle.
  struct Frame {
    int node;
    int parent;
    std::size_t next_child = 0;
  };
  for (int start = 0; start < n; ++start) {
    if (disc[static_cast<std::size_t>(start)] != -1) continue;
    std::vector<Frame> stack{{start, -1}};
    disc[static_cast<std::size_t>(start)] = low[static_cast<std::size_t>(start)] = timer++;
    while (!stack.empty()) {
      Frame& frame = stack.back();
      const auto& nbrs = graph.neighbors(frame.node);
      if (frame.next_child < nbrs.size()) {
        int next = nbrs[frame.next_child++];
        if (disc[static_cast<std::size_t>(next)] == -1) {
          disc[static_cast<std::size_t>(next)] = low[static_cast<std::size_t>(next)] = timer++;
          stack.push_back({next, frame.node});
        } else if (next != frame.parent) {
          low[static_cast<std::size_t>(frame.node)] =
              std::min(low[static_cast<std::size_t>(frame.node)],
                       disc[static_cast<std::size_t>(next)]);
          on_cycle[static_cast<std::size_t>(frame.node)] = true;
          on_cycle[static_cast<std::size_t>(next)] = true;
        }
      } else {
        int node = frame.node;
        int parent = frame.parent;
        stack.pop_back();
        if (parent != -1) {
          low[static_cast<std::size_t>(parent)] = std::min(
              low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(node)]);
          if (low[static_cast<std::size_t>(node)] <= disc[static_cast<std::size_t>(parent)]) {
            on_cycle[static_cast<std::size_t>(node)] = true;
            on_cycle[static_cast<std::size_t>(parent)] = true;
          }
        }
      }
    }
  }
  return on_cycle;
}

MolecularGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph json: ") + e.what());
  }
  MolecularGraph g;
  try {
    for (const auto& a : j.at("atoms")) {
      AtomNode atom;
      atom.element = a.at("element").get<std::string>();
      atom.formal_charge = a.value("charge", 0);
      atom.aromatic = a.value("aromatic", false);
      atom.explicit_hydrogens = a.value("h", 0);
      g.add_atom(std::move(atom));
    }
    for (const auto& b : j.at("bonds")) {
      if (!b.is_array() || b.size() != 3) throw DataError("graph json: bond must be [a,b,kind]");
      auto kind = bond_kind_from_name(b.at(2).get<std::string>());
      if (!kind) throw DataError("graph json: unknown bond kind");
      g.add_bond(b.at(0).get<int>(), b.at(1).get<int>(), *kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph json: ") + e.what());
  }
  auto problems = g.validate();
  if (!problems.empty()) throw ValidationError("graph json: " + problems.front());
  return g;
}

}  // namespace mrgnn
