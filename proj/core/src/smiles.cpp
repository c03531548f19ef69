#include "mrgnn/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace mrgnn {

namespace {

bool is_aromatic_letter(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

bool is_organic_upper(char c) {
  switch (c) {
    case 'B': case 'C': case 'N': case 'O': case 'P': case 'S': case 'F': case 'I':
      return true;
    default:
      return false;
  }
}

bool organic_symbol(const std::string& element) {
  static const char* kOrganic[] = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  for (const char* s : kOrganic) {
    if (element == s) return true;
  }
  return false;
}

// Aromatic flags are only representable on these elements (lowercase form).
bool aromatic_capable(const std::string& element) {
  return element == "B" || element == "C" || element == "N" || element == "O" ||
         element == "P" || element == "S";
}

std::optional<BondKind> bond_for_char(char c) {
  switch (c) {
    case '-': return BondKind::Single;
    case '=': return BondKind::Double;
    case '#': return BondKind::Triple;
    case ':': return BondKind::Aromatic;
    default: return std::nullopt;
  }
}

char bond_symbol(BondKind kind) {
  switch (kind) {
    case BondKind::Single: return '-';
    case BondKind::Double: return '=';
    case BondKind::Triple: return '#';
    case BondKind::Aromatic: return ':';
  }
  return '-';
}

[[noreturn]] void fail(SmilesErrorKind kind, std::size_t offset, const std::string& detail) {
  throw SmilesError(kind, offset, detail);
}

}  // namespace

const char* smiles_error_kind_name(SmilesErrorKind kind) {
  switch (kind) {
    case SmilesErrorKind::UnknownCharacter: return "unknown-character";
    case SmilesErrorKind::UnsupportedFeature: return "unsupported-feature";
    case SmilesErrorKind::MalformedBracket: return "malformed-bracket";
    case SmilesErrorKind::MalformedRingNumber: return "malformed-ring-number";
    case SmilesErrorKind::UnbalancedParenthesis: return "unbalanced-parenthesis";
    case SmilesErrorKind::UnclosedRing: return "unclosed-ring";
    case SmilesErrorKind::DanglingBond: return "dangling-bond";
    case SmilesErrorKind::RingBondConflict: return "ring-bond-conflict";
    case SmilesErrorKind::UnexpectedToken: return "unexpected-token";
    case SmilesErrorKind::MultiComponent: return "multi-component";
    case SmilesErrorKind::EmptyInput: return "empty-input";
  }
  return "unknown";
}

SmilesError::SmilesError(SmilesErrorKind k, std::size_t off, const std::string& detail)
    : Error(std::string(smiles_error_kind_name(k)) + " at byte " + std::to_string(off) + ": " +
            detail),
      kind(k),
      offset(off) {}

namespace {

// Scans one bracket atom starting at text[start] == '['. Returns the token and
// the index one past the closing ']'.
std::pair<SmilesToken, std::size_t> lex_bracket(std::string_view text, std::size_t start) {
  SmilesToken tok;
  tok.kind = SmilesToken::Kind::BracketAtom;
  tok.begin = start;
  std::size_t i = start + 1;
  auto need = [&](std::size_t at) {
    if (at >= text.size()) fail(SmilesErrorKind::MalformedBracket, start, "missing ']'");
  };
  need(i);

  if (std::isdigit(static_cast<unsigned char>(text[i]))) {
    fail(SmilesErrorKind::UnsupportedFeature, i, "isotope labels are not supported");
  }
  if (text[i] == '@') {
    fail(SmilesErrorKind::UnsupportedFeature, i, "stereo markers are not supported");
  }
  if (text[i] == '*') {
    fail(SmilesErrorKind::UnsupportedFeature, i, "wildcard atoms are not supported");
  }

  if (is_aromatic_letter(text[i])) {
    tok.element = std::string(1, static_cast<char>(std::toupper(text[i])));
    tok.aromatic = true;
    ++i;
  } else if (std::isupper(static_cast<unsigned char>(text[i]))) {
    tok.element = std::string(1, text[i]);
    ++i;
    // Second letter of a two-letter symbol. 'H' is uppercase, so a following
    // hydrogen count is never swallowed here.
    if (i < text.size() && std::islower(static_cast<unsigned char>(text[i]))) {
      tok.element.push_back(text[i]);
      ++i;
    }
    if (tok.element == "H") {
      fail(SmilesErrorKind::UnsupportedFeature, start,
           "explicit hydrogen atoms are not supported (heavy-atom graphs only)");
    }
  } else {
    fail(SmilesErrorKind::MalformedBracket, i, "expected an element symbol");
  }

  auto read_digits = [&](std::size_t& at, int fallback) {
    if (at >= text.size() || !std::isdigit(static_cast<unsigned char>(text[at]))) {
      return fallback;
    }
    int value = 0;
    std::size_t first = at;
    while (at < text.size() && std::isdigit(static_cast<unsigned char>(text[at]))) {
      value = value * 10 + (text[at] - '0');
      if (value > 99) fail(SmilesErrorKind::MalformedBracket, first, "count out of range");
      ++at;
    }
    return value;
  };

  need(i);
  if (text[i] == 'H') {
    ++i;
    tok.hydrogens = read_digits(i, 1);
  }

  need(i);
  if (text[i] == '+' || text[i] == '-') {
    int sign = text[i] == '+' ? 1 : -1;
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      fail(SmilesErrorKind::MalformedBracket, i,
           "repeated charge signs are not supported; write +2 or -2");
    }
    tok.charge = sign * read_digits(i, 1);
  }

  need(i);
  if (text[i] == '@') {
    fail(SmilesErrorKind::UnsupportedFeature, i, "stereo markers are not supported");
  }
  if (text[i] != ']') {
    fail(SmilesErrorKind::MalformedBracket, i,
         std::string("unexpected '") + text[i] + "' in bracket atom");
  }
  tok.end = i + 1;
  return {tok, i + 1};
}

}  // namespace

std::vector<SmilesToken> tokenize_smiles(std::string_view text) {
  std::vector<SmilesToken> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    SmilesToken tok;
    tok.begin = i;

    if (c == '[') {
      auto [bracket, next] = lex_bracket(text, i);
      tokens.push_back(std::move(bracket));
      i = next;
      continue;
    }
    if (c == 'C' && i + 1 < text.size() && text[i + 1] == 'l') {
      tok.kind = SmilesToken::Kind::Atom;
      tok.element = "Cl";
      tok.end = i + 2;
    } else if (c == 'B' && i + 1 < text.size() && text[i + 1] == 'r') {
      tok.kind = SmilesToken::Kind::Atom;
      tok.element = "Br";
      tok.end = i + 2;
    } else if (is_organic_upper(c)) {
      tok.kind = SmilesToken::Kind::Atom;
      tok.element = std::string(1, c);
      tok.end = i + 1;
    } else if (is_aromatic_letter(c)) {
      tok.kind = SmilesToken::Kind::Atom;
      tok.element = std::string(1, static_cast<char>(std::toupper(c)));
      tok.aromatic = true;
      tok.end = i + 1;
    } else if (auto bond = bond_for_char(c)) {
      tok.kind = SmilesToken::Kind::Bond;
      tok.bond = *bond;
      tok.end = i + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = SmilesToken::Kind::RingNumber;
      tok.ring = c - '0';
      tok.end = i + 1;
    } else if (c == '%') {
      if (i + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
        fail(SmilesErrorKind::MalformedRingNumber, i, "'%' must be followed by two digits");
      }
      tok.kind = SmilesToken::Kind::RingNumber;
      tok.ring = (text[i + 1] - '0') * 10 + (text[i + 2] - '0');
      tok.end = i + 3;
    } else if (c == '(') {
      tok.kind = SmilesToken::Kind::BranchOpen;
      tok.end = i + 1;
    } else if (c == ')') {
      tok.kind = SmilesToken::Kind::BranchClose;
      tok.end = i + 1;
    } else if (c == '.') {
      tok.kind = SmilesToken::Kind::Dot;
      tok.end = i + 1;
    } else if (c == '/' || c == '\\' || c == '@') {
      fail(SmilesErrorKind::UnsupportedFeature, i, "stereo markers are not supported");
    } else if (c == '*') {
      fail(SmilesErrorKind::UnsupportedFeature, i, "wildcard atoms are not supported");
    } else {
      fail(SmilesErrorKind::UnknownCharacter, i, std::string("'") + c + "'");
    }
    i = tok.end;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

namespace {

struct RingOpening {
  int atom;
  std::optional<BondKind> bond;
  std::size_t offset;
};

BondKind default_bond(const MolecularGraph& g, int a, int b) {
  return g.atom(a).aromatic && g.atom(b).aromatic ? BondKind::Aromatic : BondKind::Single;
}

}  // namespace

MolecularGraph parse_smiles(std::string_view text) {
  const std::vector<SmilesToken> tokens = tokenize_smiles(text);

  MolecularGraph graph;
  int prev = -1;
  std::optional<BondKind> pending;
  std::size_t pending_offset = 0;
  std::vector<std::pair<int, std::size_t>> branch_stack;  // (atom, '(' offset)
  std::map<int, RingOpening> open_rings;

  for (const SmilesToken& tok : tokens) {
    switch (tok.kind) {
      case SmilesToken::Kind::Atom:
      case SmilesToken::Kind::BracketAtom: {
        AtomNode atom;
        atom.element = tok.element;
        atom.aromatic = tok.aromatic;
        atom.formal_charge = tok.charge;
        atom.explicit_hydrogens = tok.hydrogens;
        int idx = graph.add_atom(std::move(atom));
        if (prev >= 0) {
          BondKind kind = pending ? *pending : default_bond(graph, prev, idx);
          graph.add_bond(prev, idx, kind);
        } else if (pending) {
          fail(SmilesErrorKind::DanglingBond, pending_offset, "bond with no preceding atom");
        }
        pending.reset();
        prev = idx;
        break;
      }
      case SmilesToken::Kind::Bond: {
        if (prev < 0) {
          fail(SmilesErrorKind::DanglingBond, tok.begin, "bond with no preceding atom");
        }
        if (pending) {
          fail(SmilesErrorKind::DanglingBond, tok.begin, "two bond symbols in a row");
        }
        pending = tok.bond;
        pending_offset = tok.begin;
        break;
      }
      case SmilesToken::Kind::RingNumber: {
        if (prev < 0) {
          fail(SmilesErrorKind::UnexpectedToken, tok.begin,
               "ring closure digit before any atom");
        }
        auto it = open_rings.find(tok.ring);
        if (it == open_rings.end()) {
          open_rings.emplace(tok.ring, RingOpening{prev, pending, tok.begin});
        } else {
          const RingOpening opening = it->second;
          open_rings.erase(it);  // digit becomes reusable immediately
          if (opening.atom == prev) {
            fail(SmilesErrorKind::RingBondConflict, tok.begin,
                 "ring closure back to the same atom");
          }
          if (graph.has_bond(opening.atom, prev)) {
            fail(SmilesErrorKind::RingBondConflict, tok.begin,
                 "ring closure duplicates an existing bond");
          }
          BondKind kind;
          if (opening.bond && pending && *opening.bond != *pending) {
            fail(SmilesErrorKind::RingBondConflict, tok.begin,
                 "ring closure bond symbols disagree");
          } else if (opening.bond) {
            kind = *opening.bond;
          } else if (pending) {
            kind = *pending;
          } else {
            kind = default_bond(graph, opening.atom, prev);
          }
          graph.add_bond(opening.atom, prev, kind);
        }
        pending.reset();
        break;
      }
      case SmilesToken::Kind::BranchOpen: {
        if (prev < 0) {
          fail(SmilesErrorKind::UnexpectedToken, tok.begin, "branch before any atom");
        }
        if (pending) {
          fail(SmilesErrorKind::DanglingBond, pending_offset,
               "bond symbol before a branch opening");
        }
        branch_stack.emplace_back(prev, tok.begin);
        break;
      }
      case SmilesToken::Kind::BranchClose: {
        if (pending) {
          fail(SmilesErrorKind::DanglingBond, pending_offset, "bond with no following atom");
        }
        if (branch_stack.empty()) {
          fail(SmilesErrorKind::UnbalancedParenthesis, tok.begin, "')' without matching '('");
        }
        prev = branch_stack.back().first;
        branch_stack.pop_back();
        break;
      }
      case SmilesToken::Kind::Dot: {
        if (pending) {
          fail(SmilesErrorKind::DanglingBond, pending_offset, "bond interrupted by '.'");
        }
        prev = -1;
        break;
      }
    }
  }

  if (pending) {
    fail(SmilesErrorKind::DanglingBond, pending_offset, "bond with no following atom");
  }
  if (!branch_stack.empty()) {
    fail(SmilesErrorKind::UnbalancedParenthesis, branch_stack.back().second,
         "'(' without matching ')'");
  }
  if (!open_rings.empty()) {
    std::size_t first = open_rings.begin()->second.offset;
    for (const auto& [digit, opening] : open_rings) first = std::min(first, opening.offset);
    fail(SmilesErrorKind::UnclosedRing, first, "ring closure digit never paired");
  }
  if (graph.atom_count() == 0) {
    fail(SmilesErrorKind::EmptyInput, 0, "no atoms in input");
  }
  if (!graph.connected()) {
    fail(SmilesErrorKind::MultiComponent, 0,
         "input describes " + std::to_string(graph.component_count()) +
             " disconnected components");
  }
  return graph;
}

namespace {

struct Emitter {
  const MolecularGraph& g;
  std::vector<int> parent;
  std::vector<int> preorder;                       // visit position per atom
  std::vector<std::vector<int>> children;          // tree children, adjacency order
  std::vector<std::vector<int>> ring_partner;      // ring-edge partners per atom
  std::map<std::pair<int, int>, int> ring_digit;   // assigned digit per ring edge
  std::vector<bool> digit_in_use;
  std::string out;

  explicit Emitter(const MolecularGraph& graph)
      : g(graph),
        parent(static_cast<std::size_t>(graph.atom_count()), -2),
        preorder(static_cast<std::size_t>(graph.atom_count()), -1),
        children(static_cast<std::size_t>(graph.atom_count())),
        ring_partner(static_cast<std::size_t>(graph.atom_count())),
        digit_in_use(100, false) {}

  void classify_edges() {
    // Iterative DFS from atom 0; in an undirected graph every non-tree edge
    // joins a node to one of its ancestors.
    std::vector<int> stack{0};
    parent[0] = -1;
    int counter = 0;
    std::vector<std::size_t> cursor(static_cast<std::size_t>(g.atom_count()), 0);
    preorder[0] = counter++;
    while (!stack.empty()) {
      int u = stack.back();
      auto& cur = cursor[static_cast<std::size_t>(u)];
      const auto& nbrs = g.neighbors(u);
      if (cur >= nbrs.size()) {
        stack.pop_back();
        continue;
      }
      int v = nbrs[cur++];
      if (v == parent[static_cast<std::size_t>(u)]) continue;
      if (preorder[static_cast<std::size_t>(v)] == -1) {
        parent[static_cast<std::size_t>(v)] = u;
        preorder[static_cast<std::size_t>(v)] = counter++;
        children[static_cast<std::size_t>(u)].push_back(v);
        stack.push_back(v);
      } else if (preorder[static_cast<std::size_t>(v)] < preorder[static_cast<std::size_t>(u)]) {
        // Record the ring edge once, keyed from the later-visited endpoint.
        ring_partner[static_cast<std::size_t>(u)].push_back(v);
        ring_partner[static_cast<std::size_t>(v)].push_back(u);
      }
    }
  }

  int allocate_digit(std::size_t where) {
    for (int d = 1; d < 100; ++d) {
      if (!digit_in_use[static_cast<std::size_t>(d)]) {
        digit_in_use[static_cast<std::size_t>(d)] = true;
        return d;
      }
    }
    (void)where;
    throw ValidationError("emit_smiles: more than 99 simultaneously open rings");
  }

  void write_digit(int d) {
    if (d < 10) {
      out.push_back(static_cast<char>('0' + d));
    } else {
      out.push_back('%');
      out.push_back(static_cast<char>('0' + d / 10));
      out.push_back(static_cast<char>('0' + d % 10));
    }
  }

  void write_bond_if_needed(int a, int b) {
    BondKind kind = *g.bond_between(a, b);
    BondKind dflt = g.atom(a).aromatic && g.atom(b).aromatic ? BondKind::Aromatic
                                                             : BondKind::Single;
    if (kind != dflt) out.push_back(bond_symbol(kind));
  }

  void write_atom(int u) {
    const AtomNode& a = g.atom(u);
    bool organic = organic_symbol(a.element) && a.formal_charge == 0 &&
                   a.explicit_hydrogens == 0 && (!a.aromatic || aromatic_capable(a.element));
    std::string sym = a.element;
    if (a.aromatic) {
      if (!aromatic_capable(a.element)) {
        throw ValidationError("emit_smiles: aromatic flag on element " + a.element +
                              " is not representable");
      }
      sym[0] = static_cast<char>(std::tolower(sym[0]));
    }
    if (organic) {
      out += sym;
      return;
    }
    out.push_back('[');
    out += sym;
    if (a.explicit_hydrogens > 0) {
      out.push_back('H');
      if (a.explicit_hydrogens > 1) out += std::to_string(a.explicit_hydrogens);
    }
    if (a.formal_charge > 0) {
      out.push_back('+');
      if (a.formal_charge > 1) out += std::to_string(a.formal_charge);
    } else if (a.formal_charge < 0) {
      out.push_back('-');
      if (a.formal_charge < -1) out += std::to_string(-a.formal_charge);
    }
    out.push_back(']');
  }

  void emit_subtree(int u) {
    write_atom(u);
    // Ring closures at this atom: close matured digits first (freeing them),
    // then open new ones, mirroring how a parser consumes the digits.
    for (int v : ring_partner[static_cast<std::size_t>(u)]) {
      auto key = std::minmax(u, v);
      auto it = ring_digit.find({key.first, key.second});
      if (it != ring_digit.end()) {
        write_bond_if_needed(u, v);
        write_digit(it->second);
        digit_in_use[static_cast<std::size_t>(it->second)] = false;
        ring_digit.erase(it);
      }
    }
    for (int v : ring_partner[static_cast<std::size_t>(u)]) {
      auto key = std::minmax(u, v);
      if (ring_digit.count({key.first, key.second})) continue;
      if (preorder[static_cast<std::size_t>(v)] > preorder[static_cast<std::size_t>(u)]) {
        int d = allocate_digit(out.size());
        ring_digit[{key.first, key.second}] = d;
        write_digit(d);
      }
    }
    const auto& kids = children[static_cast<std::size_t>(u)];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      bool last = i + 1 == kids.size();
      if (!last) out.push_back('(');
      write_bond_if_needed(u, kids[i]);
      emit_subtree(kids[i]);
      if (!last) out.push_back(')');
    }
  }
};

}  // namespace

std::string emit_smiles(const MolecularGraph& graph) {
  auto problems = graph.validate();
  if (!problems.empty()) throw ValidationError("emit_smiles: " + problems.front());
  if (!graph.connected()) throw ValidationError("emit_smiles: graph is not connected");
  Emitter em(graph);
  em.classify_edges();
  em.emit_subtree(0);
  return em.out;
}

}  // namespace mrgnn
