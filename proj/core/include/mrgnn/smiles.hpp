#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrgnn/errors.hpp"
#include "mrgnn/graph.hpp"

namespace mrgnn {

// Supported SMILES subset: organic-subset atoms B C N O P S F Cl Br I plus
// aromatic b c n o p s; bracket atoms [symbol Hn charge] for any element;
// bonds - = # :; branches; ring closures 0-9 and %nn; '.' only when ring
// closures keep the molecule connected. Stereo markers, isotopes and
// wildcards are recognized and rejected as unsupported.
enum class SmilesErrorKind {
  UnknownCharacter,
  UnsupportedFeature,
  MalformedBracket,
  MalformedRingNumber,
  UnbalancedParenthesis,
  UnclosedRing,
  DanglingBond,
  RingBondConflict,
  UnexpectedToken,
  MultiComponent,
  EmptyInput,
};

const char* smiles_error_kind_name(SmilesErrorKind kind);

class SmilesError : public Error {
 public:
  SmilesError(SmilesErrorKind kind, std::size_t offset, const std::string& detail);
  SmilesErrorKind kind;
  std::size_t offset;  // byte offset into the input
};

struct SmilesToken {
  enum class Kind { Atom, BracketAtom, Bond, RingNumber, BranchOpen, BranchClose, Dot };

  Kind kind;
  std::size_t begin = 0;  // byte range [begin, end); tokens tile the input
  std::size_t end = 0;

  // Atom / BracketAtom payload
  std::string element;
  bool aromatic = false;
  int charge = 0;
  int hydrogens = 0;

  // Bond payload
  BondKind bond = BondKind::Single;

  // RingNumber payload
  int ring = 0;
};

// Longest-match tokenizer ("Cl" and "Br" before "C"/"B"). Byte offsets cover
// the input exactly. Throws SmilesError on unknown characters, malformed
// brackets/ring numbers and unsupported features.
std::vector<SmilesToken> tokenize_smiles(std::string_view text);

// Full parse to a validated connected molecular graph.
MolecularGraph parse_smiles(std::string_view text);

// Debug serializer: emits a string within the supported subset that parses
// back to a graph isomorphic to the input. Requires a connected graph whose
// aromatic atoms are limited to b/c/n/o/p/s.
std::string emit_smiles(const MolecularGraph& graph);

}  // namespace mrgnn
