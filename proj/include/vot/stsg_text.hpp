#pragma once

// Textual scene-graph expressions, one line per frame:
//
//   Frame 1: {Objects: [{"car-1": [0.0,13.4,7.0,8.1]}], Triplets: [("car-1","on the left","street")]}
//
// Objects are sorted by instance id, triplets lexicographically; stuff nodes
// never appear under Objects (relation endpoints re-create them on parse);
// box numbers are printed with exactly one decimal place.

#include <string>
#include <string_view>

#include "vot/stsg.hpp"

namespace vot::stsg {

// Expression text; produced by serialize, accepted by parse.
struct StsgText {
  std::string text;

  bool operator==(const StsgText&) const = default;
};

// Deterministic writer. The graph must validate (INVALID_STSG otherwise).
// An empty graph serializes to the empty string.
StsgText serialize(const STSG& graph);

// Tolerant reader: skips prose before the first "Frame <k>:" block and after
// the last one, and accepts arbitrary whitespace between tokens. Relation
// endpoints that are not declared under Objects become stuff nodes; temporal
// links are rebuilt with link_coreferences.
// Errors: EMPTY_INPUT when no frame block is present, PARSE_ERROR (with byte
// offset and expected token) for malformed or semantically contradictory
// blocks. Never crashes or hangs on arbitrary bytes.
STSG parse(std::string_view text);

inline STSG parse(const StsgText& text) { return parse(std::string_view(text.text)); }

}  // namespace vot::stsg
