#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btt/model.hpp"

namespace btt::yaml {

/// Minimal order-preserving YAML node with source positions. Built from
/// yaml-cpp parser events so anchors, aliases and extra documents can be
/// rejected instead of silently resolved.
struct Node {
  enum class Kind { Null, Scalar, Sequence, Map };

  Kind kind = Kind::Null;
  std::string text;     // scalar text; for Null, "~" when written as a tilde
  bool quoted = false;  // scalar written with quotes or a block style
  std::vector<Node> items;
  std::vector<std::pair<Node, Node>> entries;
  SourceSpan span;

  bool is_null() const { return kind == Kind::Null; }
  bool is_scalar() const { return kind == Kind::Scalar; }
  bool is_sequence() const { return kind == Kind::Sequence; }
  bool is_map() const { return kind == Kind::Map; }
};

/// Parses exactly one YAML document. Throws Error(PARSE_ERROR) on malformed
/// or empty input and Error(SCHEMA_ERROR) for anchors, aliases, merge keys,
/// non-scalar keys or further documents.
Node read(std::string_view text);

std::string_view kind_label(Node::Kind k);

}  // namespace btt::yaml
