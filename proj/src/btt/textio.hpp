#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "btt/model.hpp"

namespace btt {

/// Reads a tree description. Type names are kept verbatim; resolving them
/// against primary kinds and templates is the expander's job.
Document parse_document(std::string_view text);

/// Reads a file holding only a `templates:` mapping.
TemplateRegistry parse_template_library(std::string_view text, bool builtin);

Scenario parse_scenario(std::string_view text);

/// Canonical YAML for a valid tree; throws CANONICALIZE_ERROR otherwise.
std::string serialize_expanded(const ExpandedTree& tree);

/// Graphviz digraph of a valid tree: nodes in pre-order, then edges in
/// children order.
std::string render_dot(const ExpandedTree& tree);

/// Whole file as bytes; throws IO_ERROR.
std::string read_file(const std::filesystem::path& path);

/// Converts a plain YAML scalar to a typed value (bool, integer, float, text).
Value scalar_value(std::string_view text, bool quoted);

}  // namespace btt
