#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "btt/model.hpp"

namespace btt {

struct ExpandOptions {
  int max_depth = 64;
  bool use_stdlib = true;
};

/// A bound parameter. Node names are carried as text values.
struct BoundValue {
  ParamKind kind = ParamKind::Scalar;
  ArgValue value;
};

struct Binding {
  std::string instance;
  std::map<std::string, BoundValue, std::less<>> values;

  const BoundValue* find(std::string_view name) const {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
  }
};

/// Single left-to-right pass: `~` and `$name` become the instance name,
/// `$<ident>` (longest match) the bound scalar's plain text.
std::string substitute(std::string_view pattern, const Binding& b);

/// `inst.children` must already be resolved names.
Binding bind_arguments(const TemplateDef& tmpl, const NodeDef& inst);

struct ForeachExpansion {
  std::vector<std::string> names;    // qualified node names, in generation order
  std::vector<std::string> emitted;  // qualified emit names, in list order
};

ForeachExpansion expand_foreach(const ForeachBlock& block, const Binding& b);

std::vector<std::string> splice_children(
    const std::vector<std::string>& children,
    const std::map<std::string, std::vector<std::string>, std::less<>>& emitted);

/// Templates visible to an instantiation. Builtin bodies only see builtins.
struct TemplateScope {
  const TemplateRegistry* user = nullptr;
  const TemplateRegistry* builtin = nullptr;

  const TemplateDef* lookup(std::string_view type, bool from_builtin) const;
};

using InstantiationStack = std::vector<const TemplateDef*>;

std::vector<TreeNode> instantiate(const TemplateDef& tmpl, const NodeDef& inst,
                                  const TemplateScope& scope, InstantiationStack& stack,
                                  const ExpandOptions& options = {});

/// Static checks on template definitions that do not depend on any instance:
/// every placeholder is bound, list parameters only appear where lists are
/// allowed, and every `$@block` names a visible foreach block.
std::vector<Diagnostic> check_templates(const TemplateRegistry& registry);

ExpandedTree expand_document(const Document& doc, const ExpandOptions& options = {});

}  // namespace btt
