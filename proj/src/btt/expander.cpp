#include "btt/expander.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "btt/stdlib.hpp"

namespace btt {

namespace {

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

/// Length of the identifier starting at s[pos], 0 if none.
std::size_t ident_length(std::string_view s, std::size_t pos) {
  if (pos >= s.size() || !ident_start(s[pos])) return 0;
  std::size_t end = pos + 1;
  while (end < s.size() && ident_char(s[end])) ++end;
  return end - pos;
}

/// The parameter name when `text` is exactly `$<ident>`.
std::optional<std::string_view> whole_reference(std::string_view text) {
  if (text.size() < 2 || text[0] != '$') return std::nullopt;
  if (ident_length(text, 1) != text.size() - 1) return std::nullopt;
  return text.substr(1);
}

/// True when `pattern` starts with the instance alias (`~` or `$name`).
bool starts_with_alias(std::string_view pattern) {
  if (pattern.starts_with("~")) return true;
  return pattern.starts_with("$name") && ident_length(pattern, 1) == 4;
}

std::string qualify(std::string_view pattern, const Binding& b) {
  std::string q = substitute(pattern, b);
  if (starts_with_alias(pattern) &&
      (q == b.instance || std::string_view(q).starts_with(b.instance + "/")))
    return q;
  return b.instance + "/" + q;
}

[[noreturn]] void fail(Code code, std::string subject, std::string message,
                       std::optional<SourceSpan> span = std::nullopt) {
  throw Error(code, std::move(subject), std::move(message), span);
}

std::string describe(const ArgValue& v) {
  return std::holds_alternative<ValueList>(v) ? "a list" : "a scalar";
}

// ---------------------------------------------------------------------------
// Instantiation
// ---------------------------------------------------------------------------

struct BlockScope {
  std::map<std::string, std::vector<std::string>, std::less<>> blocks;
  std::shared_ptr<BlockScope> parent;

  const std::vector<std::string>* find(std::string_view name) const {
    for (const BlockScope* s = this; s; s = s->parent.get())
      if (auto it = s->blocks.find(name); it != s->blocks.end()) return &it->second;
    return nullptr;
  }
};

struct Pending {
  std::string name;
  const NodeDef* pattern;
  Binding binding;
  std::shared_ptr<BlockScope> blocks;
};

Binding iteration_binding(const Binding& outer, const ForeachBlock& block, const Value& element,
                          ParamKind list_kind, std::size_t k) {
  Binding b = outer;
  b.values[block.var] = {list_kind == ParamKind::Nodes ? ParamKind::Node : ParamKind::Scalar,
                         element};
  b.values[block.index] = {ParamKind::Scalar, Value(static_cast<std::int64_t>(k))};
  return b;
}

const ValueList& foreach_list(const ForeachBlock& block, const Binding& b, ParamKind& kind) {
  auto ref = whole_reference(block.list);
  if (!ref) fail(Code::NotAList, b.instance, "foreach list '" + block.list + "' is not a $reference",
                 block.span);
  const BoundValue* bound = b.find(*ref);
  if (!bound)
    fail(Code::UnboundPlaceholder, b.instance, "'$" + std::string(*ref) + "' is not bound",
         block.span);
  const auto* list = std::get_if<ValueList>(&bound->value);
  if (!list)
    fail(Code::NotAList, b.instance, "foreach over '$" + std::string(*ref) + "', which is not a list",
         block.span);
  kind = bound->kind;
  return *list;
}

void collect(const std::vector<BodyEntry>& entries, const Binding& b,
             const std::shared_ptr<BlockScope>& scope, std::vector<Pending>& out);

std::vector<std::string> unroll(const ForeachBlock& block, const Binding& b,
                                const std::shared_ptr<BlockScope>& parent,
                                std::vector<Pending>& out) {
  ParamKind kind{};
  const ValueList& list = foreach_list(block, b, kind);
  std::vector<std::string> emitted;
  std::set<std::string> seen;
  for (std::size_t k = 0; k < list.size(); ++k) {
    Binding inner = iteration_binding(b, block, list[k], kind, k);
    auto scope = std::make_shared<BlockScope>();
    scope->parent = parent;
    collect(block.nodes, inner, scope, out);
    std::string name = qualify(block.emit, inner);
    if (!seen.insert(name).second)
      fail(Code::NameClash, name, "foreach emits the same name in two iterations", block.span);
    emitted.push_back(std::move(name));
  }
  return emitted;
}

void collect(const std::vector<BodyEntry>& entries, const Binding& b,
             const std::shared_ptr<BlockScope>& scope, std::vector<Pending>& out) {
  for (const auto& entry : entries) {
    if (const auto* def = std::get_if<NodeDef>(&entry.item)) {
      out.push_back({qualify(entry.key, b), def, b, scope});
    } else {
      const auto& block = *std::get<std::shared_ptr<const ForeachBlock>>(entry.item);
      auto emitted = unroll(block, b, scope, out);
      scope->blocks[entry.key] = std::move(emitted);
    }
  }
}

std::optional<std::string> substitute_opt(const std::optional<std::string>& s, const Binding& b) {
  if (!s) return std::nullopt;
  return substitute(*s, b);
}

Value substitute_value(const Value& v, const Binding& b) {
  if (v.tag() != Value::Tag::Text) return v;
  if (auto ref = whole_reference(v.as_text()); ref && *ref != "name") {
    const BoundValue* bound = b.find(*ref);
    if (bound && std::holds_alternative<ValueList>(bound->value))
      fail(Code::ListInScalarPosition, b.instance,
           "list '$" + std::string(*ref) + "' used inside a list argument");
    if (bound) return std::get<Value>(bound->value);
  }
  return Value(substitute(v.as_text(), b));
}

ArgValue substitute_arg(const ArgValue& v, const Binding& b) {
  if (const auto* list = std::get_if<ValueList>(&v)) {
    ValueList out;
    for (const auto& item : *list) out.push_back(substitute_value(item, b));
    return out;
  }
  const Value& scalar = std::get<Value>(v);
  if (scalar.tag() == Value::Tag::Text)
    if (auto ref = whole_reference(scalar.as_text()); ref && *ref != "name")
      if (const BoundValue* bound = b.find(*ref)) return bound->value;
  return substitute_value(scalar, b);
}

class Expander {
 public:
  Expander(const TemplateScope& scope, const ExpandOptions& options)
      : scope_(scope), options_(options) {}

  void top_level(const NodeDef& def, std::vector<TreeNode>& out, InstantiationStack& stack) {
    if (auto kind = parse_kind(def.type)) {
      if (!def.args.empty())
        fail(Code::UnknownArg, def.name, "primary node '" + def.type + "' takes no args", def.span);
      out.push_back(primary(def, *kind, def.name, def.children, def.span));
      return;
    }
    const TemplateDef* tmpl = scope_.lookup(def.type, false);
    if (!tmpl) fail(Code::UnknownType, def.name, "unknown node type '" + def.type + "'", def.span);
    instantiate(*tmpl, def, stack, out);
  }

  void instantiate(const TemplateDef& tmpl, const NodeDef& inst, InstantiationStack& stack,
                   std::vector<TreeNode>& out) {
    try {
      if (std::find(stack.begin(), stack.end(), &tmpl) != stack.end())
        fail(Code::RecursiveTemplate, inst.name,
             "template '" + tmpl.name + "' instantiates itself", inst.span);
      if (static_cast<int>(stack.size()) >= options_.max_depth)
        fail(Code::DepthExceeded, inst.name,
             "template nesting deeper than " + std::to_string(options_.max_depth), inst.span);
      stack.push_back(&tmpl);
      struct Pop {
        InstantiationStack& s;
        ~Pop() { s.pop_back(); }
      } pop{stack};
      body(tmpl, inst, bind_arguments(tmpl, inst), stack, out);
    } catch (Error& e) {
      for (auto& d : e.diagnostics()) {
        d.chain.insert(d.chain.begin(), inst.name + " (" + tmpl.name + ")");
        if (!d.span) d.span = inst.span;
      }
      throw;
    }
  }

 private:
  void body(const TemplateDef& tmpl, const NodeDef& inst, Binding binding,
            InstantiationStack& stack, std::vector<TreeNode>& out) {
    std::vector<Pending> pending;
    auto top = std::make_shared<BlockScope>();
    collect(tmpl.body, binding, top, pending);

    const std::string root = qualify(tmpl.root, binding);
    const std::string& instance = binding.instance;
    std::map<std::string, std::size_t, std::less<>> locals;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (!locals.emplace(pending[i].name, i).second)
        fail(Code::NameClash, pending[i].name, "two template nodes qualify to the same name",
             pending[i].pattern->span);
    }
    auto root_it = locals.find(root);
    if (root_it == locals.end())
      fail(Code::BadRoot, instance, "template root '" + tmpl.root + "' names no template node",
           tmpl.span);
    if (root != instance && locals.contains(instance))
      fail(Code::NameClash, instance, "a template node takes the instance name", tmpl.span);
    pending[root_it->second].name = instance;

    auto rename = [&](std::string n) { return n == root ? instance : n; };
    auto is_local = [&](const std::string& n) { return locals.contains(n); };

    for (const auto& p : pending) {
      const NodeDef& pat = *p.pattern;
      const Binding& b = p.binding;
      auto span = tmpl.builtin ? inst.span : (pat.span ? pat.span : inst.span);

      std::vector<std::string> children;
      for (const auto& c : pat.children) {
        if (c.starts_with("$@")) {
          const auto* emitted = p.blocks->find(std::string_view(c).substr(2));
          if (!emitted) fail(Code::UnknownBlock, p.name, "no foreach block '" + c.substr(2) + "'",
                             span);
          for (const auto& e : *emitted) children.push_back(rename(e));
          continue;
        }
        if (starts_with_alias(c)) {
          children.push_back(rename(qualify(c, b)));
          continue;
        }
        if (auto ref = whole_reference(c)) {
          if (const BoundValue* bound = b.find(*ref)) {
            if (const auto* list = std::get_if<ValueList>(&bound->value)) {
              for (const auto& v : *list) children.push_back(render_plain(v));
            } else {
              children.push_back(render_plain(std::get<Value>(bound->value)));
            }
            continue;
          }
        }
        std::string s = substitute(c, b);
        std::string local = instance + "/" + s;
        children.push_back(is_local(local) ? rename(local) : s);
      }

      std::string type = substitute(pat.type, b);
      if (auto kind = parse_kind(type)) {
        if (!pat.args.empty())
          fail(Code::UnknownArg, p.name, "primary node '" + type + "' takes no args", span);
        NodeDef def;
        def.name = p.name;
        def.if_expr = substitute_opt(pat.if_expr, b);
        def.then_expr = substitute_opt(pat.then_expr, b);
        def.else_expr = substitute_opt(pat.else_expr, b);
        def.result = substitute_opt(pat.result, b);
        if (pat.script) {
          def.script.emplace();
          for (const auto& line : *pat.script) def.script->push_back(substitute(line, b));
        }
        check_payload(def, *kind, span);
        out.push_back(primary(def, *kind, p.name, std::move(children), span));
        continue;
      }
      if (pat.if_expr || pat.then_expr || pat.else_expr || pat.script || pat.result)
        fail(Code::SchemaError, p.name,
             "if/then/else/script/result are only valid on condition and action nodes", span);
      const TemplateDef* nested = scope_.lookup(type, tmpl.builtin);
      if (!nested) fail(Code::UnknownType, p.name, "unknown node type '" + type + "'", span);
      NodeDef child_inst;
      child_inst.name = p.name;
      child_inst.type = type;
      child_inst.children = std::move(children);
      child_inst.span = span;
      for (const auto& [k, v] : pat.args) child_inst.args.emplace_back(k, substitute_arg(v, b));
      instantiate(*nested, child_inst, stack, out);
    }
  }

  static void check_payload(NodeDef& def, NodeKind kind, std::optional<SourceSpan> span) {
    const bool condition_keys = def.if_expr || def.then_expr || def.else_expr;
    const bool action_keys = def.script || def.result;
    if (kind == NodeKind::Condition) {
      if (action_keys) fail(Code::SchemaError, def.name, "condition nodes take no script/result", span);
      if (!def.if_expr) fail(Code::SchemaError, def.name, "condition node has no 'if'", span);
      if (!def.then_expr) def.then_expr = "SUCCESS";
      if (!def.else_expr) def.else_expr = "FAILURE";
    } else if (kind == NodeKind::Action) {
      if (condition_keys) fail(Code::SchemaError, def.name, "action nodes take no if/then/else", span);
      if (!def.result) def.result = "SUCCESS";
    } else if (condition_keys || action_keys) {
      fail(Code::SchemaError, def.name,
           "if/then/else/script/result are only valid on condition and action nodes", span);
    }
  }

  static TreeNode primary(const NodeDef& def, NodeKind kind, std::string name,
                          std::vector<std::string> children, std::optional<SourceSpan> span) {
    TreeNode n;
    n.name = std::move(name);
    n.kind = kind;
    n.children = std::move(children);
    n.span = span;
    if (kind == NodeKind::Condition) {
      n.payload = ConditionSpec{def.if_expr.value_or(""), def.then_expr.value_or("SUCCESS"),
                                def.else_expr.value_or("FAILURE")};
    } else if (kind == NodeKind::Action) {
      n.payload = ActionSpec{def.script.value_or(std::vector<std::string>{}),
                             def.result.value_or("SUCCESS")};
    }
    return n;
  }

  const TemplateScope& scope_;
  const ExpandOptions& options_;
};

// ---------------------------------------------------------------------------
// Static template checks
// ---------------------------------------------------------------------------

class TemplateChecker {
 public:
  explicit TemplateChecker(const TemplateDef& t) : tmpl_(t) {
    scalars_.insert("name");
    for (const auto& p : t.params) (is_list_kind(p.kind) ? lists_ : scalars_).insert(p.name);
  }

  void run(std::vector<Diagnostic>& out) {
    out_ = &out;
    text(tmpl_.root, "root", tmpl_.span);
    entries(tmpl_.body, {});
  }

 private:
  void report(Code code, std::string message, std::optional<SourceSpan> span) {
    out_->push_back({code, tmpl_.name, std::move(message), span ? span : tmpl_.span, {}});
  }

  void text(std::string_view s, std::string_view where, std::optional<SourceSpan> span) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '$') continue;
      std::size_t n = ident_length(s, i + 1);
      if (n == 0) {
        report(Code::UnboundPlaceholder,
               "stray '$' in " + std::string(where) + " '" + std::string(s) + "'", span);
        continue;
      }
      std::string id(s.substr(i + 1, n));
      if (lists_.contains(id))
        report(Code::ListInScalarPosition,
               "list '$" + id + "' used in " + std::string(where) + " '" + std::string(s) + "'",
               span);
      else if (!scalars_.contains(id))
        report(Code::UnboundPlaceholder,
               "'$" + id + "' in " + std::string(where) + " is not a parameter or loop variable",
               span);
      i += n;
    }
  }

  /// A value that may forward a whole list (`args: {x: $list}` or a children entry).
  void list_position(std::string_view s, std::string_view where, std::optional<SourceSpan> span) {
    if (auto ref = whole_reference(s); ref && lists_.contains(std::string(*ref))) return;
    text(s, where, span);
  }

  void entries(const std::vector<BodyEntry>& body, std::set<std::string> outer_blocks) {
    std::set<std::string> blocks = outer_blocks;
    for (const auto& e : body)
      if (std::holds_alternative<std::shared_ptr<const ForeachBlock>>(e.item)) blocks.insert(e.key);
    for (const auto& e : body) {
      if (const auto* def = std::get_if<NodeDef>(&e.item)) {
        node(e.key, *def, blocks);
        continue;
      }
      const auto& block = *std::get<std::shared_ptr<const ForeachBlock>>(e.item);
      auto ref = whole_reference(block.list);
      std::string id = ref ? std::string(*ref) : std::string();
      if (!lists_.contains(id)) {
        report(scalars_.contains(id) ? Code::NotAList : Code::UnboundPlaceholder,
               "foreach list '" + block.list + "' is not a list parameter", block.span);
        continue;
      }
      scalars_.insert(block.var);
      scalars_.insert(block.index);
      text(block.emit, "emit", block.span);
      entries(block.nodes, blocks);
      scalars_.erase(block.var);
      scalars_.erase(block.index);
    }
  }

  void node(const std::string& key, const NodeDef& def, const std::set<std::string>& blocks) {
    auto span = def.span;
    text(key, "node name", span);
    text(def.type, "type", span);
    for (const auto& c : def.children) {
      if (c.starts_with("$@")) {
        if (!blocks.contains(c.substr(2)))
          report(Code::UnknownBlock, "children of '" + key + "' splice unknown block '" +
                                         c.substr(2) + "'",
                 span);
        continue;
      }
      list_position(c, "children", span);
    }
    for (const auto& [k, v] : def.args) {
      if (const auto* list = std::get_if<ValueList>(&v)) {
        for (const auto& item : *list)
          if (item.tag() == Value::Tag::Text) text(item.as_text(), "argument '" + k + "'", span);
      } else if (const Value& s = std::get<Value>(v); s.tag() == Value::Tag::Text) {
        list_position(s.as_text(), "argument '" + k + "'", span);
      }
    }
    for (const auto* field : {&def.if_expr, &def.then_expr, &def.else_expr, &def.result})
      if (*field) text(**field, "expression", span);
    if (def.script)
      for (const auto& line : *def.script) text(line, "script", span);
  }

  const TemplateDef& tmpl_;
  std::set<std::string> scalars_;
  std::set<std::string> lists_;
  std::vector<Diagnostic>* out_ = nullptr;
};

void attach_spans(std::vector<Diagnostic>& diags, const ExpandedTree& tree) {
  for (auto& d : diags)
    if (!d.span)
      if (const TreeNode* n = tree.find(d.subject)) d.span = n->span;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string substitute(std::string_view pattern, const Binding& b) {
  std::string out;
  out.reserve(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '~') {
      out += b.instance;
      continue;
    }
    if (c != '$') {
      out += c;
      continue;
    }
    std::size_t n = ident_length(pattern, i + 1);
    if (n == 0)
      fail(Code::UnboundPlaceholder, b.instance,
           "stray '$' in '" + std::string(pattern) + "'");
    std::string_view id = pattern.substr(i + 1, n);
    i += n;
    if (id == "name") {
      out += b.instance;
      continue;
    }
    const BoundValue* bound = b.find(id);
    if (!bound)
      fail(Code::UnboundPlaceholder, b.instance,
           "'$" + std::string(id) + "' is not bound in '" + std::string(pattern) + "'");
    if (std::holds_alternative<ValueList>(bound->value))
      fail(Code::ListInScalarPosition, b.instance,
           "list '$" + std::string(id) + "' used in '" + std::string(pattern) + "'");
    out += render_plain(std::get<Value>(bound->value));
  }
  return out;
}

Binding bind_arguments(const TemplateDef& tmpl, const NodeDef& inst) {
  Binding b;
  b.instance = inst.name;
  std::size_t singles = 0;
  bool variadic = false;
  for (const auto& p : tmpl.params) {
    if (p.kind == ParamKind::Node) ++singles;
    if (p.kind == ParamKind::Nodes) variadic = true;
  }
  const std::size_t n = inst.children.size();
  if (variadic ? n < singles + 1 : n != singles)
    fail(Code::ArityMismatch, inst.name,
         "template '" + tmpl.name + "' expects " + (variadic ? "at least " : "") +
             std::to_string(variadic ? singles + 1 : singles) +
             (!variadic && singles == 1 ? " child" : " children") + ", got " + std::to_string(n),
         inst.span);

  for (const auto& [k, v] : inst.args) {
    const ParamDecl* p = tmpl.find_param(k);
    if (!p)
      fail(Code::UnknownArg, inst.name,
           "template '" + tmpl.name + "' has no argument '" + k + "'", inst.span);
    if (is_node_kind(p->kind))
      fail(Code::KindMismatch, inst.name,
           "node argument '" + k + "' must be passed as children", inst.span);
    if (std::holds_alternative<ValueList>(v) != (p->kind == ParamKind::ScalarList))
      fail(Code::KindMismatch, inst.name,
           "argument '" + k + "' is " + std::string(param_kind_name(p->kind)) + " but got " +
               describe(v),
           inst.span);
  }

  std::size_t next_child = 0;
  for (const auto& p : tmpl.params) {
    if (p.kind == ParamKind::Node) {
      b.values[p.name] = {p.kind, Value(inst.children[next_child++])};
    } else if (p.kind == ParamKind::Nodes) {
      ValueList rest;
      // node params after the variadic one are rejected by the parser
      while (next_child < n) rest.emplace_back(inst.children[next_child++]);
      b.values[p.name] = {p.kind, std::move(rest)};
    } else {
      auto it = std::find_if(inst.args.begin(), inst.args.end(),
                             [&](const auto& a) { return a.first == p.name; });
      if (it != inst.args.end())
        b.values[p.name] = {p.kind, it->second};
      else if (p.default_value)
        b.values[p.name] = {p.kind, *p.default_value};
      else
        fail(Code::MissingArg, inst.name,
             "template '" + tmpl.name + "' needs argument '" + p.name + "'", inst.span);
    }
  }
  return b;
}

ForeachExpansion expand_foreach(const ForeachBlock& block, const Binding& b) {
  std::vector<Pending> pending;
  auto scope = std::make_shared<BlockScope>();
  ForeachExpansion out;
  out.emitted = unroll(block, b, scope, pending);
  std::set<std::string> seen;
  for (auto& p : pending) {
    if (!seen.insert(p.name).second)
      fail(Code::NameClash, p.name, "two foreach iterations produce the same name", block.span);
    out.names.push_back(std::move(p.name));
  }
  return out;
}

std::vector<std::string> splice_children(
    const std::vector<std::string>& children,
    const std::map<std::string, std::vector<std::string>, std::less<>>& emitted) {
  std::vector<std::string> out;
  for (const auto& c : children) {
    if (!c.starts_with("$@")) {
      out.push_back(c);
      continue;
    }
    auto it = emitted.find(std::string_view(c).substr(2));
    if (it == emitted.end())
      fail(Code::UnknownBlock, c, "no foreach block '" + c.substr(2) + "'");
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

const TemplateDef* TemplateScope::lookup(std::string_view type, bool from_builtin) const {
  if (!from_builtin && user)
    if (const TemplateDef* t = user->find(type)) return t;
  return builtin ? builtin->find(type) : nullptr;
}

std::vector<TreeNode> instantiate(const TemplateDef& tmpl, const NodeDef& inst,
                                  const TemplateScope& scope, InstantiationStack& stack,
                                  const ExpandOptions& options) {
  std::vector<TreeNode> out;
  Expander(scope, options).instantiate(tmpl, inst, stack, out);
  return out;
}

std::vector<Diagnostic> check_templates(const TemplateRegistry& registry) {
  std::vector<Diagnostic> out;
  for (const auto& t : registry.entries()) TemplateChecker(t).run(out);
  return out;
}

ExpandedTree expand_document(const Document& doc, const ExpandOptions& options) {
  if (auto diags = check_templates(doc.templates); !diags.empty()) throw Error(std::move(diags));

  TemplateScope scope{&doc.templates, options.use_stdlib ? &builtin_templates() : nullptr};
  Expander expander(scope, options);
  ExpandedTree tree;
  tree.root = doc.root;
  std::vector<Diagnostic> errors;
  for (const auto& def : doc.nodes) {
    InstantiationStack stack;
    try {
      expander.top_level(def, tree.nodes, stack);
    } catch (const Error& e) {
      errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
    }
  }
  if (!errors.empty()) throw Error(std::move(errors));

  auto diags = validate_expanded(tree);
  if (!diags.empty()) {
    attach_spans(diags, tree);
    for (auto& d : diags)
      if (d.code == Code::BadRoot && !d.span) d.span = doc.root_span;
    throw Error(std::move(diags));
  }
  return tree;
}

}  // namespace btt
