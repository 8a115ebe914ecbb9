#include "btt/textio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include "btt/yaml_tree.hpp"

namespace btt {

namespace {

using yaml::Node;

[[noreturn]] void schema_error(const Node& at, std::string message, std::string subject = {}) {
  throw Error(Code::SchemaError, std::move(subject), std::move(message), at.span);
}

void expect_map(const Node& n, std::string_view what) {
  if (!n.is_map())
    schema_error(n, std::string(what) + " must be a mapping, found " +
                        std::string(yaml::kind_label(n.kind)));
}

void expect_sequence(const Node& n, std::string_view what) {
  if (!n.is_sequence())
    schema_error(n, std::string(what) + " must be a sequence, found " +
                        std::string(yaml::kind_label(n.kind)));
}

/// Text of a scalar used as a name or pattern. A bare `~` reads as YAML null;
/// it is accepted here because `~` is the instance alias.
std::string name_text(const Node& n, std::string_view what) {
  if (n.is_scalar()) return n.text;
  if (n.is_null() && n.text == "~") return "~";
  schema_error(n, std::string(what) + " must be a text scalar, found " +
                      std::string(yaml::kind_label(n.kind)));
}

std::string expr_text(const Node& n, std::string_view what) {
  if (n.is_scalar()) return n.text;
  schema_error(n, std::string(what) + " must be a text scalar, found " +
                      std::string(yaml::kind_label(n.kind)));
}

/// Walks a mapping once, rejecting duplicate and unknown keys.
template <class Handler>
void for_each_field(const Node& map, std::initializer_list<std::string_view> allowed,
                    std::string_view what, Handler&& handler) {
  std::set<std::string> seen;
  for (const auto& [key, value] : map.entries) {
    std::string k = name_text(key, "key");
    bool known = false;
    for (auto a : allowed) known = known || a == k;
    if (!known) schema_error(key, "unknown key '" + k + "' in " + std::string(what));
    if (!seen.insert(k).second)
      schema_error(key, "duplicate key '" + k + "' in " + std::string(what));
    handler(k, key, value);
  }
}

const Node* field(const Node& map, std::string_view key) {
  for (const auto& [k, v] : map.entries)
    if ((k.is_scalar() || k.is_null()) && k.text == key) return &v;
  return nullptr;
}

bool is_plain_float(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp;
    if (exp == 0) return false;
  }
  return i == s.size();
}

Value value_of(const Node& n, std::string_view what) {
  if (!n.is_scalar())
    schema_error(n, std::string(what) + " must be a scalar, found " +
                        std::string(yaml::kind_label(n.kind)));
  return scalar_value(n.text, n.quoted);
}

ArgValue arg_value_of(const Node& n, std::string_view what) {
  if (n.is_sequence()) {
    ValueList list;
    for (const auto& item : n.items) list.push_back(value_of(item, what));
    return list;
  }
  return value_of(n, what);
}

std::vector<std::string> name_list(const Node& n, std::string_view what) {
  expect_sequence(n, what);
  std::vector<std::string> out;
  for (const auto& item : n.items) out.push_back(name_text(item, what));
  return out;
}

NodeDef parse_node(const std::string& name, const Node& key, const Node& value) {
  expect_map(value, "node '" + name + "'");
  NodeDef def;
  def.name = name;
  def.span = key.span;
  bool has_type = false;
  for_each_field(value, {"type", "children", "args", "if", "then", "else", "script", "result"},
                 "node '" + name + "'", [&](const std::string& k, const Node& knode, const Node& v) {
                   if (k == "type") {
                     def.type = name_text(v, "type");
                     has_type = true;
                   } else if (k == "children") {
                     def.children = name_list(v, "children");
                   } else if (k == "args") {
                     expect_map(v, "args");
                     std::set<std::string> seen;
                     for (const auto& [ak, av] : v.entries) {
                       std::string an = name_text(ak, "argument name");
                       if (!seen.insert(an).second)
                         schema_error(ak, "duplicate argument '" + an + "'", name);
                       def.args.emplace_back(an, arg_value_of(av, "argument '" + an + "'"));
                     }
                   } else if (k == "if") {
                     def.if_expr = expr_text(v, "if");
                   } else if (k == "then") {
                     def.then_expr = expr_text(v, "then");
                   } else if (k == "else") {
                     def.else_expr = expr_text(v, "else");
                   } else if (k == "result") {
                     def.result = expr_text(v, "result");
                   } else if (k == "script") {
                     expect_sequence(v, "script");
                     std::vector<std::string> lines;
                     for (const auto& item : v.items) lines.push_back(expr_text(item, "script entry"));
                     def.script = std::move(lines);
                   }
                   (void)knode;
                 });
  if (!has_type) schema_error(key, "node '" + name + "' has no type", name);

  const bool condition_keys = def.if_expr || def.then_expr || def.else_expr;
  const bool action_keys = def.script || def.result;
  auto kind = parse_kind(def.type);
  if (kind == NodeKind::Condition) {
    if (action_keys) schema_error(key, "condition nodes take no script/result", name);
    if (!def.if_expr) schema_error(key, "condition node has no 'if'", name);
    if (!def.then_expr) def.then_expr = "SUCCESS";
    if (!def.else_expr) def.else_expr = "FAILURE";
  } else if (kind == NodeKind::Action) {
    if (condition_keys) schema_error(key, "action nodes take no if/then/else", name);
    if (!def.result) def.result = "SUCCESS";
  } else if (def.type.find('$') == std::string::npos && (condition_keys || action_keys)) {
    schema_error(key, "if/then/else/script/result are only valid on condition and action nodes",
                 name);
  }
  return def;
}

struct Scope {
  std::set<std::string> names;  // params, loop variables, "name"
};

std::vector<BodyEntry> parse_body(const Node& map, const TemplateDef& tmpl, Scope scope);

std::shared_ptr<const ForeachBlock> parse_foreach(const std::string& key, const Node& knode,
                                                  const Node& value, const TemplateDef& tmpl,
                                                  Scope scope) {
  auto block = std::make_shared<ForeachBlock>();
  block->span = knode.span;
  const Node* spec = nullptr;
  const Node* nodes = nullptr;
  bool has_emit = false;
  for_each_field(value, {"foreach", "emit", "nodes"}, "foreach block '" + key + "'",
                 [&](const std::string& k, const Node&, const Node& v) {
                   if (k == "foreach") spec = &v;
                   if (k == "nodes") nodes = &v;
                   if (k == "emit") {
                     block->emit = name_text(v, "emit");
                     has_emit = true;
                   }
                 });
  if (!has_emit) schema_error(knode, "foreach block '" + key + "' has no 'emit'", tmpl.name);
  if (!nodes) schema_error(knode, "foreach block '" + key + "' has no 'nodes'", tmpl.name);
  expect_map(*spec, "foreach");
  bool has_list = false, has_var = false;
  for_each_field(*spec, {"list", "var", "index"}, "foreach", [&](const std::string& k, const Node&,
                                                                const Node& v) {
    if (k == "list") {
      block->list = name_text(v, "foreach list");
      has_list = true;
    } else if (k == "var") {
      block->var = name_text(v, "foreach var");
      has_var = true;
    } else {
      block->index = name_text(v, "foreach index");
    }
  });
  if (!has_list || !has_var) schema_error(*spec, "foreach needs 'list' and 'var'", tmpl.name);
  if (block->list.size() < 2 || block->list[0] != '$' ||
      !is_identifier(std::string_view(block->list).substr(1)))
    schema_error(*spec, "foreach list must be a $parameter reference", tmpl.name);
  for (const auto* v : {&block->var, &block->index}) {
    if (!is_identifier(*v))
      schema_error(*spec, "foreach variable '" + *v + "' is not an identifier", tmpl.name);
    if (scope.names.contains(*v))
      schema_error(*spec, "foreach variable '" + *v + "' shadows a name already in scope",
                   tmpl.name);
  }
  if (block->var == block->index)
    schema_error(*spec, "foreach var and index must differ", tmpl.name);
  scope.names.insert(block->var);
  scope.names.insert(block->index);
  expect_map(*nodes, "foreach nodes");
  block->nodes = parse_body(*nodes, tmpl, scope);
  return block;
}

std::vector<BodyEntry> parse_body(const Node& map, const TemplateDef& tmpl, Scope scope) {
  std::vector<BodyEntry> out;
  std::set<std::string> seen;
  for (const auto& [k, v] : map.entries) {
    std::string key = name_text(k, "template node name");
    if (!seen.insert(key).second)
      schema_error(k, "duplicate body entry '" + key + "'", tmpl.name);
    expect_map(v, "template node '" + key + "'");
    if (field(v, "foreach"))
      out.push_back({key, parse_foreach(key, k, v, tmpl, scope)});
    else
      out.push_back({key, parse_node(key, k, v)});
  }
  return out;
}

ParamDecl parse_param(const Node& n, const std::string& tmpl) {
  expect_map(n, "template argument");
  ParamDecl p;
  bool has_name = false, has_kind = false;
  const Node* def = nullptr;
  for_each_field(n, {"name", "kind", "default"}, "template argument",
                 [&](const std::string& k, const Node&, const Node& v) {
                   if (k == "name") {
                     p.name = name_text(v, "argument name");
                     has_name = true;
                   } else if (k == "kind") {
                     auto kind = parse_param_kind(name_text(v, "argument kind"));
                     if (!kind)
                       schema_error(v, "argument kind must be one of scalar, scalar-list, node, nodes",
                                    tmpl);
                     p.kind = *kind;
                     has_kind = true;
                   } else {
                     def = &v;
                   }
                 });
  if (!has_name || !has_kind) schema_error(n, "template argument needs 'name' and 'kind'", tmpl);
  if (!is_identifier(p.name))
    schema_error(n, "argument name '" + p.name + "' is not an identifier", tmpl);
  if (p.name == "name") schema_error(n, "'name' is reserved for the instance name", tmpl);
  if (def) {
    if (is_node_kind(p.kind)) schema_error(*def, "node arguments cannot have defaults", tmpl);
    ArgValue v = arg_value_of(*def, "default");
    if (std::holds_alternative<ValueList>(v) != (p.kind == ParamKind::ScalarList))
      schema_error(*def, "default for '" + p.name + "' does not match its kind", tmpl);
    p.default_value = std::move(v);
  }
  return p;
}

TemplateDef parse_template(const std::string& name, const Node& key, const Node& value,
                           bool builtin) {
  if (parse_kind(name)) schema_error(key, "template name clashes with a primary node type", name);
  if (!is_valid_name(name)) schema_error(key, "template name '" + name + "' is not valid", name);
  expect_map(value, "template '" + name + "'");
  TemplateDef t;
  t.name = name;
  t.builtin = builtin;
  t.span = key.span;
  const Node* args = nullptr;
  const Node* nodes = nullptr;
  bool has_root = false;
  for_each_field(value, {"args", "root", "nodes"}, "template '" + name + "'",
                 [&](const std::string& k, const Node&, const Node& v) {
                   if (k == "args") args = &v;
                   if (k == "nodes") nodes = &v;
                   if (k == "root") {
                     t.root = name_text(v, "template root");
                     has_root = true;
                   }
                 });
  if (!has_root) schema_error(key, "template has no 'root'", name);
  if (!nodes) schema_error(key, "template has no 'nodes'", name);

  Scope scope;
  scope.names.insert("name");
  if (args) {
    expect_sequence(*args, "template args");
    bool seen_nodes = false;
    for (const auto& item : args->items) {
      ParamDecl p = parse_param(item, name);
      if (!scope.names.insert(p.name).second)
        schema_error(item, "duplicate argument '" + p.name + "'", name);
      if (is_node_kind(p.kind)) {
        if (seen_nodes)
          schema_error(item, "a 'nodes' argument must be the last node argument", name);
        seen_nodes = p.kind == ParamKind::Nodes;
      }
      t.params.push_back(std::move(p));
    }
  }
  expect_map(*nodes, "template nodes");
  t.body = parse_body(*nodes, t, scope);
  return t;
}

TemplateRegistry parse_templates(const Node& n, bool builtin) {
  expect_map(n, "templates");
  TemplateRegistry reg;
  for (const auto& [k, v] : n.entries) {
    std::string name = name_text(k, "template name");
    if (!reg.add(parse_template(name, k, v, builtin)))
      schema_error(k, "template defined more than once", name);
  }
  return reg;
}

Node read_top_map(std::string_view text, std::string_view what) {
  Node top = yaml::read(text);
  if (top.is_null()) throw Error(Code::ParseError, {}, "empty document: missing root", top.span);
  expect_map(top, what);
  return top;
}

bool needs_quotes(std::string_view s) {
  if (!is_valid_name(s)) return true;
  if (s == "null" || s == "Null" || s == "NULL") return true;
  return s.front() == '-' || s.front() == '.';
}

void append_quoted(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  out += '"';
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          out += "\\x";
          out += kHex[c >> 4];
          out += kHex[c & 0xf];
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

void append_name(std::string& out, std::string_view s) {
  if (needs_quotes(s))
    append_quoted(out, s);
  else
    out += s;
}

}  // namespace

Value scalar_value(std::string_view text, bool quoted) {
  if (quoted) return Value(std::string(text));
  if (text == "true" || text == "True" || text == "TRUE") return Value(true);
  if (text == "false" || text == "False" || text == "FALSE") return Value(false);
  if (!text.empty()) {
    std::string_view digits = text;
    if (digits.front() == '+') digits.remove_prefix(1);
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc() && p == digits.data() + digits.size() && !digits.empty() &&
        digits.front() != '+')
      return Value(i);
    if (is_plain_float(text)) {
      double d = 0;
      std::string_view f = text.front() == '+' ? text.substr(1) : text;
      auto [q, ec2] = std::from_chars(f.data(), f.data() + f.size(), d);
      if (ec2 == std::errc() && q == f.data() + f.size()) return Value(d);
      if (ec2 == std::errc::result_out_of_range)
        return Value(f.front() == '-' ? -std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::infinity());
    }
    if (text == ".inf" || text == ".Inf" || text == ".INF" || text == "+.inf")
      return Value(std::numeric_limits<double>::infinity());
    if (text == "-.inf" || text == "-.Inf" || text == "-.INF")
      return Value(-std::numeric_limits<double>::infinity());
    if (text == ".nan" || text == ".NaN" || text == ".NAN")
      return Value(std::numeric_limits<double>::quiet_NaN());
  }
  return Value(std::string(text));
}

Document parse_document(std::string_view text) {
  Node top = read_top_map(text, "document");
  Document doc;
  bool has_root = false, has_nodes = false;
  for_each_field(top, {"templates", "root", "nodes"}, "document",
                 [&](const std::string& k, const Node& key, const Node& v) {
                   if (k == "templates") {
                     doc.templates = parse_templates(v, false);
                   } else if (k == "root") {
                     doc.root = name_text(v, "root");
                     doc.root_span = key.span;
                     has_root = true;
                   } else {
                     expect_map(v, "nodes");
                     for (const auto& [nk, nv] : v.entries)
                       doc.nodes.push_back(parse_node(name_text(nk, "node name"), nk, nv));
                     has_nodes = true;
                   }
                 });
  if (!has_root) schema_error(top, "document has no 'root'");
  if (!has_nodes) schema_error(top, "document has no 'nodes'");
  return doc;
}

TemplateRegistry parse_template_library(std::string_view text, bool builtin) {
  Node top = read_top_map(text, "template library");
  TemplateRegistry reg;
  for_each_field(top, {"templates"}, "template library",
                 [&](const std::string&, const Node&, const Node& v) {
                   reg = parse_templates(v, builtin);
                 });
  return reg;
}

Scenario parse_scenario(std::string_view text) {
  Node top = read_top_map(text, "scenario");
  Scenario sc;
  for_each_field(top, {"memory", "actions"}, "scenario", [&](const std::string& k, const Node&,
                                                           const Node& v) {
    if (k == "memory") {
      expect_map(v, "memory");
      std::set<std::string> seen;
      for (const auto& [mk, mv] : v.entries) {
        std::string key = name_text(mk, "memory key");
        if (!is_valid_name(key)) schema_error(mk, "memory key '" + key + "' is not a valid name");
        if (!seen.insert(key).second) schema_error(mk, "duplicate memory key '" + key + "'");
        if (key.starts_with("__STATE__/")) {
          if (!mv.is_scalar()) schema_error(mv, "state seed must be a scalar", key);
          auto st = parse_state(mv.text);
          if (!st)
            throw Error(Code::UnknownState, key, "'" + mv.text + "' is not a return state",
                        mv.span);
          sc.memory.emplace_back(key, Value(*st));
        } else {
          sc.memory.emplace_back(key, value_of(mv, "memory value"));
        }
      }
    } else {
      expect_map(v, "actions");
      std::set<std::string> seen;
      for (const auto& [ak, av] : v.entries) {
        std::string name = name_text(ak, "action name");
        if (!seen.insert(name).second) schema_error(ak, "duplicate action '" + name + "'");
        expect_sequence(av, "action results");
        if (av.items.empty()) schema_error(av, "action result list is empty", name);
        std::vector<ReturnState> states;
        for (const auto& item : av.items) {
          if (!item.is_scalar()) schema_error(item, "action result must be a scalar", name);
          auto st = parse_state(item.text);
          if (!st)
            throw Error(Code::UnknownState, name, "'" + item.text + "' is not a return state",
                        item.span);
          states.push_back(*st);
        }
        sc.actions.emplace_back(name, std::move(states));
      }
    }
  });
  return sc;
}

std::string serialize_expanded(const ExpandedTree& tree) {
  if (auto diags = validate_expanded(tree); !diags.empty()) {
    Diagnostic d = diags.front();
    d.message = "cannot canonicalize an invalid tree: " + diagnostic_render(d);
    d.code = Code::CanonicalizeError;
    throw Error(std::move(d));
  }
  std::string out = "root: ";
  append_name(out, tree.root);
  out += "\nnodes:\n";
  for (const TreeNode* n : preorder(tree)) {
    out += "  ";
    append_name(out, n->name);
    out += ":\n    type: ";
    out += kind_name(n->kind);
    out += '\n';
    if (auto* c = n->condition()) {
      out += "    if: ";
      append_quoted(out, c->if_expr);
      out += '\n';
      if (c->then_expr != "SUCCESS") {
        out += "    then: ";
        append_quoted(out, c->then_expr);
        out += '\n';
      }
      if (c->else_expr != "FAILURE") {
        out += "    else: ";
        append_quoted(out, c->else_expr);
        out += '\n';
      }
    } else if (auto* a = n->action()) {
      if (!a->script.empty()) {
        out += "    script:\n";
        for (const auto& line : a->script) {
          out += "      - ";
          append_quoted(out, line);
          out += '\n';
        }
      }
      if (a->result != "SUCCESS") {
        out += "    result: ";
        append_quoted(out, a->result);
        out += '\n';
      }
    }
    if (!n->children.empty()) {
      out += "    children: [";
      for (std::size_t i = 0; i < n->children.size(); ++i) {
        if (i) out += ", ";
        append_name(out, n->children[i]);
      }
      out += "]\n";
    }
  }
  return out;
}

std::string render_dot(const ExpandedTree& tree) {
  if (auto diags = validate_expanded(tree); !diags.empty()) throw Error(std::move(diags));
  auto order = preorder(tree);
  std::string out = "digraph tree {\n";
  for (const TreeNode* n : order) {
    std::string_view shape = is_control(n->kind)           ? "box"
                             : n->kind == NodeKind::Action ? "ellipse"
                                                           : "diamond";
    out += "  ";
    append_quoted(out, n->name);
    out += " [label=";
    append_quoted(out, n->name + "\n" + std::string(kind_name(n->kind)));
    out += ", shape=";
    out += shape;
    out += "];\n";
  }
  for (const TreeNode* n : order) {
    for (const auto& child : n->children) {
      out += "  ";
      append_quoted(out, n->name);
      out += " -> ";
      append_quoted(out, child);
      out += ";\n";
    }
  }
  out += "}\n";
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Code::IoError, path.string(), "cannot open file");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Code::IoError, path.string(), "read failed");
  return data;
}

}  // namespace btt
