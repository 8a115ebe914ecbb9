#include "btt/model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace btt {

namespace {

constexpr std::array<std::string_view, 4> kStateNames = {"SUCCESS", "FAILURE", "RUNNING", "EMPTY"};
constexpr std::array<std::string_view, 6> kKindNames = {"sequence", "selector", "skipper",
                                                        "parallel", "action",   "condition"};
constexpr std::array<std::string_view, 4> kParamKindNames = {"scalar", "scalar-list", "node",
                                                             "nodes"};

bool is_name_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '/' || c == '.' || c == '-';
}

bool has_placeholder(std::string_view s) {
  return s.find('$') != std::string_view::npos || s.find('~') != std::string_view::npos;
}

}  // namespace

std::string_view state_name(ReturnState s) { return kStateNames[static_cast<std::size_t>(s)]; }

std::optional<ReturnState> parse_state(std::string_view text) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i)
    if (kStateNames[i] == text) return static_cast<ReturnState>(i);
  return std::nullopt;
}

std::string_view kind_name(NodeKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<NodeKind> parse_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == text) return static_cast<NodeKind>(i);
  return std::nullopt;
}

std::string_view param_kind_name(ParamKind k) {
  return kParamKindNames[static_cast<std::size_t>(k)];
}

std::optional<ParamKind> parse_param_kind(std::string_view text) {
  for (std::size_t i = 0; i < kParamKindNames.size(); ++i)
    if (kParamKindNames[i] == text) return static_cast<ParamKind>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------

double Value::to_double() const {
  return tag() == Tag::Integer ? static_cast<double>(as_int()) : as_float();
}

bool operator==(const Value& a, const Value& b) {
  if (a.tag() != b.tag()) return false;
  if (a.tag() == Value::Tag::Float) {
    double x = a.as_float(), y = b.as_float();
    return x == y || (std::isnan(x) && std::isnan(y));
  }
  return a.data_ == b.data_;
}

std::string_view tag_name(Value::Tag t) {
  switch (t) {
    case Value::Tag::Boolean: return "boolean";
    case Value::Tag::Integer: return "integer";
    case Value::Tag::Float: return "float";
    case Value::Tag::Text: return "text";
    case Value::Tag::State: return "state";
  }
  return "?";
}

std::string format_float(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  std::string out(buf.data(), end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string render_plain(const Value& v) {
  switch (v.tag()) {
    case Value::Tag::Boolean: return v.as_bool() ? "true" : "false";
    case Value::Tag::Integer: return std::to_string(v.as_int());
    case Value::Tag::Float: return format_float(v.as_float());
    case Value::Tag::Text: return v.as_text();
    case Value::Tag::State: return std::string(state_name(v.as_state()));
  }
  return {};
}

std::string render_literal(const Value& v) {
  if (v.tag() != Value::Tag::Text) return render_plain(v);
  std::string out = "'";
  for (char c : v.as_text()) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

// ---------------------------------------------------------------------------

std::string_view code_name(Code c) {
  switch (c) {
    case Code::DuplicateName: return "DUPLICATE_NAME";
    case Code::UnresolvedChild: return "UNRESOLVED_CHILD";
    case Code::MultipleParents: return "MULTIPLE_PARENTS";
    case Code::Cycle: return "CYCLE";
    case Code::LeafWithChildren: return "LEAF_WITH_CHILDREN";
    case Code::ControlWithoutChildren: return "CONTROL_WITHOUT_CHILDREN";
    case Code::UnsubstitutedPlaceholder: return "UNSUBSTITUTED_PLACEHOLDER";
    case Code::BadRoot: return "BAD_ROOT";
    case Code::InvalidName: return "INVALID_NAME";
    case Code::Unreachable: return "UNREACHABLE";
    case Code::IoError: return "IO_ERROR";
    case Code::ParseError: return "PARSE_ERROR";
    case Code::SchemaError: return "SCHEMA_ERROR";
    case Code::UnknownState: return "UNKNOWN_STATE";
    case Code::ArityMismatch: return "ARITY_MISMATCH";
    case Code::MissingArg: return "MISSING_ARG";
    case Code::UnknownArg: return "UNKNOWN_ARG";
    case Code::KindMismatch: return "KIND_MISMATCH";
    case Code::UnboundPlaceholder: return "UNBOUND_PLACEHOLDER";
    case Code::ListInScalarPosition: return "LIST_IN_SCALAR_POSITION";
    case Code::NotAList: return "NOT_A_LIST";
    case Code::NameClash: return "NAME_CLASH";
    case Code::UnknownBlock: return "UNKNOWN_BLOCK";
    case Code::RecursiveTemplate: return "RECURSIVE_TEMPLATE";
    case Code::DepthExceeded: return "DEPTH_EXCEEDED";
    case Code::UnknownType: return "UNKNOWN_TYPE";
    case Code::CanonicalizeError: return "CANONICALIZE_ERROR";
    case Code::ExprSyntax: return "EXPR_SYNTAX";
    case Code::UndefinedVariable: return "UNDEFINED_VARIABLE";
    case Code::TypeError: return "TYPE_ERROR";
    case Code::DivisionByZero: return "DIVISION_BY_ZERO";
    case Code::NotAState: return "NOT_A_STATE";
    case Code::UnknownScenarioAction: return "UNKNOWN_SCENARIO_ACTION";
    case Code::RuntimeError: return "RUNTIME_ERROR";
  }
  return "UNKNOWN";
}

int exit_class(Code c) {
  switch (c) {
    case Code::IoError:
    case Code::ParseError:
    case Code::SchemaError:
    case Code::UnknownState:
      return 2;
    case Code::UndefinedVariable:
    case Code::TypeError:
    case Code::DivisionByZero:
    case Code::NotAState:
    case Code::RuntimeError:
      return 4;
    default:
      return 3;
  }
}

std::string diagnostic_render(const Diagnostic& d) {
  std::string out(code_name(d.code));
  out += ": ";
  if (!d.subject.empty()) {
    out += d.subject;
    out += ": ";
  }
  out += d.message;
  if (!d.chain.empty()) {
    out += " [instantiated via ";
    for (std::size_t i = 0; i < d.chain.size(); ++i) {
      if (i) out += " > ";
      out += d.chain[i];
    }
    out += ']';
  }
  return out;
}

namespace {
std::string summary(const std::vector<Diagnostic>& ds) {
  return ds.empty() ? std::string("error") : diagnostic_render(ds.front());
}
}  // namespace

Error::Error(Diagnostic d) : Error(std::vector<Diagnostic>{std::move(d)}) {}

Error::Error(std::vector<Diagnostic> ds)
    : std::runtime_error(summary(ds)), diagnostics_(std::move(ds)) {
  if (diagnostics_.empty()) diagnostics_.push_back({Code::RuntimeError, {}, "error", {}, {}});
}

Error::Error(Code code, std::string subject, std::string message, std::optional<SourceSpan> span)
    : Error(Diagnostic{code, std::move(subject), std::move(message), span, {}}) {}

// ---------------------------------------------------------------------------

const ParamDecl* TemplateDef::find_param(std::string_view n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

const TemplateDef* TemplateRegistry::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool TemplateRegistry::add(TemplateDef def) {
  if (index_.contains(def.name)) return false;
  index_.emplace(def.name, entries_.size());
  entries_.push_back(std::move(def));
  return true;
}

const TreeNode* ExpandedTree::find(std::string_view name) const {
  for (const auto& n : nodes)
    if (n.name == name) return &n;
  return nullptr;
}

bool operator==(const ExpandedTree& a, const ExpandedTree& b) {
  if (a.root != b.root || a.nodes.size() != b.nodes.size()) return false;
  auto sorted = [](const ExpandedTree& t) {
    std::vector<const TreeNode*> v;
    for (const auto& n : t.nodes) v.push_back(&n);
    std::stable_sort(v.begin(), v.end(),
                     [](const TreeNode* x, const TreeNode* y) { return x->name < y->name; });
    return v;
  };
  auto x = sorted(a), y = sorted(b);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(*x[i] == *y[i])) return false;
  return true;
}

bool is_valid_name(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), is_name_char);
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(),
                     [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate_expanded(const ExpandedTree& tree) {
  std::vector<Diagnostic> out;
  auto report = [&](Code code, const TreeNode& n, std::string message) {
    out.push_back({code, n.name, std::move(message), n.span, {}});
  };

  // First definition of every name wins; later ones are duplicates.
  std::map<std::string_view, std::size_t> first;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (!first.emplace(n.name, i).second)
      report(Code::DuplicateName, n, "node name defined more than once");
  }

  for (const auto& n : tree.nodes) {
    if (has_placeholder(n.name))
      report(Code::UnsubstitutedPlaceholder, n, "unsubstituted placeholder in name");
    else if (!is_valid_name(n.name))
      report(Code::InvalidName, n, "node name must be non-empty and use only [A-Za-z0-9_/.-]");

    if (auto* c = n.condition()) {
      for (auto [field, text] : {std::pair{"if", &c->if_expr}, std::pair{"then", &c->then_expr},
                                 std::pair{"else", &c->else_expr}})
        if (has_placeholder(*text))
          report(Code::UnsubstitutedPlaceholder, n,
                 std::string("unsubstituted placeholder in ") + field);
    } else if (auto* a = n.action()) {
      if (std::any_of(a->script.begin(), a->script.end(),
                      [](const std::string& s) { return has_placeholder(s); }))
        report(Code::UnsubstitutedPlaceholder, n, "unsubstituted placeholder in script");
      if (has_placeholder(a->result))
        report(Code::UnsubstitutedPlaceholder, n, "unsubstituted placeholder in result");
    }

    if (is_leaf(n.kind) && !n.children.empty())
      report(Code::LeafWithChildren, n, "leaf node has children");
    if (is_control(n.kind) && n.children.empty())
      report(Code::ControlWithoutChildren, n, "control node has no children");

    for (const auto& child : n.children) {
      if (has_placeholder(child))
        report(Code::UnsubstitutedPlaceholder, n,
               "unsubstituted placeholder in child '" + child + "'");
      else if (!first.contains(child))
        report(Code::UnresolvedChild, n, "child '" + child + "' does not name a defined node");
    }
  }

  std::map<std::string_view, int> parents;
  for (const auto& n : tree.nodes)
    for (const auto& child : n.children) ++parents[child];
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (first.at(n.name) != i) continue;
    auto it = parents.find(n.name);
    if (it != parents.end() && it->second > 1)
      report(Code::MultipleParents, n, "node is listed as a child more than once");
  }

  const bool root_ok = first.contains(tree.root);
  if (!root_ok)
    out.push_back({Code::BadRoot, tree.root, "root does not name a defined node", {}, {}});

  // Cycle search over first definitions, root first so reports are stable.
  enum class Color { White, Grey, Black };
  std::vector<Color> color(tree.nodes.size(), Color::White);
  std::set<std::size_t> in_cycle;
  auto dfs = [&](std::size_t start) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    color[start] = Color::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& kids = tree.nodes[node].children;
      if (next == kids.size()) {
        color[node] = Color::Black;
        stack.pop_back();
        continue;
      }
      auto it = first.find(kids[next++]);
      if (it == first.end()) continue;
      std::size_t child = it->second;
      if (color[child] == Color::Grey) {
        if (in_cycle.insert(child).second)
          report(Code::Cycle, tree.nodes[child], "node is part of a cycle");
      } else if (color[child] == Color::White) {
        color[child] = Color::Grey;
        stack.emplace_back(child, 0);
      }
    }
  };
  std::vector<std::size_t> order;
  if (root_ok) order.push_back(first.at(tree.root));
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    if (first.at(tree.nodes[i].name) == i) order.push_back(i);
  std::vector<bool> reached(tree.nodes.size(), false);
  if (root_ok) {
    std::vector<std::size_t> work{first.at(tree.root)};
    while (!work.empty()) {
      std::size_t i = work.back();
      work.pop_back();
      if (reached[i]) continue;
      reached[i] = true;
      for (const auto& child : tree.nodes[i].children)
        if (auto it = first.find(child); it != first.end()) work.push_back(it->second);
    }
  }
  for (std::size_t i : order)
    if (color[i] == Color::White) dfs(i);

  if (root_ok) {
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (first.at(tree.nodes[i].name) != i || reached[i] || in_cycle.contains(i)) continue;
      report(Code::Unreachable, tree.nodes[i], "node is not reachable from root");
    }
  }
  return out;
}

std::vector<const TreeNode*> preorder(const ExpandedTree& tree) {
  std::map<std::string_view, const TreeNode*> by_name;
  for (const auto& n : tree.nodes) by_name.emplace(n.name, &n);
  std::vector<const TreeNode*> out;
  auto root = by_name.find(tree.root);
  if (root == by_name.end()) return out;
  std::set<const TreeNode*> seen;
  std::vector<const TreeNode*> stack{root->second};
  while (!stack.empty()) {
    const TreeNode* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it)
      if (auto c = by_name.find(*it); c != by_name.end()) stack.push_back(c->second);
  }
  return out;
}

}  // namespace btt
