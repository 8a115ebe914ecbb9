#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace btt {

// ---------------------------------------------------------------------------
// Return states and node kinds
// ---------------------------------------------------------------------------

enum class ReturnState { Success, Failure, Running, Empty };

std::string_view state_name(ReturnState s);
std::optional<ReturnState> parse_state(std::string_view text);

enum class NodeKind { Sequence, Selector, Skipper, Parallel, Action, Condition };

std::string_view kind_name(NodeKind k);
std::optional<NodeKind> parse_kind(std::string_view text);

inline bool is_control(NodeKind k) { return k != NodeKind::Action && k != NodeKind::Condition; }
inline bool is_leaf(NodeKind k) { return !is_control(k); }

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

/// Tagged scalar stored in memory and passed as a template argument.
class Value {
 public:
  enum class Tag { Boolean, Integer, Float, Text, State };
  using Storage = std::variant<bool, std::int64_t, double, std::string, ReturnState>;

  Value() : data_(false) {}
  Value(bool b) : data_(b) {}
  Value(std::int64_t i) : data_(i) {}
  Value(int i) : data_(static_cast<std::int64_t>(i)) {}
  Value(double d) : data_(d) {}
  Value(std::string s) : data_(std::move(s)) {}
  Value(const char* s) : data_(std::string(s)) {}
  Value(ReturnState s) : data_(s) {}

  Tag tag() const { return static_cast<Tag>(data_.index()); }
  bool is_numeric() const { return tag() == Tag::Integer || tag() == Tag::Float; }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  ReturnState as_state() const { return std::get<ReturnState>(data_); }
  double to_double() const;

  const Storage& storage() const { return data_; }

  /// Same-tag equality; values of different tags are never equal. NaN equals NaN.
  friend bool operator==(const Value& a, const Value& b);

 private:
  Storage data_;
};

std::string_view tag_name(Value::Tag t);

/// Shortest text that reads back to the same double, always with a '.' or exponent.
std::string format_float(double d);

/// Plain textual form used for placeholder substitution: text verbatim, states by name.
std::string render_plain(const Value& v);

/// Expression-literal form used in memory dumps: text is single-quoted.
std::string render_literal(const Value& v);

using ValueList = std::vector<Value>;
using ArgValue = std::variant<Value, ValueList>;

// ---------------------------------------------------------------------------
// Codes and diagnostics
// ---------------------------------------------------------------------------

enum class Code {
  // structural diagnostics on expanded trees
  DuplicateName,
  UnresolvedChild,
  MultipleParents,
  Cycle,
  LeafWithChildren,
  ControlWithoutChildren,
  UnsubstitutedPlaceholder,
  BadRoot,
  InvalidName,
  Unreachable,
  // reading
  IoError,
  ParseError,
  SchemaError,
  UnknownState,
  // expansion
  ArityMismatch,
  MissingArg,
  UnknownArg,
  KindMismatch,
  UnboundPlaceholder,
  ListInScalarPosition,
  NotAList,
  NameClash,
  UnknownBlock,
  RecursiveTemplate,
  DepthExceeded,
  UnknownType,
  CanonicalizeError,
  // expressions and execution
  ExprSyntax,
  UndefinedVariable,
  TypeError,
  DivisionByZero,
  NotAState,
  UnknownScenarioAction,
  RuntimeError,
};

std::string_view code_name(Code c);

/// Process exit class for a code: 2 reading, 3 expansion/validation, 4 runtime.
int exit_class(Code c);

struct SourceSpan {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct Diagnostic {
  Code code;
  std::string subject;  // node name, key, or empty
  std::string message;
  std::optional<SourceSpan> span;
  std::vector<std::string> chain;  // outermost instantiation first
};

/// `<CODE>: <subject>: <message>`; the subject segment is dropped when empty.
std::string diagnostic_render(const Diagnostic& d);

/// Carries one or more diagnostics out of a failing operation.
class Error : public std::runtime_error {
 public:
  explicit Error(Diagnostic d);
  explicit Error(std::vector<Diagnostic> ds);
  Error(Code code, std::string subject, std::string message,
        std::optional<SourceSpan> span = std::nullopt);

  Code code() const { return diagnostics_.front().code; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  std::vector<Diagnostic>& diagnostics() { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

/// One node entry as authored. In template bodies every string may carry
/// `$param`, `$name` and `~` placeholders.
struct NodeDef {
  std::string name;
  std::string type;
  std::vector<std::string> children;
  std::vector<std::pair<std::string, ArgValue>> args;
  std::optional<std::string> if_expr;
  std::optional<std::string> then_expr;
  std::optional<std::string> else_expr;
  std::optional<std::vector<std::string>> script;
  std::optional<std::string> result;
  std::optional<SourceSpan> span;
};

enum class ParamKind { Scalar, ScalarList, Node, Nodes };

std::string_view param_kind_name(ParamKind k);
std::optional<ParamKind> parse_param_kind(std::string_view text);
inline bool is_list_kind(ParamKind k) { return k == ParamKind::ScalarList || k == ParamKind::Nodes; }
inline bool is_node_kind(ParamKind k) { return k == ParamKind::Node || k == ParamKind::Nodes; }

struct ParamDecl {
  std::string name;
  ParamKind kind = ParamKind::Scalar;
  std::optional<ArgValue> default_value;
};

struct ForeachBlock;

/// A template body entry: a node pattern or a foreach block, keyed by local name.
struct BodyEntry {
  std::string key;
  std::variant<NodeDef, std::shared_ptr<const ForeachBlock>> item;
};

struct ForeachBlock {
  std::string list;   // "$param"
  std::string var;
  std::string index = "i";
  std::string emit;
  std::vector<BodyEntry> nodes;
  std::optional<SourceSpan> span;
};

struct TemplateDef {
  std::string name;
  std::vector<ParamDecl> params;
  std::vector<BodyEntry> body;
  std::string root;
  bool builtin = false;
  std::optional<SourceSpan> span;

  const ParamDecl* find_param(std::string_view n) const;
};

/// Templates by name, in definition order.
class TemplateRegistry {
 public:
  const TemplateDef* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  /// False if the name is already taken.
  bool add(TemplateDef def);

  const std::vector<TemplateDef>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<TemplateDef> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct Document {
  TemplateRegistry templates;
  std::vector<NodeDef> nodes;  // authored order, duplicates kept for diagnostics
  std::string root;
  std::optional<SourceSpan> root_span;
};

// ---------------------------------------------------------------------------
// Expanded tree
// ---------------------------------------------------------------------------

struct ConditionSpec {
  std::string if_expr;
  std::string then_expr = "SUCCESS";
  std::string else_expr = "FAILURE";
  friend bool operator==(const ConditionSpec&, const ConditionSpec&) = default;
};

struct ActionSpec {
  std::vector<std::string> script;
  std::string result = "SUCCESS";
  friend bool operator==(const ActionSpec&, const ActionSpec&) = default;
};

struct TreeNode {
  std::string name;
  NodeKind kind = NodeKind::Action;
  std::vector<std::string> children;
  std::variant<std::monostate, ConditionSpec, ActionSpec> payload;
  std::optional<SourceSpan> span;  // not part of equality

  const ConditionSpec* condition() const { return std::get_if<ConditionSpec>(&payload); }
  const ActionSpec* action() const { return std::get_if<ActionSpec>(&payload); }

  friend bool operator==(const TreeNode& a, const TreeNode& b) {
    return a.name == b.name && a.kind == b.kind && a.children == b.children &&
           a.payload == b.payload;
  }
};

/// Flat tree of primary nodes. Stored as a list so invalid (hand-built or
/// partially expanded) trees can still be diagnosed.
struct ExpandedTree {
  std::vector<TreeNode> nodes;
  std::string root;

  /// First node with this name, or null.
  const TreeNode* find(std::string_view name) const;

  /// Equal roots and equal node sets, independent of storage order.
  friend bool operator==(const ExpandedTree& a, const ExpandedTree& b);
};

// ---------------------------------------------------------------------------
// Scenarios (deterministic test doubles for actions)
// ---------------------------------------------------------------------------

struct Scenario {
  std::vector<std::pair<std::string, Value>> memory;
  std::vector<std::pair<std::string, std::vector<ReturnState>>> actions;
};

/// Node names: non-empty, drawn from [A-Za-z0-9_/.-].
bool is_valid_name(std::string_view name);

/// Template parameter and loop variable names: [A-Za-z_][A-Za-z0-9_]*.
bool is_identifier(std::string_view name);

/// Structural checks. Empty result iff every tree invariant holds.
std::vector<Diagnostic> validate_expanded(const ExpandedTree& tree);

/// Depth-first pre-order from the root following children in listed order.
/// Requires a valid tree.
std::vector<const TreeNode*> preorder(const ExpandedTree& tree);

}  // namespace btt
