#include "btt/yaml_tree.hpp"

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/exceptions.h>
#include <yaml-cpp/mark.h>
#include <yaml-cpp/parser.h>

#include <sstream>

namespace btt::yaml {

namespace {

SourceSpan to_span(const YAML::Mark& m) {
  if (m.is_null()) return {};
  return {m.line + 1, m.column + 1};
}

class TreeBuilder : public YAML::EventHandler {
 public:
  explicit TreeBuilder(std::string_view source) : source_(source) {}

  Node take() { return std::move(root_); }
  bool complete() const { return done_; }

  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override { done_ = true; }

  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override {
    check_anchor(mark, anchor);
    Node n;
    n.kind = Node::Kind::Null;
    n.span = to_span(mark);
    if (mark.pos >= 0 && static_cast<std::size_t>(mark.pos) < source_.size() &&
        source_[mark.pos] == '~')
      n.text = "~";
    add(std::move(n));
  }

  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override {
    throw Error(Code::SchemaError, {}, "aliases are not supported", to_span(mark));
  }

  void OnAnchor(const YAML::Mark& mark, const std::string&) override {
    throw Error(Code::SchemaError, {}, "anchors are not supported", to_span(mark));
  }

  void OnScalar(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                const std::string& value) override {
    check_anchor(mark, anchor);
    if (tag != "?" && tag != "!")
      throw Error(Code::SchemaError, {}, "explicit tags are not supported", to_span(mark));
    Node n;
    n.kind = Node::Kind::Scalar;
    n.text = value;
    n.quoted = tag == "!";
    n.span = to_span(mark);
    add(std::move(n));
  }

  void OnSequenceStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    check_anchor(mark, anchor);
    check_tag(mark, tag);
    Node n;
    n.kind = Node::Kind::Sequence;
    n.span = to_span(mark);
    open_.push_back(Frame{std::move(n), {}, false});
  }

  void OnSequenceEnd() override { close(); }

  void OnMapStart(const YAML::Mark& mark, const std::string& tag, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    check_anchor(mark, anchor);
    check_tag(mark, tag);
    Node n;
    n.kind = Node::Kind::Map;
    n.span = to_span(mark);
    open_.push_back(Frame{std::move(n), {}, false});
  }

  void OnMapEnd() override { close(); }

 private:
  struct Frame {
    Node node;
    Node pending_key;
    bool has_key;
  };

  static void check_anchor(const YAML::Mark& mark, YAML::anchor_t anchor) {
    if (anchor != YAML::NullAnchor)
      throw Error(Code::SchemaError, {}, "anchors are not supported", to_span(mark));
  }

  static void check_tag(const YAML::Mark& mark, const std::string& tag) {
    if (!tag.empty() && tag != "?" && tag != "!" && tag != "tag:yaml.org,2002:seq" &&
        tag != "tag:yaml.org,2002:map")
      throw Error(Code::SchemaError, {}, "explicit tags are not supported", to_span(mark));
  }

  void close() {
    Frame f = std::move(open_.back());
    open_.pop_back();
    if (f.has_key)
      throw Error(Code::ParseError, {}, "mapping key without value", f.pending_key.span);
    add(std::move(f.node));
  }

  void add(Node n) {
    if (open_.empty()) {
      root_ = std::move(n);
      return;
    }
    Frame& top = open_.back();
    if (top.node.is_sequence()) {
      top.node.items.push_back(std::move(n));
      return;
    }
    if (!top.has_key) {
      if (n.is_sequence() || n.is_map())
        throw Error(Code::SchemaError, {}, "mapping keys must be scalars", n.span);
      if (n.is_scalar() && !n.quoted && n.text == "<<")
        throw Error(Code::SchemaError, {}, "merge keys are not supported", n.span);
      // Duplicate keys are kept; callers decide whether they are an error.
      top.pending_key = std::move(n);
      top.has_key = true;
      return;
    }
    top.node.entries.emplace_back(std::move(top.pending_key), std::move(n));
    top.has_key = false;
  }

  std::string_view source_;
  std::vector<Frame> open_;
  Node root_;
  bool done_ = false;
};

class NullHandler : public YAML::EventHandler {
 public:
  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override {}
  void OnNull(const YAML::Mark&, YAML::anchor_t) override {}
  void OnAlias(const YAML::Mark&, YAML::anchor_t) override {}
  void OnScalar(const YAML::Mark&, const std::string&, YAML::anchor_t,
                const std::string&) override {}
  void OnSequenceStart(const YAML::Mark&, const std::string&, YAML::anchor_t,
                       YAML::EmitterStyle::value) override {}
  void OnSequenceEnd() override {}
  void OnMapStart(const YAML::Mark&, const std::string&, YAML::anchor_t,
                  YAML::EmitterStyle::value) override {}
  void OnMapEnd() override {}
};

}  // namespace

std::string_view kind_label(Node::Kind k) {
  switch (k) {
    case Node::Kind::Null: return "null";
    case Node::Kind::Scalar: return "scalar";
    case Node::Kind::Sequence: return "sequence";
    case Node::Kind::Map: return "mapping";
  }
  return "?";
}

Node read(std::string_view text) {
  std::istringstream in{std::string(text)};
  try {
    YAML::Parser parser(in);
    TreeBuilder builder(text);
    if (!parser.HandleNextDocument(builder) || !builder.complete())
      throw Error(Code::ParseError, {}, "empty document: missing root", SourceSpan{1, 1});
    NullHandler rest;
    if (parser.HandleNextDocument(rest))
      throw Error(Code::SchemaError, {}, "multiple YAML documents in one stream");
    return builder.take();
  } catch (const YAML::Exception& e) {
    throw Error(Code::ParseError, {}, e.msg, to_span(e.mark));
  }
}

}  // namespace btt::yaml
