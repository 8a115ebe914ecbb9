#include "btt/engine.hpp"

#include <map>

namespace btt {

std::string render_trace(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += std::to_string(e.tick);
    out += '\t';
    out += e.node;
    out += '\t';
    out += state_name(e.result);
    out += '\n';
  }
  return out;
}

ReturnState continue_state(NodeKind kind) {
  switch (kind) {
    case NodeKind::Sequence: return ReturnState::Success;
    case NodeKind::Selector: return ReturnState::Failure;
    default: return ReturnState::Empty;
  }
}

ReturnState control_step(NodeKind kind, const std::vector<ReturnState>& results,
                         std::size_t* consumed) {
  std::size_t i = 0;
  ReturnState r = control_step(kind, [&]() -> std::optional<ReturnState> {
    if (i == results.size()) return std::nullopt;
    return results[i++];
  });
  if (consumed) *consumed = i;
  return r;
}

ReturnState parallel_step(const std::vector<ReturnState>& results) {
  for (ReturnState s : {ReturnState::Failure, ReturnState::Running, ReturnState::Success})
    for (ReturnState r : results)
      if (r == s) return s;
  return ReturnState::Empty;
}

namespace {

void try_parse(const TreeNode& n, std::string_view field, const std::string& text, bool assignment,
               std::vector<Diagnostic>& out) {
  try {
    if (assignment)
      parse_assignment(text);
    else
      parse_expr(text);
  } catch (const SyntaxError& e) {
    out.push_back({Code::ExprSyntax, n.name,
                   std::string(field) + " '" + text + "': " + e.diagnostics().front().message,
                   n.span, {}});
  }
}

}  // namespace

std::vector<Diagnostic> check_expressions(const ExpandedTree& tree) {
  std::vector<Diagnostic> out;
  for (const auto& n : tree.nodes) {
    if (const auto* c = n.condition()) {
      try_parse(n, "if", c->if_expr, false, out);
      try_parse(n, "then", c->then_expr, false, out);
      try_parse(n, "else", c->else_expr, false, out);
    } else if (const auto* a = n.action()) {
      for (const auto& line : a->script) try_parse(n, "script", line, true, out);
      try_parse(n, "result", a->result, false, out);
    }
  }
  return out;
}

Engine::Engine(ExpandedTree tree, std::optional<Scenario> scenario)
    : tree_(std::move(tree)), scenario_(std::move(scenario)) {
  if (auto diags = validate_expanded(tree_); !diags.empty()) throw Error(std::move(diags));
  if (auto diags = check_expressions(tree_); !diags.empty()) throw Error(std::move(diags));

  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < tree_.nodes.size(); ++i) index[tree_.nodes[i].name] = i;
  root_ = index.at(tree_.root);

  nodes_.resize(tree_.nodes.size());
  for (std::size_t i = 0; i < tree_.nodes.size(); ++i) {
    const TreeNode& n = tree_.nodes[i];
    Compiled& c = nodes_[i];
    c.node = &n;
    for (const auto& child : n.children) c.children.push_back(index.at(child));
    if (const auto* cond = n.condition()) {
      c.if_expr = parse_expr(cond->if_expr);
      c.then_expr = parse_expr(cond->then_expr);
      c.else_expr = parse_expr(cond->else_expr);
    } else if (const auto* act = n.action()) {
      for (const auto& line : act->script) c.script.push_back(parse_assignment(line));
      c.result = parse_expr(act->result);
    }
  }

  if (scenario_) {
    std::vector<Diagnostic> unknown;
    for (const auto& [name, states] : scenario_->actions) {
      auto it = index.find(name);
      if (it == index.end() || tree_.nodes[it->second].kind != NodeKind::Action) {
        unknown.push_back({Code::UnknownScenarioAction, name,
                           "scenario scripts an action that is not in the tree", std::nullopt, {}});
        continue;
      }
      nodes_[it->second].scripted = &states;
    }
    if (!unknown.empty()) throw Error(std::move(unknown));
    for (const auto& [key, value] : scenario_->memory) memory_.set(key, value);
  }
  for (const auto& n : tree_.nodes) {
    std::string key = state_key(n.name);
    if (!memory_.contains(key)) memory_.set(key, Value(ReturnState::Empty));
  }
}

Engine::TickResult Engine::tick() {
  ++tick_;
  events_.clear();
  ReturnState s = run(root_);
  return {s, events_};
}

ReturnState Engine::tick_node(std::string_view name) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].node->name == name) return run(i);
  throw Error(Code::RuntimeError, std::string(name), "no such node");
}

ReturnState Engine::run(std::size_t index) {
  Compiled& c = nodes_[index];
  ReturnState s = evaluate(c);
  memory_.set(state_key(c.node->name), Value(s));
  events_.push_back({tick_, c.node->name, s});
  return s;
}

ReturnState Engine::evaluate(Compiled& c) {
  const NodeKind kind = c.node->kind;
  if (kind == NodeKind::Parallel) {
    std::vector<ReturnState> results;
    for (std::size_t child : c.children) results.push_back(run(child));
    return parallel_step(results);
  }
  if (is_control(kind)) {
    std::size_t next = 0;
    return control_step(kind, [&]() -> std::optional<ReturnState> {
      if (next == c.children.size()) return std::nullopt;
      return run(c.children[next++]);
    });
  }

  // Leaves: expression errors become RUNTIME_ERROR naming the node and tick.
  std::vector<std::pair<std::string, std::optional<Value>>> undo;
  try {
    if (kind == NodeKind::Condition)
      return eval_state_expr(eval_condition(*c.if_expr, memory_) ? *c.then_expr : *c.else_expr,
                             memory_);
    if (c.scripted) {
      const auto& states = *c.scripted;
      ReturnState s = states[std::min(c.cursor, states.size() - 1)];
      if (c.cursor < states.size()) ++c.cursor;
      return s;
    }
    for (const auto& a : c.script) {
      Value v = eval_expr(*a.value, memory_);
      const Value* old = memory_.get(a.key);
      undo.emplace_back(a.key, old ? std::optional<Value>(*old) : std::nullopt);
      memory_.set(a.key, std::move(v));
    }
    return eval_state_expr(*c.result, memory_);
  } catch (const Error& e) {
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
      if (it->second)
        memory_.set(it->first, *it->second);
      else
        memory_.erase(it->first);
    }
    const Diagnostic& cause = e.diagnostics().front();
    std::string message = "tick " + std::to_string(tick_) + ": " + std::string(code_name(cause.code)) + ": ";
    if (!cause.subject.empty()) message += cause.subject + ": ";
    message += cause.message;
    throw Error(Code::RuntimeError, c.node->name, std::move(message), c.node->span);
  }
}

}  // namespace btt
