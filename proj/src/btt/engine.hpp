#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btt/exprs.hpp"
#include "btt/memory.hpp"
#include "btt/model.hpp"

namespace btt {

struct TraceEvent {
  std::int64_t tick = 0;
  std::string node;
  ReturnState result = ReturnState::Empty;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// `<tick>\t<node>\t<STATE>` per event.
std::string render_trace(const std::vector<TraceEvent>& events);

/// The state a serial control kind keeps going on.
ReturnState continue_state(NodeKind kind);

/// Serial control kinds (sequence, selector, skipper). `next` yields the next
/// child's result or nullopt when the children are exhausted; it is called
/// only as long as results stay in the continue set.
template <class Next>
ReturnState control_step(NodeKind kind, Next&& next) {
  const ReturnState keep = continue_state(kind);
  while (std::optional<ReturnState> r = next())
    if (*r != keep) return *r;
  return keep;
}

/// Eager form over a list; `consumed` receives the number of results read.
ReturnState control_step(NodeKind kind, const std::vector<ReturnState>& results,
                         std::size_t* consumed = nullptr);

ReturnState parallel_step(const std::vector<ReturnState>& results);

/// EXPR_SYNTAX diagnostics for every unparsable expression, script line or
/// result in the tree.
std::vector<Diagnostic> check_expressions(const ExpandedTree& tree);

class Engine {
 public:
  struct TickResult {
    ReturnState state;
    std::vector<TraceEvent> events;
  };

  /// Throws on an invalid tree, EXPR_SYNTAX, or UNKNOWN_SCENARIO_ACTION.
  explicit Engine(ExpandedTree tree, std::optional<Scenario> scenario = std::nullopt);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  Engine(Engine&&) = default;

  /// One traversal from the root. Throws RUNTIME_ERROR.
  TickResult tick();

  /// Ticks one node (and whatever it ticks) inside the current tick number.
  /// Events are appended to last_events().
  ReturnState tick_node(std::string_view name);

  const ExpandedTree& tree() const { return tree_; }
  const Memory& memory() const { return memory_; }
  Memory& memory() { return memory_; }
  std::int64_t tick_count() const { return tick_; }
  const std::vector<TraceEvent>& last_events() const { return events_; }

 private:
  struct Compiled {
    const TreeNode* node = nullptr;
    std::vector<std::size_t> children;
    ExprPtr if_expr, then_expr, else_expr, result;
    std::vector<Assignment> script;
    const std::vector<ReturnState>* scripted = nullptr;
    std::size_t cursor = 0;
  };

  ReturnState run(std::size_t index);
  ReturnState evaluate(Compiled& c);

  ExpandedTree tree_;
  std::optional<Scenario> scenario_;
  std::vector<Compiled> nodes_;
  std::size_t root_ = 0;
  Memory memory_;
  std::int64_t tick_ = 0;
  std::vector<TraceEvent> events_;
};

}  // namespace btt
