#pragma once

// Reference implementations used only by tests. They restate the semantics
// directly and share no code with the engine.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "btt/model.hpp"

namespace oracle {

using btt::NodeKind;
using btt::ReturnState;

using States = std::vector<ReturnState>;

inline States continue_set(NodeKind kind) {
  switch (kind) {
    case NodeKind::Sequence: return {ReturnState::Success};
    case NodeKind::Selector: return {ReturnState::Failure};
    case NodeKind::Skipper: return {ReturnState::Empty};
    default: return {};
  }
}

struct ControlOutcome {
  ReturnState result;
  std::size_t consumed;
};

/// First result outside the continue set, or the set's sole element.
inline ControlOutcome control(NodeKind kind, const States& results) {
  const States keep = continue_set(kind);
  auto in_keep = [&](ReturnState r) { return std::count(keep.begin(), keep.end(), r) > 0; };
  auto it = std::find_if_not(results.begin(), results.end(), in_keep);
  if (it == results.end()) return {keep.front(), results.size()};
  return {*it, static_cast<std::size_t>(it - results.begin()) + 1};
}

/// Rule order: F, then R, then S, else EMPTY.
inline ReturnState parallel(const States& results) {
  auto has = [&](ReturnState s) { return std::find(results.begin(), results.end(), s) != results.end(); };
  if (has(ReturnState::Failure)) return ReturnState::Failure;
  if (has(ReturnState::Running)) return ReturnState::Running;
  if (has(ReturnState::Success)) return ReturnState::Success;
  return ReturnState::Empty;
}

struct StarRun {
  States results;                  // root result per tick
  std::vector<std::size_t> ticks;  // times each child was ticked
};

/// Node* with memory. `remembered` is SUCCESS for sequence_star and FAILURE
/// for selector_star; `other` is the state that ends the tick early.
inline StarRun node_star(const std::vector<States>& scripts, int ticks, ReturnState remembered,
                         ReturnState other) {
  const std::size_t n = scripts.size();
  std::vector<bool> memo(n, false);
  std::vector<std::size_t> cursor(n, 0);
  StarRun run;
  run.ticks.assign(n, 0);
  for (int t = 0; t < ticks; ++t) {
    bool decided = false;
    ReturnState result = remembered;
    for (std::size_t i = 0; i < n && !decided; ++i) {
      if (memo[i]) continue;
      const States& s = scripts[i];
      ReturnState r = s[std::min(cursor[i], s.size() - 1)];
      ++cursor[i];
      ++run.ticks[i];
      if (r == remembered) {
        memo[i] = true;
      } else if (r == other || r == ReturnState::Running) {
        result = r;
        decided = true;
      }
    }
    if (!decided) std::fill(memo.begin(), memo.end(), false);
    run.results.push_back(result);
  }
  return run;
}

inline StarRun sequence_star(const std::vector<States>& scripts, int ticks) {
  return node_star(scripts, ticks, ReturnState::Success, ReturnState::Failure);
}

inline StarRun selector_star(const std::vector<States>& scripts, int ticks) {
  return node_star(scripts, ticks, ReturnState::Failure, ReturnState::Success);
}

}  // namespace oracle
