// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "btt/engine.hpp"
#include "btt/expander.hpp"
#include "btt/exprs.hpp"
#include "btt/textio.hpp"
#include "oracles/oracles.hpp"
#include "support/expr_gen.hpp"
#include "support/support.hpp"

using namespace btt;

namespace {

constexpr ReturnState S = ReturnState::Success;
constexpr ReturnState F = ReturnState::Failure;
constexpr ReturnState R = ReturnState::Running;
constexpr ReturnState E = ReturnState::Empty;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects the first few mismatches of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 5) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string notes() const {
    return failures_ > 5 ? notes_ + "; ... " + std::to_string(failures_) + " failures" : notes_;
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string states(const std::vector<ReturnState>& v) {
  std::string out;
  for (auto s : v) out += (out.empty() ? "" : ",") + std::string(state_name(s));
  return out;
}

ExpandedTree tree_of(const std::string& text) { return expand_document(parse_document(text)); }

const std::string kSamplePath = support::source_path("samples/latch.yaml").string();

// 1. CLI expand of the reference document is byte-identical to the golden, under 0.1 s.
void golden_expansion(Check& c) {
  const std::string golden = support::read_text(support::source_path("tests/golden/latch.expanded.yaml"));
  auto t0 = Clock::now();
  auto r = support::run_cli({"expand", kSamplePath});
  double dt = seconds_since(t0);
  c.expect(r.exit_code == 0, "exit " + std::to_string(r.exit_code));
  c.expect(r.out == golden, "output differs from golden");
  c.expect(dt < 0.1, "took " + std::to_string(dt) + " s");
}

// 2. Latch trace over 5 ticks, then a tree whose reset re-arms the latch.
void latch_and_reset(Check& c) {
  Scenario sc = parse_scenario("actions: {goto: [RUNNING, RUNNING, SUCCESS]}\n");
  Engine eng(tree_of(support::read_text(kSamplePath)), sc);
  std::vector<ReturnState> results;
  int goto_events = 0;
  for (int t = 0; t < 5; ++t) {
    auto r = eng.tick();
    results.push_back(r.state);
    for (const auto& ev : r.events) goto_events += ev.node == "goto";
  }
  c.expect(results == std::vector<ReturnState>{R, R, S, S, S}, "latch results " + states(results));
  c.expect(goto_events == 3, "goto ticked " + std::to_string(goto_events) + " times");

  const std::string rearm =
      "root: main\nnodes:\n"
      "  main: {type: parallel, children: [count, example, rearm]}\n"
      "  count: {type: action, script: [\"n := n + 1\"]}\n"
      "  example: {type: latch, children: [goto]}\n"
      "  goto: {type: action}\n"
      "  rearm: {type: selector, children: [skip, wipe]}\n"
      "  skip: {type: condition, if: \"n != 5\"}\n"
      "  wipe: {type: reset, args: {targets: [goto]}}\n";
  Scenario sc2 = parse_scenario("memory: {n: 0}\nactions: {goto: [RUNNING, RUNNING, SUCCESS]}\n");
  Engine eng2(tree_of(rearm), sc2);
  std::vector<int> goto_ticks;
  for (int t = 1; t <= 6; ++t)
    for (const auto& ev : eng2.tick().events)
      if (ev.node == "goto") goto_ticks.push_back(t);
  c.expect(goto_ticks == std::vector<int>{1, 2, 3, 6}, "reset tree: goto ticks differ from 1,2,3,6");
}

// 3. Exhaustive Node* sweep against the oracle, under 60 s.
void star_sweep(Check& c) {
  auto t0 = Clock::now();
  std::vector<oracle::States> scripts;
  for (int len = 1; len <= 3; ++len) {
    int combos = 1;
    for (int i = 0; i < len; ++i) combos *= 3;
    for (int k = 0; k < combos; ++k) {
      oracle::States s;
      for (int i = 0, v = k; i < len; ++i, v /= 3) s.push_back(std::array{S, F, R}[v % 3]);
      scripts.push_back(s);
    }
  }
  long cases = 0;
  for (const std::string kind : {"sequence_star", "selector_star"}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      std::string doc = "root: top\nnodes:\n  top: {type: " + kind + ", children: [";
      for (std::size_t i = 0; i < n; ++i) doc += (i ? ", c" : "c") + std::to_string(i);
      doc += "]}\n";
      for (std::size_t i = 0; i < n; ++i) doc += "  c" + std::to_string(i) + ": {type: action}\n";
      const ExpandedTree tree = tree_of(doc);

      std::size_t total = 1;
      for (std::size_t i = 0; i < n; ++i) total *= scripts.size();
      for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<oracle::States> chosen;
        Scenario sc;
        for (std::size_t i = 0, v = idx; i < n; ++i, v /= scripts.size()) {
          chosen.push_back(scripts[v % scripts.size()]);
          sc.actions.push_back({"c" + std::to_string(i), chosen.back()});
        }
        Engine eng(tree, sc);
        oracle::StarRun got;
        got.ticks.assign(n, 0);
        for (int t = 0; t < 5; ++t) {
          auto r = eng.tick();
          got.results.push_back(r.state);
          for (const auto& ev : r.events)
            if (ev.node.size() == 2 && ev.node[0] == 'c') ++got.ticks[ev.node[1] - '0'];
        }
        auto want = kind == "sequence_star" ? oracle::sequence_star(chosen, 5) : oracle::selector_star(chosen, 5);
        c.expect(got.results == want.results && got.ticks == want.ticks,
                 kind + " case " + std::to_string(idx) + ": got " + states(got.results) + " want " +
                     states(want.results));
        ++cases;
      }
    }
  }
  double dt = seconds_since(t0);
  c.expect(dt < 60.0, "took " + std::to_string(dt) + " s");
  c.expect(cases == 2 * (39 + 39 * 39 + 39 * 39 * 39), "case count " + std::to_string(cases));
}

// 4. Control and parallel truth tables, under 1 s.
void truth_tables(Check& c) {
  auto t0 = Clock::now();
  std::vector<oracle::States> seqs;
  std::vector<oracle::States> layer{{}};
  for (int len = 1; len <= 3; ++len) {
    std::vector<oracle::States> next;
    for (const auto& s : layer)
      for (ReturnState r : {S, F, R, E}) {
        auto t = s;
        t.push_back(r);
        next.push_back(t);
      }
    seqs.insert(seqs.end(), next.begin(), next.end());
    layer = next;
  }
  int control_rows = 0, parallel_rows = 0;
  for (NodeKind kind : {NodeKind::Sequence, NodeKind::Selector, NodeKind::Skipper}) {
    for (const auto& s : seqs) {
      std::size_t consumed = 0;
      ReturnState got = control_step(kind, s, &consumed);
      std::size_t pulled = 0;
      ReturnState lazy = control_step(kind, [&]() -> std::optional<ReturnState> {
        if (pulled == s.size()) return std::nullopt;
        return s[pulled++];
      });
      auto want = oracle::control(kind, s);
      c.expect(got == want.result && consumed == want.consumed && lazy == got && pulled == consumed,
               std::string(kind_name(kind)) + " " + states(s));
      ++control_rows;
    }
  }
  for (const auto& s : seqs) {
    c.expect(parallel_step(s) == oracle::parallel(s), "parallel " + states(s));
    ++parallel_rows;
  }
  double dt = seconds_since(t0);
  c.expect(control_rows == 252, "control rows " + std::to_string(control_rows));
  c.expect(parallel_rows == 84, "parallel rows " + std::to_string(parallel_rows));
  c.expect(dt < 1.0, "took " + std::to_string(dt) + " s");
}

// 5. Corpus determinism, idempotence and no residue, under 5 s.
void corpus_properties(Check& c) {
  auto t0 = Clock::now();
  auto files = support::corpus_files();
  c.expect(!files.empty(), "empty corpus");
  for (const auto& path : files) {
    const std::string text = support::read_text(path);
    const std::string name = path.filename().string();
    std::string first;
    try {
      first = serialize_expanded(tree_of(text));
      for (int i = 1; i < 20; ++i)
        c.expect(serialize_expanded(tree_of(text)) == first, name + ": run " + std::to_string(i) + " differs");
      c.expect(serialize_expanded(tree_of(first)) == first, name + ": not idempotent");
    } catch (const Error& e) {
      c.expect(false, name + ": " + e.what());
      continue;
    }
    c.expect(first.find('$') == std::string::npos, name + ": '$' residue");
    c.expect(first.find('~') == std::string::npos, name + ": '~' residue");
    c.expect(first.find("foreach") == std::string::npos, name + ": foreach residue");
  }
  double dt = seconds_since(t0);
  c.expect(dt < 5.0, "took " + std::to_string(dt) + " s");
}

// 6. CLI exit codes on the error documents.
void error_exit_codes(Check& c) {
  struct Case {
    const char* command;
    const char* file;
    const char* code;
    int exit;
  };
  const Case cases[] = {
      {"validate", "recursive.yaml", "RECURSIVE_TEMPLATE", 3},
      {"validate", "duplicate.yaml", "DUPLICATE_NAME", 3},
      {"validate", "arity.yaml", "ARITY_MISMATCH", 3},
      {"validate", "unknown_type.yaml", "UNKNOWN_TYPE", 3},
      {"run", "undefined_var.yaml", "UNDEFINED_VARIABLE", 4},
  };
  for (const auto& k : cases) {
    auto r = support::run_cli({k.command, support::source_path(std::string("tests/errors/") + k.file).string()});
    c.expect(r.exit_code == k.exit, std::string(k.file) + ": exit " + std::to_string(r.exit_code));
    c.expect(r.err.find(k.code) != std::string::npos, std::string(k.file) + ": missing " + k.code);
  }
}

// 7. Expression round-trips, state equality pairs and short-circuiting, under 10 s.
void expressions(Check& c) {
  auto t0 = Clock::now();
  support::ExprGen gen(20240601);
  for (int i = 0; i < 10000; ++i) {
    auto e = gen.make(7);
    std::string text = print_expr(*e);
    try {
      c.expect(*parse_expr(text) == *e, "round trip: " + text);
    } catch (const Error& err) {
      c.expect(false, "reparse failed: " + text);
    }
  }
  int pairs = 0;
  for (ReturnState a : {S, F, R, E})
    for (ReturnState b : {S, F, R, E}) {
      Memory m;
      m.set("__STATE__/x", Value(a));
      Value v = eval_expr(*parse_expr("__STATE__/x == " + std::string(state_name(b))), m);
      c.expect(v == Value(a == b), "state pair " + std::string(state_name(a)) + "/" + std::string(state_name(b)));
      ++pairs;
    }
  c.expect(pairs == 16, "pairs");
  Memory empty;
  c.expect(eval_expr(*parse_expr("false && missing"), empty) == Value(false), "&& short circuit");
  c.expect(eval_expr(*parse_expr("true || missing"), empty) == Value(true), "|| short circuit");
  c.expect(eval_expr(*parse_expr("false && 1 / 0 == 0"), empty) == Value(false), "&& skips division");
  try {
    eval_expr(*parse_expr("true && missing"), empty);
    c.expect(false, "rhs evaluated when needed");
  } catch (const Error& e) {
    c.expect(e.code() == Code::UndefinedVariable, "wrong error for needed rhs");
  }
  double dt = seconds_since(t0);
  c.expect(dt < 10.0, "took " + std::to_string(dt) + " s");
}

// 8. Mutated documents: every failure is a btt::Error, under 60 s.
void mutation_totality(Check& c) {
  auto t0 = Clock::now();
  std::vector<std::string> seeds;
  for (const auto& p : support::corpus_files()) seeds.push_back(support::read_text(p));
  seeds.push_back(support::read_text(kSamplePath));
  for (const char* f : {"recursive.yaml", "duplicate.yaml", "arity.yaml", "unknown_type.yaml", "undefined_var.yaml"})
    seeds.push_back(support::read_text(support::source_path(std::string("tests/errors/") + f)));

  std::mt19937 rng(8);
  const std::string tokens[] = {"$",  "~",  "$@", ":",        "-",    "[",     "]",        "{", "}",
                                "\n", " ",  "'",  "\"",       "#",    "&a",    "*a",       "!!str ",
                                "0",  "-1", "1e999", "foreach", "args", "nodes", "children", "$i", "$child"};
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string doc = seeds[rng() % seeds.size()];
    int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits && !doc.empty(); ++k) {
      std::size_t at = rng() % doc.size();
      switch (rng() % 5) {
        case 0: doc[at] = static_cast<char>(rng() % 256); break;
        case 1: doc.erase(at, 1 + rng() % 8); break;
        case 2: doc.insert(at, tokens[rng() % std::size(tokens)]); break;
        case 3: {
          std::size_t from = rng() % doc.size();
          doc.insert(at, doc.substr(from, 1 + rng() % 20));
          break;
        }
        default: {
          // swap two lines
          std::vector<std::string> lines;
          std::istringstream in(doc);
          for (std::string line; std::getline(in, line);) lines.push_back(line);
          if (lines.size() > 1) std::swap(lines[rng() % lines.size()], lines[rng() % lines.size()]);
          doc.clear();
          for (const auto& l : lines) doc += l + "\n";
        }
      }
    }
    try {
      auto tree = tree_of(doc);
      serialize_expanded(tree);
      render_dot(tree);
      Engine eng(tree);
      for (int t = 0; t < 3; ++t) eng.tick();
      ++accepted;
    } catch (const Error&) {
      ++rejected;
    } catch (const std::exception& e) {
      c.expect(false, std::string("foreign exception: ") + e.what());
    } catch (...) {
      c.expect(false, "non-standard exception");
    }
  }
  double dt = seconds_since(t0);
  c.expect(dt < 60.0, "took " + std::to_string(dt) + " s");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Check&)> run;
  };
  const Criterion criteria[] = {
      {1, "golden expansion of the reference latch document", golden_expansion},
      {2, "latch trace and reset re-arming", latch_and_reset},
      {3, "exhaustive sequence_star/selector_star sweep vs oracle", star_sweep},
      {4, "control and parallel truth tables", truth_tables},
      {5, "corpus determinism, idempotence and no residue", corpus_properties},
      {6, "CLI exit codes on error documents", error_exit_codes},
      {7, "expression round trips, state pairs, short circuit", expressions},
      {8, "mutated documents raise only structured errors", mutation_totality},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    auto t0 = Clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("unexpected exception: ") + e.what());
    }
    double dt = seconds_since(t0);
    std::printf("%s criterion %d: %s (%.3f s)%s%s\n", c.ok() ? "PASS" : "FAIL", cr.id, cr.title, dt,
                c.ok() ? "" : " -- ", c.notes().c_str());
    std::fflush(stdout);
    failed += !c.ok();
  }
  return failed == 0 ? 0 : 1;
}
