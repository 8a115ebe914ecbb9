// btt: expand, validate, run and render behavior-tree descriptions.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "btt/btt.h"

namespace {

struct Config {
  std::string command;
  std::string input;
  std::string output;
  int ticks = 1;
  std::string scenario;
  bool trace = false;
  bool memory_dump = false;
  int max_depth = 64;
  bool no_stdlib = false;
};

struct Deleter {
  void operator()(btt_document* p) const { btt_document_free(p); }
  void operator()(btt_tree* p) const { btt_tree_free(p); }
  void operator()(btt_scenario* p) const { btt_scenario_free(p); }
  void operator()(btt_engine* p) const { btt_engine_free(p); }
  void operator()(btt_error* p) const { btt_error_free(p); }
  void operator()(char* p) const { btt_string_free(p); }
};

template <class T>
using Handle = std::unique_ptr<T, Deleter>;

int report(btt_status st, btt_error* raw, const std::string& path) {
  Handle<btt_error> err(raw);
  for (size_t i = 0; i < btt_error_count(err.get()); ++i) {
    int line = btt_error_line(err.get(), i);
    if (line > 0)
      std::cerr << path << ':' << line << ':' << btt_error_column(err.get(), i) << ": ";
    std::cerr << btt_error_message(err.get(), i) << '\n';
  }
  return st == BTT_INVALID_CALL ? 2 : static_cast<int>(st);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      ok_ = static_cast<bool>(file_);
    }
  }
  bool ok() const { return ok_; }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  bool flush() {
    stream().flush();
    return static_cast<bool>(stream());
  }

 private:
  std::ofstream file_;
  bool ok_ = true;
};

int run(const Config& cfg) {
  btt_error* err = nullptr;
  btt_document* doc_raw = nullptr;
  if (btt_status st = btt_document_read_file(cfg.input.c_str(), &doc_raw, &err))
    return report(st, err, cfg.input);
  Handle<btt_document> doc(doc_raw);

  btt_expand_options opts;
  btt_expand_options_init(&opts);
  opts.max_depth = cfg.max_depth;
  opts.use_stdlib = cfg.no_stdlib ? 0 : 1;
  btt_tree* tree_raw = nullptr;
  if (btt_status st = btt_expand(doc.get(), &opts, &tree_raw, &err))
    return report(st, err, cfg.input);
  Handle<btt_tree> tree(tree_raw);

  if (cfg.command == "validate") return 0;

  Output out(cfg.output);
  if (!out.ok()) {
    std::cerr << "IO_ERROR: " << cfg.output << ": cannot open output file\n";
    return 2;
  }

  if (cfg.command == "expand" || cfg.command == "dot") {
    char* text_raw = nullptr;
    btt_status st = cfg.command == "expand" ? btt_tree_serialize(tree.get(), &text_raw, &err)
                                            : btt_tree_dot(tree.get(), &text_raw, &err);
    if (st) return report(st, err, cfg.input);
    Handle<char> text(text_raw);
    out.stream() << text.get();
    return out.flush() ? 0 : 2;
  }

  Handle<btt_scenario> scenario;
  if (!cfg.scenario.empty()) {
    btt_scenario* sc_raw = nullptr;
    if (btt_status st = btt_scenario_read_file(cfg.scenario.c_str(), &sc_raw, &err))
      return report(st, err, cfg.scenario);
    scenario.reset(sc_raw);
  }
  btt_engine* eng_raw = nullptr;
  if (btt_status st = btt_engine_create(tree.get(), scenario.get(), &eng_raw, &err))
    return report(st, err, cfg.scenario.empty() ? cfg.input : cfg.scenario);
  Handle<btt_engine> engine(eng_raw);

  btt_state last = BTT_EMPTY;
  for (int i = 0; i < cfg.ticks; ++i) {
    btt_status st = btt_engine_tick(engine.get(), &last, &err);
    if (cfg.trace) {
      char* lines = nullptr;
      if (btt_engine_trace(engine.get(), &lines) == BTT_OK) out.stream() << lines;
      btt_string_free(lines);
    }
    if (st) {
      out.flush();
      return report(st, err, cfg.input);
    }
  }
  if (cfg.memory_dump) {
    char* dump = nullptr;
    if (btt_engine_memory_dump(engine.get(), &dump) == BTT_OK) out.stream() << "---\n" << dump;
    btt_string_free(dump);
  }
  out.stream() << "result=" << btt_state_name(last) << '\n';
  return out.flush() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Behavior-tree template compiler and interpreter"};
  app.add_option("command", cfg.command, "expand | validate | run | dot")
      ->required()
      ->check(CLI::IsMember({"expand", "validate", "run", "dot"}));
  app.add_option("input", cfg.input, "tree description (YAML)")->required();
  app.add_option("-o,--output", cfg.output, "write output here instead of standard output");
  app.add_option("--ticks", cfg.ticks, "number of ticks for run")->check(CLI::PositiveNumber);
  app.add_option("--scenario", cfg.scenario, "scripted action results and memory seeds");
  app.add_flag("--trace", cfg.trace, "print one line per ticked node");
  app.add_flag("--memory-dump", cfg.memory_dump, "print the final memory after ---");
  app.add_option("--max-depth", cfg.max_depth, "template nesting limit")
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-stdlib", cfg.no_stdlib, "disable builtin templates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return run(cfg);
}
