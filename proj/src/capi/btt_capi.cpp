#include "btt/btt.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "btt/engine.hpp"
#include "btt/expander.hpp"
#include "btt/textio.hpp"

struct btt_document {
  btt::Document doc;
};

struct btt_tree {
  btt::ExpandedTree tree;
};

struct btt_scenario {
  btt::Scenario scenario;
};

struct btt_engine {
  btt::Engine engine;
};

struct btt_error {
  struct Entry {
    std::string code;
    std::string message;
    int line = 0;
    int column = 0;
  };
  btt_status status = BTT_OK;
  std::vector<Entry> entries;
};

namespace {

btt_status status_of(btt::Code c) { return static_cast<btt_status>(btt::exit_class(c)); }

btt_status report(btt_error** err, const btt::Error& e) {
  btt_status st = status_of(e.code());
  if (!err) return st;
  auto* out = new (std::nothrow) btt_error;
  if (!out) return st;
  out->status = st;
  for (const auto& d : e.diagnostics()) {
    btt_error::Entry entry;
    entry.code = std::string(btt::code_name(d.code));
    entry.message = btt::diagnostic_render(d);
    if (d.span) {
      entry.line = d.span->line;
      entry.column = d.span->column;
    }
    out->entries.push_back(std::move(entry));
  }
  *err = out;
  return st;
}

btt_status report_plain(btt_error** err, btt_status st, const char* code, std::string message) {
  if (!err) return st;
  auto* out = new (std::nothrow) btt_error;
  if (!out) return st;
  out->status = st;
  out->entries.push_back({code, std::string(code) + ": " + message, 0, 0});
  *err = out;
  return st;
}

/// Runs `body`, converting exceptions into a status and error object.
template <class Body>
btt_status guarded(btt_error** err, Body&& body) {
  if (err) *err = nullptr;
  try {
    body();
    return BTT_OK;
  } catch (const btt::Error& e) {
    return report(err, e);
  } catch (const std::bad_alloc&) {
    return report_plain(err, BTT_ERR_RUNTIME, "RUNTIME_ERROR", "out of memory");
  } catch (const std::exception& e) {
    return report_plain(err, BTT_ERR_RUNTIME, "RUNTIME_ERROR", e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

btt_status invalid(btt_error** err, const char* what) {
  if (err) *err = nullptr;
  return report_plain(err, BTT_INVALID_CALL, "INVALID_CALL", what);
}

const btt_error::Entry* entry_at(const btt_error* e, size_t i) {
  return e && i < e->entries.size() ? &e->entries[i] : nullptr;
}

}  // namespace

extern "C" {

const char* btt_version(void) { return "1.0.0"; }

const char* btt_state_name(btt_state s) {
  switch (s) {
    case BTT_SUCCESS: return "SUCCESS";
    case BTT_FAILURE: return "FAILURE";
    case BTT_RUNNING: return "RUNNING";
    case BTT_EMPTY: return "EMPTY";
  }
  return "UNKNOWN";
}

void btt_string_free(char* s) { std::free(s); }

btt_status btt_document_parse(const char* text, size_t len, btt_document** out, btt_error** err) {
  if (!out || (!text && len)) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] {
    *out = new btt_document{btt::parse_document(std::string_view(text ? text : "", len))};
  });
}

btt_status btt_document_read_file(const char* path, btt_document** out, btt_error** err) {
  if (!out || !path) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] { *out = new btt_document{btt::parse_document(btt::read_file(path))}; });
}

void btt_document_free(btt_document* doc) { delete doc; }

void btt_expand_options_init(btt_expand_options* opts) {
  if (!opts) return;
  btt::ExpandOptions defaults;
  opts->max_depth = defaults.max_depth;
  opts->use_stdlib = defaults.use_stdlib ? 1 : 0;
}

btt_status btt_expand(const btt_document* doc, const btt_expand_options* opts, btt_tree** out,
                      btt_error** err) {
  if (!doc || !out) return invalid(err, "null argument");
  *out = nullptr;
  btt::ExpandOptions options;
  if (opts) {
    if (opts->max_depth < 1) return invalid(err, "max_depth must be at least 1");
    options.max_depth = opts->max_depth;
    options.use_stdlib = opts->use_stdlib != 0;
  }
  return guarded(err, [&] {
    btt::ExpandedTree tree = btt::expand_document(doc->doc, options);
    if (auto diags = btt::check_expressions(tree); !diags.empty())
      throw btt::Error(std::move(diags));
    *out = new btt_tree{std::move(tree)};
  });
}

size_t btt_tree_size(const btt_tree* tree) { return tree ? tree->tree.nodes.size() : 0; }

btt_status btt_tree_serialize(const btt_tree* tree, char** out, btt_error** err) {
  if (!tree || !out) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] { *out = copy_string(btt::serialize_expanded(tree->tree)); });
}

btt_status btt_tree_dot(const btt_tree* tree, char** out, btt_error** err) {
  if (!tree || !out) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] { *out = copy_string(btt::render_dot(tree->tree)); });
}

void btt_tree_free(btt_tree* tree) { delete tree; }

btt_status btt_scenario_parse(const char* text, size_t len, btt_scenario** out, btt_error** err) {
  if (!out || (!text && len)) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] {
    *out = new btt_scenario{btt::parse_scenario(std::string_view(text ? text : "", len))};
  });
}

btt_status btt_scenario_read_file(const char* path, btt_scenario** out, btt_error** err) {
  if (!out || !path) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] { *out = new btt_scenario{btt::parse_scenario(btt::read_file(path))}; });
}

void btt_scenario_free(btt_scenario* sc) { delete sc; }

btt_status btt_engine_create(const btt_tree* tree, const btt_scenario* scenario, btt_engine** out,
                             btt_error** err) {
  if (!tree || !out) return invalid(err, "null argument");
  *out = nullptr;
  return guarded(err, [&] {
    std::optional<btt::Scenario> sc;
    if (scenario) sc = scenario->scenario;
    *out = new btt_engine{btt::Engine(tree->tree, std::move(sc))};
  });
}

btt_status btt_engine_tick(btt_engine* eng, btt_state* out, btt_error** err) {
  if (!eng) return invalid(err, "null argument");
  return guarded(err, [&] {
    auto r = eng->engine.tick();
    if (out) *out = static_cast<btt_state>(r.state);
  });
}

btt_status btt_engine_trace(const btt_engine* eng, char** out) {
  if (!eng || !out) return BTT_INVALID_CALL;
  *out = nullptr;
  return guarded(nullptr,
                 [&] { *out = copy_string(btt::render_trace(eng->engine.last_events())); });
}

btt_status btt_engine_memory_dump(const btt_engine* eng, char** out) {
  if (!eng || !out) return BTT_INVALID_CALL;
  *out = nullptr;
  return guarded(nullptr, [&] { *out = copy_string(eng->engine.memory().dump()); });
}

long long btt_engine_tick_count(const btt_engine* eng) {
  return eng ? static_cast<long long>(eng->engine.tick_count()) : 0;
}

void btt_engine_free(btt_engine* eng) { delete eng; }

btt_status btt_error_status(const btt_error* e) { return e ? e->status : BTT_OK; }

size_t btt_error_count(const btt_error* e) { return e ? e->entries.size() : 0; }

const char* btt_error_code(const btt_error* e, size_t i) {
  const auto* entry = entry_at(e, i);
  return entry ? entry->code.c_str() : "";
}

const char* btt_error_message(const btt_error* e, size_t i) {
  const auto* entry = entry_at(e, i);
  return entry ? entry->message.c_str() : "";
}

int btt_error_line(const btt_error* e, size_t i) {
  const auto* entry = entry_at(e, i);
  return entry ? entry->line : 0;
}

int btt_error_column(const btt_error* e, size_t i) {
  const auto* entry = entry_at(e, i);
  return entry ? entry->column : 0;
}

void btt_error_free(btt_error* e) { delete e; }

}  // extern "C"
