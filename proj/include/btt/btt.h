#ifndef BTT_BTT_H
#define BTT_BTT_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(BTT_BUILDING_LIBRARY)
#define BTT_API __declspec(dllexport)
#else
#define BTT_API __declspec(dllimport)
#endif
#else
#define BTT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum btt_status {
  BTT_OK = 0,
  BTT_INVALID_CALL = 1,  /* null handle or bad option */
  BTT_ERR_INPUT = 2,     /* I/O, parse, schema, unknown state */
  BTT_ERR_EXPANSION = 3, /* expansion, validation, expression syntax */
  BTT_ERR_RUNTIME = 4    /* evaluation failure during a tick */
} btt_status;

typedef enum btt_state { BTT_SUCCESS = 0, BTT_FAILURE, BTT_RUNNING, BTT_EMPTY } btt_state;

typedef struct btt_document btt_document;
typedef struct btt_tree btt_tree;
typedef struct btt_scenario btt_scenario;
typedef struct btt_engine btt_engine;
typedef struct btt_error btt_error;

typedef struct btt_expand_options {
  int max_depth;  /* >= 1 */
  int use_stdlib; /* nonzero: builtin templates are visible */
} btt_expand_options;

/* Every function that can fail takes an optional `err` out-parameter. On
   failure *err receives an error the caller frees with btt_error_free. */

BTT_API const char* btt_version(void);
BTT_API const char* btt_state_name(btt_state s);
BTT_API void btt_string_free(char* s);

BTT_API btt_status btt_document_parse(const char* text, size_t len, btt_document** out,
                                      btt_error** err);
BTT_API btt_status btt_document_read_file(const char* path, btt_document** out, btt_error** err);
BTT_API void btt_document_free(btt_document* doc);

BTT_API void btt_expand_options_init(btt_expand_options* opts);

/* Expands templates, validates the tree and checks every expression parses.
   `opts` may be null for defaults. */
BTT_API btt_status btt_expand(const btt_document* doc, const btt_expand_options* opts,
                              btt_tree** out, btt_error** err);
BTT_API size_t btt_tree_size(const btt_tree* tree);
BTT_API btt_status btt_tree_serialize(const btt_tree* tree, char** out, btt_error** err);
BTT_API btt_status btt_tree_dot(const btt_tree* tree, char** out, btt_error** err);
BTT_API void btt_tree_free(btt_tree* tree);

BTT_API btt_status btt_scenario_parse(const char* text, size_t len, btt_scenario** out,
                                      btt_error** err);
BTT_API btt_status btt_scenario_read_file(const char* path, btt_scenario** out, btt_error** err);
BTT_API void btt_scenario_free(btt_scenario* sc);

/* `scenario` may be null. The engine keeps its own copies of both inputs. */
BTT_API btt_status btt_engine_create(const btt_tree* tree, const btt_scenario* scenario,
                                     btt_engine** out, btt_error** err);
BTT_API btt_status btt_engine_tick(btt_engine* eng, btt_state* out, btt_error** err);
/* Trace lines of the most recent tick. */
BTT_API btt_status btt_engine_trace(const btt_engine* eng, char** out);
BTT_API btt_status btt_engine_memory_dump(const btt_engine* eng, char** out);
BTT_API long long btt_engine_tick_count(const btt_engine* eng);
BTT_API void btt_engine_free(btt_engine* eng);

BTT_API btt_status btt_error_status(const btt_error* e);
BTT_API size_t btt_error_count(const btt_error* e);
/* Machine-readable code such as "UNKNOWN_TYPE"; "" when i is out of range. */
BTT_API const char* btt_error_code(const btt_error* e, size_t i);
/* One rendered diagnostic line, without source position; "" when i is out of range. */
BTT_API const char* btt_error_message(const btt_error* e, size_t i);
/* 1-based source position, 0 when unknown. */
BTT_API int btt_error_line(const btt_error* e, size_t i);
BTT_API int btt_error_column(const btt_error* e, size_t i);
BTT_API void btt_error_free(btt_error* e);

#ifdef __cplusplus
}
#endif

#endif /* BTT_BTT_H */
