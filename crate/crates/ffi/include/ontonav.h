#ifndef ONTONAV_H
#define ONTONAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OntonavStatus {
  ONTONAV_STATUS_OK = 0,
  ONTONAV_STATUS_NULL_ARGUMENT = 1,
  ONTONAV_STATUS_INVALID_UTF8 = 2,
  ONTONAV_STATUS_NOT_FOUND = 3,
  ONTONAV_STATUS_INVALID_INPUT = 4,
  ONTONAV_STATUS_CONFLICT = 5,
  ONTONAV_STATUS_INTERNAL = 6,
  ONTONAV_STATUS_PANIC = 7,
} OntonavStatus;

/**
 * Opaque engine handle.
 */
typedef struct OntonavEngine OntonavEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Open an engine. `data_dir` may be null for an in-memory engine seeded
 * from the bundled fixtures; `providers` may be null for the default
 * provider config.
 *
 * # Safety
 * String arguments are null or NUL-terminated; `out` is writable.
 */
enum OntonavStatus ontonav_engine_open(const char *data_dir,
                                       const char *providers,
                                       struct OntonavEngine **out);

/**
 * Release an engine. Null is ignored.
 *
 * # Safety
 * `engine` is null or a handle from `ontonav_engine_open` not yet freed.
 */
void ontonav_engine_free(struct OntonavEngine *engine);

/**
 * Resolve a query (`lang` "en" or "fr", null for "en") to a JSON
 * resolution document. A miss is a success with `"outcome": "miss"`.
 *
 * # Safety
 * See the module documentation.
 */
enum OntonavStatus ontonav_resolve(const struct OntonavEngine *engine,
                                   const char *query,
                                   const char *lang,
                                   char **out_json);

/**
 * Search the corpus through the node the query resolves to; JSON result.
 *
 * # Safety
 * See the module documentation.
 */
enum OntonavStatus ontonav_search(const struct OntonavEngine *engine,
                                  const char *query,
                                  const char *lang,
                                  size_t limit,
                                  char **out_json);

/**
 * Meta-query URLs for a node as a JSON array of `{provider, terms, url}`.
 *
 * # Safety
 * See the module documentation.
 */
enum OntonavStatus ontonav_node_metaqueries(const struct OntonavEngine *engine,
                                            const char *code,
                                            char **out_json);

/**
 * Send one API request, e.g. method "GET" and target "/node/H.3". `body`
 * may be null when `body_len` is 0. The HTTP-style status goes to
 * `out_status` and the response body to `out_body`; API-level errors are
 * reported there, not through the return value.
 *
 * # Safety
 * See the module documentation; `body` points to `body_len` readable bytes.
 */
enum OntonavStatus ontonav_dispatch(const struct OntonavEngine *engine,
                                    const char *method,
                                    const char *target,
                                    const char *content_type,
                                    const uint8_t *body,
                                    size_t body_len,
                                    uint16_t *out_status,
                                    char **out_body);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library not yet freed.
 */
void ontonav_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library on the same thread.
 */
const char *ontonav_last_error(void);

/**
 * Library version, static storage.
 */
const char *ontonav_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONTONAV_H */
