#ifndef SWING_LATTICE_H
#define SWING_LATTICE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_UTF8 = 2,
  SL_STATUS_INVALID_JSON = 3,
  SL_STATUS_INVALID_DIAGRAM = 4,
  SL_STATUS_INVALID_ARGUMENT = 5,
  SL_STATUS_GAME_ERROR = 6,
  SL_STATUS_PANIC = 7,
} SlStatus;

// A validated lattice diagram.
typedef struct SlDiagram SlDiagram;

// A running game.
typedef struct SlGame SlGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next library call on the same thread.
const char *sl_last_error(void);

// Library version as a static string.
const char *sl_version(void);

// Frees a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed already.
void sl_string_free(char *s);

// Parses `{"size": n, "upper_covers": [[...], ...]}` into a diagram.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SlStatus sl_diagram_from_json(const char *json, struct SlDiagram **out);

// # Safety
// `d` must come from [`sl_diagram_from_json`] and not be used afterwards.
void sl_diagram_free(struct SlDiagram *d);

// # Safety
// `d` must be a live diagram handle.
enum SlStatus sl_diagram_size(const struct SlDiagram *d, size_t *out);

// # Safety
// `d` must be a live diagram handle.
enum SlStatus sl_diagram_edge_count(const struct SlDiagram *d, size_t *out);

// The diagram as JSON, with layout coordinates.
//
// # Safety
// `d` must be a live diagram handle; free the result with [`sl_string_free`].
enum SlStatus sl_diagram_to_json(const struct SlDiagram *d, char **out);

// `con([lower, upper])` as `{"blocks": [[...], ...]}`.
//
// # Safety
// `d` must be a live diagram handle; free the result with [`sl_string_free`].
enum SlStatus sl_principal_congruence(const struct SlDiagram *d,
                                      size_t lower,
                                      size_t upper,
                                      char **out);

// Edges reachable from `[lower, upper]` as a JSON array of pairs.
// `variant` is one of `SL`, `SSL`, `SS`, `UpwardCP`.
//
// # Safety
// `d` must be a live diagram handle, `variant` a NUL-terminated string;
// free the result with [`sl_string_free`].
enum SlStatus sl_reachable(const struct SlDiagram *d,
                           size_t lower,
                           size_t upper,
                           const char *variant,
                           char **out);

// Checks the Swing Lemma on every ordered edge pair. Writes the number of
// discrepancies to `discrepancies` and, if `report` is not NULL, the full
// report as JSON.
//
// # Safety
// `d` must be a live diagram handle; free the report with [`sl_string_free`].
enum SlStatus sl_verify_swing_lemma(const struct SlDiagram *d,
                                    size_t *discrepancies,
                                    char **report);

// Starts a game. `config_json` may be NULL for the defaults; missing
// fields take their default values.
//
// # Safety
// `config_json` must be NULL or NUL-terminated; `out` must be writable.
enum SlStatus sl_game_new(const char *config_json, struct SlGame **out);

// # Safety
// `g` must come from [`sl_game_new`] and not be used afterwards.
void sl_game_free(struct SlGame *g);

// Applies one event (`{"type":"tick","ms":100}`, `{"type":"click_cell",...}`
// or `{"type":"choose_start_edge",...}`) and writes the resulting effects
// as a JSON array.
//
// # Safety
// `g` must be a live game handle; free the result with [`sl_string_free`].
enum SlStatus sl_game_handle_event(struct SlGame *g, const char *event_json, char **out);

// The current game snapshot as JSON.
//
// # Safety
// `g` must be a live game handle; free the result with [`sl_string_free`].
enum SlStatus sl_game_snapshot(const struct SlGame *g, char **out);

// Lives left, or 0 once the game is over.
//
// # Safety
// `g` must be a live game handle.
enum SlStatus sl_game_lives(const struct SlGame *g, uint32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWING_LATTICE_H */
