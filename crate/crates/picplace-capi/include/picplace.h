#ifndef PICPLACE_H
#define PICPLACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by fallible calls.
 */
typedef enum PpStatus {
  PpStatus_Ok = 0,
  PpStatus_InvalidArgument = 1,
  PpStatus_ParseError = 2,
  PpStatus_Diverged = 3,
  PpStatus_LegalizeFailed = 4,
} PpStatus;

/**
 * Opaque parsed design.
 */
typedef struct PpDesign PpDesign;

/**
 * Opaque placement result: one position per component.
 */
typedef struct PpPlacement PpPlacement;

/**
 * Tunable subset of the run configuration.
 */
typedef struct PpRunOptions {
  uint64_t seed;
  uintptr_t iterations;
  double overflow_stop;
  double target_density;
} PpRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next failing call.
 */
const char *pp_last_error(void);

/**
 * Fill `opts` with the engine defaults. Returns false on null input.
 *
 * # Safety
 * `opts` must be null or point to writable storage for a PpRunOptions.
 */
bool pp_run_options_default(struct PpRunOptions *opts);

/**
 * Parse a YAML netlist document. Returns null on error; see pp_last_error.
 *
 * # Safety
 * `text` must be a valid null-terminated string.
 */
struct PpDesign *pp_design_parse_yaml(const char *text);

/**
 * Parse a YAML netlist file from disk.
 *
 * # Safety
 * `path` must be a valid null-terminated string.
 */
struct PpDesign *pp_design_load(const char *path);

/**
 * Generate a Clements MZI mesh with `modes` modes.
 */
struct PpDesign *pp_design_clements(uintptr_t modes, bool large_die);

/**
 * Generate a butterfly interconnect with `ports` ports (power of two).
 */
struct PpDesign *pp_design_butterfly(uintptr_t ports, bool large_die);

/**
 * # Safety
 * `design` must come from a pp_design_* constructor and not be freed twice.
 */
void pp_design_free(struct PpDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
uintptr_t pp_design_component_count(const struct PpDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
uintptr_t pp_design_net_count(const struct PpDesign *design);

/**
 * Run global placement. Returns a placement handle even when the run
 * diverged (query pp_placement_status); null only on invalid arguments.
 *
 * # Safety
 * `design` must be a live handle; `opts` may be null for defaults.
 */
struct PpPlacement *pp_place(const struct PpDesign *design, const struct PpRunOptions *opts);

/**
 * Remove residual overlaps in place.
 *
 * # Safety
 * Both handles must be live and belong together.
 */
enum PpStatus pp_legalize(const struct PpDesign *design, struct PpPlacement *placement);

/**
 * # Safety
 * `placement` must be a live handle.
 */
enum PpStatus pp_placement_status(const struct PpPlacement *placement);

/**
 * # Safety
 * `placement` must be a live handle.
 */
uintptr_t pp_placement_iterations(const struct PpPlacement *placement);

/**
 * Final density overflow of the run.
 *
 * # Safety
 * `placement` must be a live handle.
 */
double pp_placement_overflow(const struct PpPlacement *placement);

/**
 * Lower-left corner of one component. Returns false on bad indices.
 *
 * # Safety
 * Pointers must be valid; `x`/`y` must point to writable doubles.
 */
bool pp_placement_position(const struct PpPlacement *placement,
                           uintptr_t component,
                           double *x,
                           double *y);

/**
 * Serialize the placed design as a YAML document. Free with pp_string_free.
 *
 * # Safety
 * Both handles must be live and belong together.
 */
char *pp_placement_to_yaml(const struct PpDesign *design, const struct PpPlacement *placement);

/**
 * Quality report as a JSON object. Free with pp_string_free.
 *
 * # Safety
 * Both handles must be live and belong together.
 */
char *pp_metrics_json(const struct PpDesign *design, const struct PpPlacement *placement);

/**
 * # Safety
 * `placement` must come from pp_place and not be freed twice.
 */
void pp_placement_free(struct PpPlacement *placement);

/**
 * # Safety
 * `s` must come from a pp_* string-returning call and not be freed twice.
 */
void pp_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PICPLACE_H */
