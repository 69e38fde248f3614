#ifndef PLANBENCH_H
#define PLANBENCH_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PbStatus {
  PB_STATUS_OK = 0,
  PB_STATUS_NULL_POINTER = 1,
  PB_STATUS_INVALID_UTF8 = 2,
  PB_STATUS_PARSE = 3,
  PB_STATUS_INVALID_ARGUMENT = 4,
  PB_STATUS_NOT_FOUND = 5,
  PB_STATUS_PANIC = 6,
} PbStatus;

typedef enum PbFailure {
  PB_FAILURE_NONE = 0,
  PB_FAILURE_INVALID_PAIR = 1,
  PB_FAILURE_PREREQUISITE_MISSING = 2,
  PB_FAILURE_NOT_IN_RANGE = 3,
  PB_FAILURE_OCCLUDED = 4,
  PB_FAILURE_CAPACITY_EXCEEDED = 5,
  PB_FAILURE_SURFACE_REJECTED = 6,
  PB_FAILURE_NO_SUCH_OBJECT = 7,
} PbFailure;

typedef enum PbMode {
  PB_MODE_DIRECT = 0,
  PB_MODE_ASSISTED = 1,
} PbMode;

typedef enum PbTermination {
  PB_TERMINATION_STOP_PREDICTED = 0,
  PB_TERMINATION_FAILURE_LIMIT = 1,
  PB_TERMINATION_STEP_LIMIT = 2,
} PbTermination;

/**
 * Opaque EDH instance handle.
 */
typedef struct PbInstance PbInstance;

/**
 * Opaque world handle.
 */
typedef struct PbWorld PbWorld;

typedef struct PbOutcome {
  bool success;
  enum PbFailure failure;
} PbOutcome;

typedef struct PbEpisodeSummary {
  bool success;
  /**
   * Share of goal conditions satisfied at the end.
   */
  double goal_fraction;
  uint32_t steps;
  uint32_t failures;
  /**
   * Type-level edit distance between attempted and reference plans.
   */
  size_t edit_distance;
  enum PbTermination termination;
} PbEpisodeSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. Valid until
 * the next failing call on the same thread; do not free.
 */
const char *pb_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pb_string_free(char *s);

/**
 * Build a world from a scene description in JSON.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_from_scene_json(const char *json, struct PbWorld **world);

/**
 * Release a world. Null is ignored.
 *
 * # Safety
 * `world` must come from this library and not have been freed.
 */
void pb_world_free(struct PbWorld *world);

/**
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_clone(const struct PbWorld *world, struct PbWorld **copy);

/**
 * Full world state as JSON; free with `pb_string_free`.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_to_json(const struct PbWorld *world, char **json);

/**
 * Apply one interaction in place. The world is unchanged when the outcome
 * reports a failure; the call itself still returns `PB_STATUS_OK`.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_apply(struct PbWorld *world,
                             const char *action,
                             const char *target,
                             struct PbOutcome *outcome);

/**
 * Move the agent next to `target`; writes the number of cells walked.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_navigate(struct PbWorld *world, const char *target, size_t *cells);

/**
 * Id of the nearest instance of a type; free with `pb_string_free`.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_world_closest(const struct PbWorld *world, const char *kind, char **id);

/**
 * Edit distance between two plans in the text format, compared by type
 * with Stop ignored.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_edit_distance(const char *predicted, const char *reference, size_t *distance);

/**
 * Share of afforded steps in a plan given in the text format.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_fraction_valid(const char *plan, double *fraction);

/**
 * Load an EDH instance from its JSON file contents.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_instance_from_json(const char *json, struct PbInstance **instance);

/**
 * Release an instance. Null is ignored.
 *
 * # Safety
 * `instance` must come from this library and not have been freed.
 */
void pb_instance_free(struct PbInstance *instance);

/**
 * Run one episode with a model-free predictor (`oracle`, `coref-oracle`,
 * `baseline` or `random`) under the default limits.
 *
 * # Safety
 * Arguments follow the crate-level contract.
 */
enum PbStatus pb_run_episode(const struct PbInstance *instance,
                             const char *predictor,
                             enum PbMode mode,
                             uint64_t seed,
                             struct PbEpisodeSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLANBENCH_H */
