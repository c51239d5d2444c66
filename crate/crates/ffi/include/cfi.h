#ifndef CFI_H
#define CFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CfiStatus {
  CFI_STATUS_OK = 0,
  CFI_STATUS_NULL_POINTER = 1,
  CFI_STATUS_INVALID_ARGUMENT = 2,
  CFI_STATUS_NO_PLAN = 3,
  CFI_STATUS_PARSE = 4,
  CFI_STATUS_SIMULATION = 5,
  CFI_STATUS_PANIC = 6,
} CfiStatus;

typedef enum CfiModel {
  CFI_MODEL_PROPOSED = 0,
  CFI_MODEL_BENCHMARK = 1,
} CfiModel;

/**
 * Simulation result handle.
 */
typedef struct CfiMetrics CfiMetrics;

/**
 * Signal plan handle.
 */
typedef struct CfiPlan CfiPlan;

/**
 * Demand scenario handle.
 */
typedef struct CfiScenario CfiScenario;

typedef struct CfiCounters {
  uint64_t generated;
  uint64_t discharged;
  uint64_t in_network;
  uint64_t denied;
} CfiCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *cfi_last_error(void);

/**
 * Creates a scenario from a total demand (veh/h) and eight movement shares summing to one.
 *
 * # Safety
 * `shares` must point to eight doubles; `out` must be a valid pointer.
 */
enum CfiStatus cfi_scenario_new(uint32_t id,
                                double total_demand,
                                const double *shares,
                                struct CfiScenario **out);

/**
 * # Safety
 * `s` must come from [`cfi_scenario_new`] and not be used afterwards. Null is ignored.
 */
void cfi_scenario_free(struct CfiScenario *s);

/**
 * Builds a plan with the chosen model. `time_limit` is the offset solver limit in seconds.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_optimize(const struct CfiScenario *scenario,
                            enum CfiModel model,
                            double time_limit,
                            struct CfiPlan **out);

/**
 * Parses a plan in the text format produced by [`cfi_plan_to_text`].
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum CfiStatus cfi_plan_from_text(const char *text, struct CfiPlan **out);

/**
 * Serializes a plan. Release the string with [`cfi_string_free`].
 *
 * # Safety
 * `plan` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_plan_to_text(const struct CfiPlan *plan, char **out);

/**
 * # Safety
 * `plan` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_plan_cycle(const struct CfiPlan *plan, int64_t *out);

/**
 * Green seconds of `movement` at `intersection`.
 *
 * # Safety
 * `plan` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_plan_green(const struct CfiPlan *plan,
                              uint32_t intersection,
                              uint32_t movement,
                              int64_t *out);

/**
 * # Safety
 * `plan` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_plan_offset(const struct CfiPlan *plan, uint32_t intersection, int64_t *out);

/**
 * # Safety
 * `plan` must come from this library and not be used afterwards. Null is ignored.
 */
void cfi_plan_free(struct CfiPlan *plan);

/**
 * Simulates `plan` on `scenario` for `horizon` seconds with Poisson arrivals.
 *
 * # Safety
 * `plan` and `scenario` must be live handles; `out` must be a valid pointer.
 */
enum CfiStatus cfi_simulate(const struct CfiPlan *plan,
                            const struct CfiScenario *scenario,
                            uint64_t seed,
                            double horizon,
                            double step,
                            struct CfiMetrics **out);

/**
 * Average delay (s/veh) and time-average queue (veh).
 *
 * # Safety
 * `metrics` must be a live handle; output pointers may be null to skip a value.
 */
enum CfiStatus cfi_metrics_summary(const struct CfiMetrics *metrics, double *delay, double *queue);

/**
 * Mean delay of one movement (1..=8).
 *
 * # Safety
 * `metrics` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_metrics_movement_delay(const struct CfiMetrics *metrics,
                                          uint32_t movement,
                                          double *out);

/**
 * # Safety
 * `metrics` must be a live handle; `out` must be a valid pointer.
 */
enum CfiStatus cfi_metrics_counters(const struct CfiMetrics *metrics, struct CfiCounters *out);

/**
 * # Safety
 * `metrics` must come from [`cfi_simulate`] and not be used afterwards. Null is ignored.
 */
void cfi_metrics_free(struct CfiMetrics *metrics);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void cfi_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CFI_H */
