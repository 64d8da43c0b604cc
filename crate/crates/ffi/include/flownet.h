#ifndef FLOWNET_H
#define FLOWNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum FlownetStatus {
  FLOWNET_STATUS_OK = 0,
  FLOWNET_STATUS_NULL_POINTER = 1,
  FLOWNET_STATUS_INVALID_UTF8 = 2,
  // The scenario document failed to parse or validate.
  FLOWNET_STATUS_INVALID_SCENARIO = 3,
  // A computation failed (non-convergence, unstable integration, ...).
  FLOWNET_STATUS_RUNTIME_ERROR = 4,
  // The output buffer is shorter than the number of links.
  FLOWNET_STATUS_BUFFER_TOO_SMALL = 5,
  // An internal panic was caught at the boundary.
  FLOWNET_STATUS_PANIC = 6,
} FlownetStatus;

// Opaque scenario handle.
typedef struct FlownetScenario FlownetScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and validates a scenario document. On success `*out` receives a
// handle owned by the caller.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum FlownetStatus flownet_scenario_from_json(const char *json, struct FlownetScenario **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `handle` must come from `flownet_scenario_from_json` and not be used afterwards.
void flownet_scenario_free(struct FlownetScenario *handle);

// Number of links; output buffers must hold at least this many values.
//
// # Safety
// `handle` must be a live handle and `out` a valid pointer.
enum FlownetStatus flownet_scenario_link_count(const struct FlownetScenario *handle, size_t *out);

// Minimum origin-destination cut capacity of the unperturbed network.
//
// # Safety
// `handle` must be a live handle and `capacity` a valid pointer.
enum FlownetStatus flownet_min_cut(const struct FlownetScenario *handle, double *capacity);

// Limit flow for constant inflow `inflow`, written in link order.
//
// # Safety
// `handle` must be a live handle and `flows` must point to `len` doubles.
enum FlownetStatus flownet_limit_flow(const struct FlownetScenario *handle,
                                      double inflow,
                                      double *flows,
                                      size_t len);

// Simulates the scenario and writes the terminal flow in link order.
// A non-positive `horizon` keeps the scenario's own horizon.
//
// # Safety
// `handle` must be a live handle and `flows` must point to `len` doubles.
enum FlownetStatus flownet_simulate_terminal_flow(const struct FlownetScenario *handle,
                                                  double horizon,
                                                  double *flows,
                                                  size_t len);

// Weak-resilience report as a JSON string, to be released with
// `flownet_string_free`. `samples == 0` keeps the default sample count.
//
// # Safety
// `handle` must be a live handle and `out` a valid pointer.
enum FlownetStatus flownet_resilience_json(const struct FlownetScenario *handle,
                                           uint64_t seed,
                                           size_t samples,
                                           char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void flownet_string_free(char *s);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into the library from the same thread.
const char *flownet_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *flownet_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWNET_H */
