#ifndef RIPPLE_OPF_H
#define RIPPLE_OPF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum RopfStatus {
  ROPF_STATUS_OK = 0,
  ROPF_STATUS_NULL_POINTER = 1,
  ROPF_STATUS_INVALID_INPUT = 2,
  ROPF_STATUS_SOLVER_FAILURE = 3,
  ROPF_STATUS_INTERNAL = 4,
} RopfStatus;

// Loaded, validated network.
typedef struct RopfNetwork RopfNetwork;

// Headline numbers of one dc-link simulation.
typedef struct RopfOracleSummary {
  double proposed_ripple_w;
  double simulated_ripple_w;
  double proposed_ir_a;
  double simulated_ir_a;
  double lowfreq_rms_w;
  double lowfreq_rms_a;
} RopfOracleSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *ropf_last_error(void);

// Parses a network from a JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum RopfStatus ropf_network_from_json(const char *json, struct RopfNetwork **out);

// Loads a network from a JSON file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RopfStatus ropf_network_load_file(const char *path, struct RopfNetwork **out);

// Loads a bundled network (`statcom_toy`, `demo_feeder`, `sop_two_feeder`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum RopfStatus ropf_network_preset(const char *name, struct RopfNetwork **out);

// Releases a network handle. Null is ignored.
//
// # Safety
// `net` must come from one of the constructors and not be used afterwards.
void ropf_network_free(struct RopfNetwork *net);

// Number of buses, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
uintptr_t ropf_network_bus_count(const struct RopfNetwork *net);

// Power flow with all converters idle; writes the solved state as JSON.
//
// # Safety
// `net` must be a live handle and `out_json` a valid pointer.
enum RopfStatus ropf_power_flow(const struct RopfNetwork *net, char **out_json);

// Optimal power flow. `objective_json` holds an objective specification;
// null selects minimum peak current on the branch leaving the source.
// Writes the solution as JSON, also when the optimizer stops short of a
// local optimum, in which case `SolverFailure` is returned.
//
// # Safety
// `net` must be a live handle, `objective_json` null or a NUL-terminated
// string, and `out_json` a valid pointer.
enum RopfStatus ropf_opf(const struct RopfNetwork *net,
                         const char *objective_json,
                         char **out_json);

// Runs a bundled dc-link simulation case (`3a` to `3f`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a valid pointer.
enum RopfStatus ropf_oracle_case(const char *name, struct RopfOracleSummary *out);

// 2ω ripple phasor `Σ V·I` of `legs` legs. `v` and `i` hold interleaved
// real and imaginary parts, `2·legs` values each.
//
// # Safety
// `v` and `i` must point to `2·legs` doubles; `out_re`, `out_im` must be valid.
enum RopfStatus ropf_ripple_phasor(const double *v,
                                   const double *i,
                                   uintptr_t legs,
                                   double *out_re,
                                   double *out_im);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void ropf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIPPLE_OPF_H */
