#ifndef SCPDP_H
#define SCPDP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScpdpStatus {
  SCPDP_STATUS_OK = 0,
  SCPDP_STATUS_NULL_POINTER = 1,
  SCPDP_STATUS_INVALID_ARGUMENT = 2,
  SCPDP_STATUS_PARSE = 3,
  SCPDP_STATUS_CAMPAIGN = 4,
  SCPDP_STATUS_PANIC = 5,
} ScpdpStatus;

// Compiled netlist.
typedef struct ScpdpNetlist ScpdpNetlist;

// Coverage report of a campaign.
typedef struct ScpdpReport ScpdpReport;

typedef struct ScpdpFault {
  // Index into the netlist's fault-site list.
  size_t site;
  uint8_t stuck;
} ScpdpFault;

// Campaign settings. Fault sizes run from `min_size` to `max_size`
// inclusive; `trials` patterns are spread evenly over them.
typedef struct ScpdpCampaignConfig {
  // 0: stuck-at-0, 1: stuck-at-1.
  uint32_t polarity;
  // 0: random, 1: burst.
  uint32_t mode;
  uint32_t min_size;
  uint32_t max_size;
  uint64_t trials;
  uint64_t seed;
  // Nonzero applies each pattern to every input vector.
  uint8_t exhaustive_inputs;
  // 0 uses all cores.
  uint32_t workers;
} ScpdpCampaignConfig;

typedef struct ScpdpStratum {
  uint32_t polarity;
  // 0: random, 1: burst, 2: exhaustive single fault.
  uint32_t mode;
  uint32_t fault_size;
  uint64_t trials;
  uint64_t masked;
  uint64_t detected;
  uint64_t sdc;
} ScpdpStratum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static storage.
const char *scpdp_version(void);

// Message for the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *scpdp_last_error(void);

// # Safety
// `s` must come from this library or be null.
void scpdp_string_free(char *s);

// Parse netlist text (NUL-terminated) and compile it.
//
// # Safety
// `text` must be a valid C string; `out` must be writable.
enum ScpdpStatus scpdp_netlist_parse(const char *text, struct ScpdpNetlist **out);

// The built-in composite-field AES S-box.
//
// # Safety
// `out` must be writable.
enum ScpdpStatus scpdp_netlist_sbox(struct ScpdpNetlist **out);

// # Safety
// `n` must come from this library or be null, and not be used afterwards.
void scpdp_netlist_free(struct ScpdpNetlist *n);

// Primary inputs, primary outputs, dual-rail gates and fault sites. Any
// output pointer may be null.
//
// # Safety
// `n` must be a live handle; non-null outputs must be writable.
enum ScpdpStatus scpdp_netlist_counts(const struct ScpdpNetlist *n,
                                      size_t *inputs,
                                      size_t *outputs,
                                      size_t *gates,
                                      size_t *sites);

// Name of fault site `index`; free the string with `scpdp_string_free`.
//
// # Safety
// `n` must be a live handle; `out` must be writable.
enum ScpdpStatus scpdp_netlist_site_name(const struct ScpdpNetlist *n, size_t index, char **out);

// Evaluate one input vector. `inputs` holds one byte (0 or 1) per primary
// input; `rails` receives `hi, lo` for each output, so it must hold twice
// the output count.
//
// # Safety
// Array pointers must be valid for the given lengths.
enum ScpdpStatus scpdp_netlist_simulate(const struct ScpdpNetlist *n,
                                        const uint8_t *inputs,
                                        size_t n_inputs,
                                        const struct ScpdpFault *faults,
                                        size_t n_faults,
                                        uint8_t *rails,
                                        size_t rails_len);

// One gate on rail values. `kind` is 0 and, 1 or, 2 xor. `fault_site` is a
// local site index 0..16 or -1 for none.
//
// # Safety
// `out_hi` and `out_lo` must be writable.
enum ScpdpStatus scpdp_eval_gate(uint32_t kind,
                                 uint8_t a_hi,
                                 uint8_t a_lo,
                                 uint8_t b_hi,
                                 uint8_t b_lo,
                                 int32_t fault_site,
                                 uint8_t stuck,
                                 uint8_t *out_hi,
                                 uint8_t *out_lo);

// # Safety
// `n` must be a live handle, `cfg` readable and `out` writable.
enum ScpdpStatus scpdp_campaign_run(const struct ScpdpNetlist *n,
                                    const struct ScpdpCampaignConfig *cfg,
                                    struct ScpdpReport **out);

// Every site at both polarities on every input vector (or on
// `vector_budget` seeded vectors for wide netlists).
//
// # Safety
// `n` must be a live handle and `out` writable.
enum ScpdpStatus scpdp_single_fault_run(const struct ScpdpNetlist *n,
                                        uint64_t vector_budget,
                                        uint64_t seed,
                                        uint32_t workers,
                                        struct ScpdpReport **out);

// # Safety
// `r` must come from this library or be null, and not be used afterwards.
void scpdp_report_free(struct ScpdpReport *r);

// Number of strata, 0 for a null handle.
//
// # Safety
// `r` must be a live handle or null.
size_t scpdp_report_strata_count(const struct ScpdpReport *r);

// # Safety
// `r` must be a live handle and `out` writable.
enum ScpdpStatus scpdp_report_stratum(const struct ScpdpReport *r,
                                      size_t index,
                                      struct ScpdpStratum *out);

// Aggregate fault coverage in [0, 1], or -1 for a null handle.
//
// # Safety
// `r` must be a live handle or null.
double scpdp_report_fc(const struct ScpdpReport *r);

// Summary CSV; free with `scpdp_string_free`.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum ScpdpStatus scpdp_report_csv(const struct ScpdpReport *r, char **out);

// JSON report; free with `scpdp_string_free`.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum ScpdpStatus scpdp_report_json(const struct ScpdpReport *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCPDP_H */
