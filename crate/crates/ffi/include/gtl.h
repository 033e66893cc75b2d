/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GTL_H
#define GTL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum GtlStatus {
  GTL_STATUS_OK = 0,
  GTL_STATUS_NULL_POINTER = 1,
  GTL_STATUS_INVALID_STRING = 2,
  GTL_STATUS_CONFIG = 3,
  GTL_STATUS_FORMAT = 4,
  GTL_STATUS_IO = 5,
  GTL_STATUS_DIMENSION = 6,
  GTL_STATUS_NUMERIC = 7,
  GTL_STATUS_ROUTING = 8,
  GTL_STATUS_PROTOCOL = 9,
  GTL_STATUS_UNDEFINED_METRIC = 10,
  GTL_STATUS_NOT_FOUND = 11,
  GTL_STATUS_PANIC = 12,
} GtlStatus;

// Experiment configuration.
typedef struct GtlConfig GtlConfig;

// Results of a finished experiment.
typedef struct GtlReport GtlReport;

// Closed-form traffic for one parameter point, in coefficients.
typedef struct GtlOverhead {
  // Base models sent all-to-all.
  double gtl_step1;
  // GreedyTL models sent all-to-all.
  double gtl_step3;
  double gtl_total;
  double nohtl_mu;
  double nohtl_mv;
  // `2ks²d0`, valid when `d1 ≤ d0`.
  double bound;
  // Uploading every training record to a central site.
  double cloud;
  double gain_gtl;
  double gain_nohtl_mu;
  // Traffic of one dynamic phase with the permanent device.
  double dynamic_gtl;
} GtlOverhead;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gtl_version(void);

// Message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next call on the same thread.
const char *gtl_last_error(void);

// Releases a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void gtl_string_free(char *s);

// Evaluates the overhead formulas for `s` locations, `k` classes, base
// and GreedyTL payload sizes `d0`, `d1`, and a cloud upload of `n`
// records of `dc` values.
//
// # Safety
// `out` must point to writable memory for one `GtlOverhead`.
enum GtlStatus gtl_overhead_predict(size_t s,
                                    size_t k,
                                    double d0,
                                    double d1,
                                    size_t n,
                                    double dc,
                                    struct GtlOverhead *out);

// Parses a TOML experiment description and validates it.
//
// # Safety
// `toml` must be a NUL-terminated string; `out` must be writable.
enum GtlStatus gtl_config_from_toml(const char *toml, struct GtlConfig **out);

// Loads a built-in preset by name. Dataset directories can be redirected
// with the usual environment variables.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum GtlStatus gtl_config_preset(const char *name, struct GtlConfig **out);

// Overrides the base seed and the number of runs (0 keeps the current
// value), then revalidates.
//
// # Safety
// `config` must be a live handle.
enum GtlStatus gtl_config_set_runs(struct GtlConfig *config, uint64_t base_seed, size_t runs);

// The configuration serialized as TOML.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum GtlStatus gtl_config_to_toml(const struct GtlConfig *config, char **out);

// # Safety
// `config` must be NULL or a handle that has not been freed.
void gtl_config_free(struct GtlConfig *config);

// Runs every repetition of the experiment.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum GtlStatus gtl_experiment_run(const struct GtlConfig *config, struct GtlReport **out);

// Mean over runs of `metric` (for example `f_measure` or `ppg`) for one
// scenario (`clean` or `malicious`) and step (`gtl_mean`, `nohtl_mu`, ...).
// Returns `NotFound` when the report has no such values.
//
// # Safety
// `report` must be a live handle, the names NUL-terminated strings and
// `mean` writable.
enum GtlStatus gtl_report_metric(const struct GtlReport *report,
                                 const char *scenario,
                                 const char *step,
                                 const char *metric,
                                 double *mean);

// Metered coefficients and bytes of one procedure (`gtl`, `nohtl_mu`,
// `cloud`, ...) in the clean scenario, summed over runs and phases.
//
// # Safety
// `report` must be a live handle, `procedure` a NUL-terminated string and
// both outputs writable.
enum GtlStatus gtl_report_traffic(const struct GtlReport *report,
                                  const char *procedure,
                                  uint64_t *coefficients,
                                  uint64_t *bytes);

// Sample payloads carried by protocol buses (the cloud baseline excluded).
// Always zero for a correct run.
//
// # Safety
// `report` must be a live handle.
enum GtlStatus gtl_report_sample_messages(const struct GtlReport *report, size_t *count);

// The Markdown overhead and quality tables.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum GtlStatus gtl_report_tables(const struct GtlReport *report, char **out);

// Writes every report file into `dir`, creating it if needed.
//
// # Safety
// `report` must be a live handle and `dir` a NUL-terminated string.
enum GtlStatus gtl_report_write(const struct GtlReport *report, const char *dir);

// # Safety
// `report` must be NULL or a handle that has not been freed.
void gtl_report_free(struct GtlReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GTL_H */
