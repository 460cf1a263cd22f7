#ifndef MARS_H
#define MARS_H

/* C interface to the MARS memory-subsystem simulator. All functions are
 * synchronous and thread-compatible: distinct threads may use distinct
 * handles freely; one handle must not be used from two threads at once.
 * Functions returning mars_status leave outputs untouched on failure and
 * store a message retrievable with mars_last_error() (per thread). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mars_status {
  MARS_OK = 0,
  MARS_ERR_CONFIG = 1,  /* invalid configuration or parameter value */
  MARS_ERR_IO = 2,      /* file missing, unreadable or malformed */
  MARS_ERR_USAGE = 3,   /* API misuse, e.g. a required argument is NULL */
  MARS_ERR_RUNTIME = 4  /* simulation failure */
} mars_status;

typedef struct mars_config mars_config;
typedef struct mars_run_record mars_run_record;

const char* mars_version(void);
/* Short class name for a status: "ok", "config", "io", "usage", "runtime". */
const char* mars_status_name(mars_status status);
/* Message from the most recent failing call on this thread; never NULL. */
const char* mars_last_error(void);
/* Frees any string a mars_* function returned through a char** out. */
void mars_string_free(char* s);

mars_status mars_config_default(mars_config** out);
mars_status mars_config_load_file(const char* path, mars_config** out);
mars_status mars_config_load_string(const char* text, mars_config** out);
/* Digest of the resolved configuration; two configs with equal digests run
 * the identical experiment. Caller frees with mars_string_free. */
mars_status mars_config_digest(const mars_config* cfg, char** out);
void mars_config_free(mars_config* cfg);

/* Simulates baseline and MARS on the same generated stream. A non-empty
 * output_root persists the run under <output_root>/<name>_<digest prefix>;
 * NULL or "" keeps it in memory. write_traces != 0 also writes request and
 * command traces. */
mars_status mars_run_experiment(const mars_config* cfg, const char* output_root,
                                int write_traces, mars_run_record** out);

/* Re-runs with one parameter varied over a comma-separated value list.
 * param: leaves, request_q, pending_queue_depth, sets_ways ("SxW"),
 * drain_cap or seed. On success *out_records holds *out_count records;
 * release with mars_run_record_list_free. */
mars_status mars_sweep_experiment(const mars_config* cfg, const char* param,
                                  const char* values_csv, const char* output_root,
                                  int write_traces, mars_run_record*** out_records,
                                  size_t* out_count);

/* Returned strings stay owned by the record and live until it is freed. */
const char* mars_run_summary(const mars_run_record* rec);
const char* mars_run_dir(const mars_run_record* rec); /* "" for in-memory runs */
const char* mars_run_record_json(const mars_run_record* rec);
void mars_run_record_free(mars_run_record* rec);
void mars_run_record_list_free(mars_run_record** records, size_t count);

/* Mean locality of a request trace file for each window, as CSV text
 * "window,mean_locality". page_offset_bits 0 selects the default 4KB pages.
 * Caller frees *out_csv with mars_string_free. */
mars_status mars_trace_locality(const char* trace_path, const uint64_t* windows,
                                size_t window_count, uint32_t page_offset_bits, char** out_csv);

/* Regenerates summary.txt and the figure files inside an existing run
 * directory. Caller frees *out_summary with mars_string_free. */
mars_status mars_report(const char* run_dir, char** out_summary);

#ifdef __cplusplus
}
#endif

#endif /* MARS_H */
