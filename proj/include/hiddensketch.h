#ifndef HIDDENSKETCH_H
#define HIDDENSKETCH_H

/* C interface to the Hidden Sketch library.
 *
 * All functions return hs_status; every out parameter is written only on
 * HS_OK. hs_last_error() returns the message of the most recent failure on
 * the calling thread. Handles are created and destroyed by this library
 * only; destroy functions accept NULL.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hs_status {
    HS_OK = 0,
    HS_ERR_ARGUMENT = 1,     /* NULL handle or out pointer */
    HS_ERR_CONFIG = 2,       /* bad parameter, config file, or call sequence */
    HS_ERR_IO = 3,           /* unreadable, unwritable, or corrupt file */
    HS_ERR_OVERFLOW = 4,     /* a counter hit its ceiling */
    HS_ERR_EXPLOSION = 5,    /* key recovery exceeded the candidate cap */
    HS_ERR_INCONSISTENT = 6, /* sketch state contradicts the recorded stream */
    HS_ERR_NUMERICAL = 7,    /* dense solve produced an unverifiable solution */
    HS_ERR_BUDGET = 8,       /* a solver exceeded its size or node budget */
    HS_ERR_INTERNAL = 9
} hs_status;

const char* hs_status_name(hs_status status);
const char* hs_last_error(void);
const char* hs_version(void);

typedef struct hs_tracker hs_tracker;   /* two-stage streaming tracker */
typedef struct hs_snapshot hs_snapshot; /* one closed window's sketches */
typedef struct hs_report hs_report;     /* decoded window */
typedef struct hs_changes hs_changes;   /* heavy changers between two windows */

/* --- tracker lifecycle ---------------------------------------------------
 * config_path points at a key-value config file ([tree], [rbf], [cm],
 * [coldfilter], [tracker], [decoder], [seeds] sections); NULL uses the
 * built-in defaults. Windows do not overlap: open, process, close, repeat.
 */
hs_status hs_tracker_create(const char* config_path, hs_tracker** out);
hs_status hs_tracker_create_from_text(const char* config_text, hs_tracker** out);
void hs_tracker_destroy(hs_tracker* tracker);

hs_status hs_tracker_open_window(hs_tracker* tracker);
hs_status hs_tracker_process(hs_tracker* tracker, uint64_t key, uint64_t weight);
hs_status hs_tracker_close_window(hs_tracker* tracker, hs_snapshot** out);
hs_status hs_tracker_memory_bits(const hs_tracker* tracker, uint64_t* out);

/* --- window snapshots ---------------------------------------------------- */
void hs_snapshot_destroy(hs_snapshot* snapshot);
hs_status hs_snapshot_save(const hs_snapshot* snapshot, const char* path);
hs_status hs_snapshot_load(const char* path, hs_snapshot** out);
hs_status hs_snapshot_window_id(const hs_snapshot* snapshot, uint64_t* out);
hs_status hs_snapshot_total_items(const hs_snapshot* snapshot, uint64_t* out);
hs_status hs_snapshot_over_capacity(const hs_snapshot* snapshot, int* out);

/* --- decoding ------------------------------------------------------------
 * Decodes the snapshot offline. Keys whose reported frequency reaches
 * `threshold` form the heavy-hitter list (threshold 0 lists every decoded
 * key). config_path may override [decoder] settings; NULL uses defaults.
 */
typedef enum hs_decode_status {
    HS_DECODE_FULL = 0,
    HS_DECODE_PARTIAL = 1,
    HS_DECODE_FAILED = 2
} hs_decode_status;

hs_status hs_report_create(const hs_snapshot* snapshot, uint64_t threshold,
                           const char* config_path, hs_report** out);
void hs_report_destroy(hs_report* report);
hs_status hs_report_decode_status(const hs_report* report, int* out);
hs_status hs_report_count(const hs_report* report, size_t* out);
hs_status hs_report_entry(const hs_report* report, size_t index, uint64_t* key,
                          uint64_t* frequency);
/* Reported frequency of any decoded key; *found is 0 when absent. */
hs_status hs_report_lookup(const hs_report* report, uint64_t key,
                           uint64_t* frequency, int* found);

/* Signed frequency changes (window 2 minus window 1) with magnitude above
 * delta. Both reports must come from Full or Partial decodes. */
hs_status hs_changes_create(const hs_report* report1, const hs_snapshot* snapshot1,
                            const hs_report* report2, const hs_snapshot* snapshot2,
                            uint64_t delta, hs_changes** out);
void hs_changes_destroy(hs_changes* changes);
hs_status hs_changes_count(const hs_changes* changes, size_t* out);
hs_status hs_changes_entry(const hs_changes* changes, size_t index, uint64_t* key,
                           int64_t* change);

/* --- file-level harness --------------------------------------------------
 * Trace files hold one record per line, `<key>[,<weight>]`, key as dotted
 * IPv4 or 0x-prefixed hex, `#` comments.
 */

/* Seeded synthetic Zipf trace, written to `path`. */
hs_status hs_generate_trace(const char* path, uint64_t n_items, uint64_t n_keys,
                            double skew, uint64_t seed);

/* Full experiment from a config file; writes metrics.csv, diagnostics.json
 * (and window snapshots when the config enables them) under out_dir. */
hs_status hs_run_experiment(const char* config_path, const char* out_dir);

/* Decode success-rate study; modes_csv picks stages from "pure,svd,ilp".
 * Writes a buckets,mode,success_rate CSV. */
hs_status hs_success_rate(const char* out_csv_path, uint64_t n_keys,
                          const uint64_t* bucket_counts, size_t n_bucket_counts,
                          uint32_t trials, const char* modes_csv, uint64_t seed);

/* Precision/recall/F1/ARE of a reported key,count file against a ground
 * truth trace at the given absolute threshold. Out pointers may be NULL. */
hs_status hs_eval_files(const char* reported_path, const char* truth_path,
                        uint64_t threshold, double* precision, double* recall,
                        double* f1, double* are);

#ifdef __cplusplus
}
#endif

#endif /* HIDDENSKETCH_H */
