/*
 * twinforge C API.
 *
 * Opaque handles plus status codes. Every function returns TF_OK on
 * success; on failure the thread-local message from tf_last_error()
 * describes the problem. Strings returned through char** out-parameters
 * are heap-allocated and must be released with tf_free_string().
 */
#ifndef TWINFORGE_H
#define TWINFORGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) || defined(__CYGWIN__)
#  ifdef TWINFORGE_BUILDING
#    define TF_API __declspec(dllexport)
#  else
#    define TF_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) || defined(__clang__)
#  define TF_API __attribute__((visibility("default")))
#else
#  define TF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
    TF_OK = 0,
    TF_ERR_INVALID_ARGUMENT,
    TF_ERR_INVALID_ID,
    TF_ERR_DUPLICATE_ASSET_ID,
    TF_ERR_INVALID_TRANSITION,
    TF_ERR_TWIN_NOT_BOUND,
    TF_ERR_INVALID_ASSET_ID,
    TF_ERR_MALFORMED_LINE,
    TF_ERR_FILE_NOT_FOUND,
    TF_ERR_INVALID_SPEC,
    TF_ERR_UNKNOWN_ASSET,
    TF_ERR_OVERLAPPING_SEGMENT,
    TF_ERR_UNKNOWN_REPLICA_VERSION,
    TF_ERR_EMPTY_SERIES,
    TF_ERR_ALL_MISSING,
    TF_ERR_WINDOW_TOO_LARGE,
    TF_ERR_AXIS_LENGTH_MISMATCH,
    TF_ERR_SERIES_TOO_SHORT,
    TF_ERR_SERIES_TOO_LONG,
    TF_ERR_K_EXCEEDS_N,
    TF_ERR_EMPTY_INPUT,
    TF_ERR_DIMENSION_MISMATCH,
    TF_ERR_TOO_FEW_POINTS,
    TF_ERR_LENGTH_MISMATCH,
    TF_ERR_EMPTY_GRID,
    TF_ERR_NO_RESULTS,
    TF_ERR_MIXED_VERSIONS,
    TF_ERR_NO_DATA,
    TF_ERR_IO,
    TF_ERR_REPLICA,  /* a stage failed inside a replica; message names the version */
    TF_ERR_INTERNAL
} tf_status;

typedef enum tf_channel { TF_ACCEL_X = 0, TF_ACCEL_Y, TF_ACCEL_Z, TF_PLC_STATE } tf_channel;
typedef enum tf_quality { TF_QUALITY_GOOD = 0, TF_QUALITY_SUSPECT, TF_QUALITY_MISSING } tf_quality;

typedef enum tf_phase {
    TF_PHASE_UNBOUND = 0,
    TF_PHASE_BOUND,
    TF_PHASE_SYNCHRONIZED,
    TF_PHASE_OUT_OF_SYNC,
    TF_PHASE_DONE,
    TF_PHASE_STOPPED
} tf_phase;

typedef enum tf_lifecycle_event {
    TF_EVENT_BIND = 0,
    TF_EVENT_SYNC_ESTABLISHED,
    TF_EVENT_SYNC_LOST,
    TF_EVENT_SYNC_RECOVERED,
    TF_EVENT_WORK_COMPLETE,
    TF_EVENT_STOP,
    TF_EVENT_FAULT
} tf_lifecycle_event;

typedef struct tf_sample {
    const char* asset_id;
    tf_channel channel;
    int64_t ts; /* ns since epoch */
    double value;
    tf_quality quality;
} tf_sample;

typedef struct tf_runtime tf_runtime;
typedef struct tf_twin tf_twin; /* borrowed; owned by its tf_runtime */
typedef struct tf_archive tf_archive;

TF_API const char* tf_version(void);
TF_API const char* tf_last_error(void);
TF_API const char* tf_status_name(tf_status status);
TF_API void tf_free_string(char* s);
/* TWINFORGE_THREADS when set to a positive integer, else hardware threads. */
TF_API size_t tf_threads_from_env(void);

/* ---- physical interface ------------------------------------------------ */
TF_API tf_status tf_topic_for(const char* asset_id, tf_channel channel, char** out_topic);
TF_API tf_status tf_encode_sample(const tf_sample* sample, char** out_line);
/* out->asset_id points into *out_asset, which the caller frees. */
TF_API tf_status tf_decode_sample(const char* line, tf_sample* out, char** out_asset);

/* ---- twin core --------------------------------------------------------- */
TF_API tf_status tf_runtime_create(tf_runtime** out);
TF_API void tf_runtime_destroy(tf_runtime* runtime);
/* relationships_json: NULL or an object of name -> target twin id. */
TF_API tf_status tf_twin_create(tf_runtime* runtime, const char* asset_id, const char* relationships_json,
                                tf_twin** out);
TF_API tf_status tf_twin_find(tf_runtime* runtime, const char* asset_id, tf_twin** out);
TF_API tf_status tf_twin_phase(const tf_twin* twin, tf_phase* out);
TF_API tf_status tf_twin_apply_event(tf_twin* twin, tf_lifecycle_event event, tf_phase* out_phase);
/* out_stale / out_events may be NULL. */
TF_API tf_status tf_twin_shadow(tf_twin* twin, const tf_sample* sample, int* out_stale, size_t* out_events);
/* *out_has_event is 1 and *out_event set when the twin should degrade. */
TF_API tf_status tf_twin_check_freshness(const tf_twin* twin, int64_t now_ns, int64_t timeout_ns, int* out_has_event,
                                         tf_lifecycle_event* out_event);
TF_API tf_status tf_twin_snapshot_json(const tf_twin* twin, char** out_json);
TF_API tf_status tf_compute_oee(double uptime_s, double downtime_s, double actual_rate, double ideal_rate,
                                double quality_factor, double* out);

/* ---- data layer -------------------------------------------------------- */
TF_API tf_status tf_archive_create(tf_archive** out);
TF_API void tf_archive_destroy(tf_archive* archive);
/* tags_json: NULL or an object of string -> string. */
TF_API tf_status tf_archive_append(tf_archive* archive, const tf_sample* sample, const char* tags_json,
                                   uint64_t* out_seq);
TF_API tf_status tf_archive_load_trace(tf_archive* archive, const char* trace_path, size_t* out_count);
TF_API tf_status tf_archive_size(const tf_archive* archive, size_t* out);
/* Matching samples in (ts, seq) order, one encoded trace line each.
 * channel_mask: bit i selects tf_channel i; 0 selects all. */
TF_API tf_status tf_archive_query(const tf_archive* archive, const char* asset_id, unsigned channel_mask,
                                  int64_t t_start, int64_t t_end, char** out_lines);
TF_API tf_status tf_archive_histogram_json(const tf_archive* archive, const char* replica_version, int64_t t_start,
                                           int64_t t_end, char** out_json);

/* ---- orchestrator ------------------------------------------------------ */
/* grid_json: NULL for the default grid. Outputs may be NULL. */
TF_API tf_status tf_zeroconf_run(tf_archive* archive, const char* machine, int64_t t_start, int64_t t_end,
                                 const char* grid_json, double rarity_threshold, size_t threads,
                                 char** out_report_json, char** out_timeline_csv, char** out_anomalies_json);

/* ---- commands ---------------------------------------------------------- */
/* spec_path NULL: default scenario from seed and duration. */
TF_API tf_status tf_simulate(const char* spec_path, uint64_t seed, double duration_s, const char* out_dir,
                             size_t* out_sample_count);
/* machine / grid_json may be NULL. *out_summary_json (optional) describes the run. */
TF_API tf_status tf_run(const char* trace_path, const char* machine, const char* out_dir, const char* grid_json,
                        double rarity_threshold, size_t threads, char** out_summary_json);
TF_API tf_status tf_report_format(const char* report_path, char** out_text);
TF_API tf_status tf_bench(const char* trace_path, uint64_t min_samples, size_t threads, uint64_t* out_samples,
                          double* out_rate);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TWINFORGE_H */
