/* C interface to the zerovit scoring library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Functions return a zv_status; on failure a
 * message for the calling thread is available from zv_last_error() until
 * the next call on that thread. Strings returned through char** outputs are
 * heap-allocated and must be released with zv_string_free().
 */
#ifndef ZEROVIT_ZEROVIT_H_
#define ZEROVIT_ZEROVIT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(ZEROVIT_BUILDING_LIBRARY)
#define ZV_API __attribute__((visibility("default")))
#else
#define ZV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes where the CLI defines one. */
typedef enum zv_status {
  ZV_OK = 0,
  ZV_ERR_INTERNAL = 1,
  ZV_ERR_USAGE = 2,
  ZV_ERR_CONFIG = 3,        /* invalid architecture, space or task */
  ZV_ERR_NUMERIC = 4,       /* non-finite values, divergence, no convergence */
  ZV_ERR_INFEASIBLE = 5,    /* parameter constraint unsatisfiable */
  ZV_ERR_IO = 6,
  ZV_ERR_MALFORMED_JSON = 7,
  ZV_ERR_MISSING_FIELD = 8,
  ZV_ERR_SHAPE = 9
} zv_status;

typedef enum zv_seed_policy {
  ZV_SEED_FIXED = 0,       /* every config uses the given seed */
  ZV_SEED_CONFIG_HASH = 1  /* seed derived from (seed, config hash) */
} zv_seed_policy;

typedef struct zv_config zv_config;
typedef struct zv_space zv_space;
typedef struct zv_config_list zv_config_list;
typedef struct zv_report_list zv_report_list;
typedef struct zv_bench zv_bench;
typedef struct zv_tau_report zv_tau_report;

ZV_API const char* zv_version(void);
ZV_API const char* zv_last_error(void);
ZV_API const char* zv_status_name(zv_status status);
ZV_API void zv_string_free(char* s);

/* Stream seed for a named purpose ("sampling", "init", "task", ...). */
ZV_API uint64_t zv_derive_seed(uint64_t seed, const char* purpose);
/* ZEROVIT_JOBS if set, else the hardware concurrency. */
ZV_API size_t zv_default_jobs(void);

/* ---- architectures ---- */
ZV_API zv_status zv_config_decode(const char* json, zv_config** out);
ZV_API zv_status zv_config_encode(const zv_config* config, char** out);
ZV_API zv_status zv_config_hash(const zv_config* config, uint64_t* out);
ZV_API zv_status zv_config_param_count(const zv_config* config, uint64_t* out);
ZV_API void zv_config_free(zv_config* config);

/* ---- search spaces ---- */
ZV_API zv_status zv_space_decode(const char* json, zv_space** out);
ZV_API zv_status zv_space_tiny_desk(zv_space** out);
ZV_API zv_status zv_space_encode(const zv_space* space, char** out);
ZV_API zv_status zv_space_set_param_range(zv_space* space, uint64_t min_params, uint64_t max_params);
ZV_API zv_status zv_space_has_param_range(const zv_space* space, int* out);
ZV_API zv_status zv_space_combination_count(const zv_space* space, uint64_t* out);
ZV_API zv_status zv_space_sample(const zv_space* space, uint64_t seed, zv_config** out);
/* On ZV_ERR_INFEASIBLE, *nearest_miss (if non-null) receives the closest count seen. */
ZV_API zv_status zv_space_sample_constrained(const zv_space* space, uint64_t seed, uint64_t max_tries,
                                             zv_config** out, uint64_t* nearest_miss);
/* n draws: constrained when the space has a param range, plain otherwise.
 * Draw i uses a stream derived from (seed, i). */
ZV_API zv_status zv_space_sample_many(const zv_space* space, size_t n, uint64_t seed, uint64_t max_tries,
                                      zv_config_list** out, uint64_t* nearest_miss);
ZV_API zv_status zv_space_enumerate(const zv_space* space, zv_config_list** out);
ZV_API void zv_space_free(zv_space* space);

ZV_API size_t zv_config_list_size(const zv_config_list* list);
ZV_API zv_status zv_config_list_get(const zv_config_list* list, size_t index, zv_config** out);
ZV_API zv_status zv_config_list_from_config(const zv_config* config, zv_config_list** out);
ZV_API void zv_config_list_free(zv_config_list* list);

/* ---- scoring ---- */
ZV_API int zv_proxy_known(const char* proxy);
/* Scores every config; report i belongs to config i for any job count. */
ZV_API zv_status zv_score_list(const zv_config_list* configs, const char* proxy, zv_seed_policy policy,
                               uint64_t seed, size_t jobs, zv_report_list** out);
ZV_API size_t zv_report_list_size(const zv_report_list* reports);
ZV_API zv_status zv_report_list_score(const zv_report_list* reports, size_t index, double* out);
ZV_API zv_status zv_report_list_hash(const zv_report_list* reports, size_t index, uint64_t* out);
/* One JSONL record, without trailing newline. */
ZV_API zv_status zv_report_list_json(const zv_report_list* reports, size_t index, char** out);
/* Writes up to k indices of the best reports (score desc, hash asc) into
 * out_indices and their number into *out_count. */
ZV_API zv_status zv_report_list_rank(const zv_report_list* reports, size_t k, size_t* out_indices,
                                     size_t* out_count);
ZV_API void zv_report_list_free(zv_report_list* reports);

/* ---- benchmarks and evaluation ---- */
/* Toy task with default settings; data drawn from data_seed. */
ZV_API zv_status zv_bench_build(const zv_space* space, size_t n, size_t budget, uint64_t seed,
                                uint64_t data_seed, size_t jobs, zv_bench** out);
ZV_API zv_status zv_bench_decode(const char* jsonl, zv_bench** out);
ZV_API zv_status zv_bench_encode(const zv_bench* bench, char** out);
ZV_API size_t zv_bench_size(const zv_bench* bench);
ZV_API void zv_bench_free(zv_bench* bench);

ZV_API zv_status zv_kendall_tau(const double* xs, const double* ys, size_t n, double* out);
/* strict != 0 aborts on the first scoring error; otherwise failing entries are skipped. */
ZV_API zv_status zv_evaluate(const zv_bench* bench, const char* proxy, zv_seed_policy policy, uint64_t seed,
                             size_t jobs, int strict, zv_tau_report** out);
ZV_API zv_status zv_tau_report_tau(const zv_tau_report* report, double* out);
ZV_API zv_status zv_tau_report_n(const zv_tau_report* report, size_t* out);
ZV_API zv_status zv_tau_report_json(const zv_tau_report* report, char** out);
ZV_API zv_status zv_tau_report_scatter_csv(const zv_tau_report* report, char** out);
/* Plain-text table over several reports. */
ZV_API zv_status zv_tau_report_table(const zv_tau_report* const* reports, size_t count, char** out);
ZV_API void zv_tau_report_free(zv_tau_report* report);

#ifdef __cplusplus
}
#endif

#endif /* ZEROVIT_ZEROVIT_H_ */
