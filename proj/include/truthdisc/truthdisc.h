#ifndef TRUTHDISC_H
#define TRUTHDISC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TD_API __declspec(dllexport)
#else
#define TD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum td_status {
  TD_OK = 0,
  TD_ERR_INVALID_ARGUMENT = 1,
  TD_ERR_IO = 2,
  TD_ERR_PARSE = 3,
  TD_ERR_DUPLICATE = 4,
  TD_ERR_UNKNOWN_ATTRIBUTE = 5,
  TD_ERR_UNKNOWN_METHOD = 6,
  TD_ERR_UNDEFINED = 7,
  TD_ERR_INFEASIBLE = 8,
  TD_ERR_INTERNAL = 9
} td_status;

typedef struct td_config td_config;
typedef struct td_dataset td_dataset;
typedef struct td_result td_result;
typedef struct td_request td_request;

TD_API const char* td_version(void);
TD_API const char* td_status_name(td_status status);
/* Message of the last failed call on this thread; "" when none. */
TD_API const char* td_last_error(void);

/* Config: defaults < file < environment < td_config_set. */
TD_API td_status td_config_create(td_config** out);
TD_API void td_config_destroy(td_config* config);
TD_API td_status td_config_load(td_config* config, const char* path);
TD_API td_status td_config_apply_env(td_config* config);
TD_API td_status td_config_set(td_config* config, const char* key, const char* value);
/* Copies the value with its terminator into buf when it fits; *needed gets
   the full size including the terminator. */
TD_API td_status td_config_get(const td_config* config, const char* key, char* buf, size_t cap, size_t* needed);
TD_API td_status td_config_save(const td_config* config, const char* path);
TD_API size_t td_config_key_count(void);
TD_API const char* td_config_key(size_t index);

/* Claims plus an optional gold standard (gold_path may be NULL). */
TD_API td_status td_dataset_load(const td_config* config, const char* schema_path, const char* claims_path,
                                 const char* gold_path, td_dataset** out);
TD_API void td_dataset_destroy(td_dataset* dataset);
TD_API size_t td_dataset_num_claims(const td_dataset* dataset);
TD_API size_t td_dataset_num_sources(const td_dataset* dataset);
TD_API size_t td_dataset_num_items(const td_dataset* dataset);
TD_API size_t td_dataset_gold_size(const td_dataset* dataset);
TD_API td_status td_dataset_precision_of_dominant(const td_dataset* dataset, double* out);

/* One fusion run. trust_path and copiers_path may be NULL. */
TD_API td_status td_fuse(const td_config* config, const td_dataset* dataset, const char* method,
                         const char* trust_path, const char* copiers_path, td_result** out);
TD_API void td_result_destroy(td_result* result);
TD_API size_t td_result_rounds(const td_result* result);
TD_API int td_result_converged(const td_result* result);
TD_API size_t td_result_ties(const td_result* result);
TD_API double td_result_wall_time_ms(const td_result* result);
TD_API size_t td_result_num_selections(const td_result* result);
/* Selected value of the i-th item as text; valid until the result is destroyed. */
TD_API td_status td_result_selection(const td_result* result, size_t index, const char** object,
                                     const char** attribute, const char** value, double* vote);
TD_API td_status td_result_precision_recall(const td_result* result, double* precision, double* recall);
TD_API td_status td_result_write_selection(const td_result* result, const char* path);
TD_API td_status td_result_write_trust(const td_result* result, const char* path);
TD_API td_status td_result_write_convergence(const td_result* result, const char* path);

/* Subcommand pipelines. A request copies the config at creation time. */
TD_API td_status td_request_create(const td_config* config, td_request** out);
TD_API void td_request_destroy(td_request* request);
/* Keys: schema, claims, gold, snapshots, trust, copiers, groups, spec, out,
   seed, sampled (0/1), method (appends; repeatable), trusted (appends). */
TD_API td_status td_request_set(td_request* request, const char* key, const char* value);
/* command: generate, profile, fuse, copydetect, evaluate, compare. */
TD_API td_status td_run(const td_request* request, const char* command);

TD_API size_t td_method_count(void);
TD_API const char* td_method_name(size_t index);

#ifdef __cplusplus
}
#endif

#endif
