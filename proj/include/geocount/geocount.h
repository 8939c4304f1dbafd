/*
 * geocount C API.
 *
 * Every object is an opaque handle created by a gc_*_create/read/fit call and
 * released by the matching gc_*_free. Functions that can fail return a
 * gc_status; on failure gc_last_error() describes the problem (thread-local,
 * valid until the next failing call on the same thread). Strings returned
 * through char** out-parameters are heap-allocated and must be released
 * with gc_string_free.
 */
#ifndef GEOCOUNT_GEOCOUNT_H_
#define GEOCOUNT_GEOCOUNT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GEOCOUNT_API __declspec(dllexport)
#else
#define GEOCOUNT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gc_status {
  GC_OK = 0,
  GC_INVALID_ARGUMENT = 1,
  GC_DIMENSION_MISMATCH = 2,
  GC_UNKNOWN_COVARIATE = 3,
  GC_DUPLICATE_COVARIATE = 4,
  GC_CONSTANT_COLUMN = 5,
  GC_EMPTY_SELECTION = 6,
  GC_MISSING_COLUMN = 7,
  GC_NON_NUMERIC_CELL = 8,
  GC_NEGATIVE_COUNT = 9,
  GC_ZERO_DENOMINATOR = 10,
  GC_DUPLICATE_ID = 11,
  GC_INVALID_COORDINATE = 12,
  GC_NAME_COLLISION = 13,
  GC_DOMAIN_ERROR = 14,
  GC_NON_FINITE_OBJECTIVE = 15,
  GC_RANK_DEFICIENT_DESIGN = 16,
  GC_SEPARATION_SUSPECTED = 17,
  GC_SINGULAR_INFORMATION = 18,
  GC_ZERO_STANDARD_ERROR = 19,
  GC_DEGENERATE_GEOMETRY = 20,
  GC_K_TOO_LARGE = 21,
  GC_INVALID_SPEC = 22,
  GC_DEGENERATE_DATA = 23,
  GC_IO = 24,
  GC_PARSE = 25,
  GC_INTERNAL = 26
} gc_status;

typedef enum gc_family { GC_FAMILY_LOGIT = 0, GC_FAMILY_POISSON = 1, GC_FAMILY_ZIP = 2 } gc_family;

typedef enum gc_format {
  GC_FORMAT_TEXT = 0,
  GC_FORMAT_CSV = 1,
  GC_FORMAT_JSON = 2,
  GC_FORMAT_GEOJSON = 3
} gc_format;

typedef enum gc_weights_kind { GC_WEIGHTS_DISTANCE_BAND = 0, GC_WEIGHTS_K_NEAREST = 1 } gc_weights_kind;

typedef struct gc_dataset gc_dataset;
typedef struct gc_fit gc_fit;
typedef struct gc_hotspot gc_hotspot;

/* CamelCase identifier of a status, e.g. "UnknownCovariate". */
GEOCOUNT_API const char* gc_status_name(gc_status status);
GEOCOUNT_API const char* gc_last_error(void);
GEOCOUNT_API void gc_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct gc_rate_spec {
  const char* raw_column;
  const char* derived_name;
} gc_rate_spec;

typedef struct gc_ratio_spec {
  const char* numerator_column;
  const char* denominator_column;
  const char* derived_name;
} gc_ratio_spec;

typedef struct gc_ingest_config {
  const char* id_column;
  const char* lat_column;
  const char* lon_column;
  const char* count_column;
  const char* population_column; /* may be NULL */
  const gc_rate_spec* rate_specs;
  size_t n_rate_specs;
  const gc_ratio_spec* ratio_specs;
  size_t n_ratio_specs;
  int standardize;
} gc_ingest_config;

/* Defaults: columns id, lat, lon, count; no derivations; no standardization. */
GEOCOUNT_API void gc_ingest_config_init(gc_ingest_config* config);

GEOCOUNT_API gc_status gc_dataset_read_csv(const char* path, const gc_ingest_config* config, gc_dataset** out);
GEOCOUNT_API gc_status gc_dataset_write_csv(const gc_dataset* dataset, const char* path);
GEOCOUNT_API size_t gc_dataset_size(const gc_dataset* dataset);
GEOCOUNT_API void gc_dataset_free(gc_dataset* dataset);

typedef struct gc_summary {
  size_t n;
  double zero_share;
  double mean_count;
} gc_summary;

GEOCOUNT_API gc_status gc_dataset_summary(const gc_dataset* dataset, gc_summary* out);
/* "n=...\nzero_share=...\nmean_count=...\n" */
GEOCOUNT_API gc_status gc_summary_render(const gc_summary* summary, char** out);

/* ---- model fitting ----------------------------------------------------- */

typedef struct gc_model_spec {
  gc_family family;
  const char* const* count_covariates;
  size_t n_count_covariates;
  /* ZIP only. When has_inflation_covariates is 0 the count covariates are reused. */
  const char* const* inflation_covariates;
  size_t n_inflation_covariates;
  int has_inflation_covariates;
  int add_intercept;
} gc_model_spec;

typedef struct gc_optim_options {
  int max_iterations;
  double gradient_tolerance;
  int step_halving_max;
  double ridge_floor;
} gc_optim_options;

typedef struct gc_coefficient {
  const char* name; /* owned by the fit handle */
  double estimate;
  double std_error;
  double z_stat;
  double p_value;
  const char* stars; /* owned by the fit handle */
} gc_coefficient;

GEOCOUNT_API void gc_model_spec_init(gc_model_spec* spec);
GEOCOUNT_API void gc_optim_options_init(gc_optim_options* options);

/* options may be NULL for defaults. A non-converged fit is returned with
 * GC_OK; query gc_fit_converged. */
GEOCOUNT_API gc_status gc_fit_model(const gc_dataset* dataset, const gc_model_spec* spec,
                                    const gc_optim_options* options, gc_fit** out);
GEOCOUNT_API gc_status gc_fit_from_json(const char* json, gc_fit** out);
GEOCOUNT_API int gc_fit_converged(const gc_fit* fit);
GEOCOUNT_API int gc_fit_iterations(const gc_fit* fit);
GEOCOUNT_API double gc_fit_log_likelihood(const gc_fit* fit);
GEOCOUNT_API size_t gc_fit_num_coefficients(const gc_fit* fit);
GEOCOUNT_API gc_status gc_fit_coefficient(const gc_fit* fit, size_t index, gc_coefficient* out);
/* text, csv or json */
GEOCOUNT_API gc_status gc_fit_render(const gc_fit* fit, gc_format format, char** out);
GEOCOUNT_API void gc_fit_free(gc_fit* fit);

/* ---- hot spots --------------------------------------------------------- */

typedef struct gc_weights_scheme {
  gc_weights_kind kind;
  double band_km;
  int k;
  int include_self;
} gc_weights_scheme;

/* "band:KM" or "knn:K"; include_self is set. */
GEOCOUNT_API gc_status gc_weights_parse(const char* text, gc_weights_scheme* out);

/* value_column is "count" or a covariate name; NULL means "count". */
GEOCOUNT_API gc_status gc_hotspot_compute(const gc_dataset* dataset, const char* value_column,
                                          const gc_weights_scheme* scheme, gc_hotspot** out);
GEOCOUNT_API size_t gc_hotspot_size(const gc_hotspot* hotspot);
GEOCOUNT_API double gc_hotspot_z(const gc_hotspot* hotspot, size_t index);
/* "Hot99", "Hot95", "NotSignificant", "Cold95" or "Cold99"; NULL if out of range. */
GEOCOUNT_API const char* gc_hotspot_class(const gc_hotspot* hotspot, size_t index);
/* csv or geojson */
GEOCOUNT_API gc_status gc_hotspot_render(const gc_hotspot* hotspot, gc_format format, char** out);
GEOCOUNT_API void gc_hotspot_free(gc_hotspot* hotspot);

/* ---- simulation -------------------------------------------------------- */

/* seed_override may be NULL to keep the seed stored in the spec. */
GEOCOUNT_API gc_status gc_simulate(const char* spec_json, const uint64_t* seed_override, gc_dataset** out);
/* Writes the JSON spec of a named preset ("paper-scale"). */
GEOCOUNT_API gc_status gc_preset_spec(const char* name, uint64_t seed, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* GEOCOUNT_GEOCOUNT_H_ */
