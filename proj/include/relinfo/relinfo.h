/*
 * relinfo C API.
 *
 * Every function returns a relinfo_status; on failure a message describing
 * the error is available from relinfo_last_error() on the calling thread
 * until the next failing call. Objects behind opaque handles are created by
 * *_create / *_read / *_parse functions and released with the matching
 * *_destroy function, which accepts NULL.
 *
 * Lod scores are natural-log likelihood ratios.
 */
#ifndef RELINFO_RELINFO_H
#define RELINFO_RELINFO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RELINFO_API __declspec(dllexport)
#else
#define RELINFO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum relinfo_status {
  RELINFO_OK = 0,
  /* input validation */
  RELINFO_ERR_INVALID_ARGUMENT = 1,
  RELINFO_ERR_PARSE = 2,
  RELINFO_ERR_IO = 3,
  /* numerical / estimation */
  RELINFO_ERR_DOMAIN = 10,
  RELINFO_ERR_BOUNDARY = 11,
  RELINFO_ERR_UNDEFINED_MEASURE = 12,
  RELINFO_ERR_INSTABILITY = 13,
  RELINFO_ERR_UNSUPPORTED = 14,
  RELINFO_ERR_ORACLE_UNAVAILABLE = 15,
  RELINFO_ERR_ESTIMATION_FAILURE = 16,
  RELINFO_ERR_DEGENERATE_DATA = 17,
  RELINFO_ERR_SEPARATION = 18,
  RELINFO_ERR_RANK_DEFICIENT = 19,
  RELINFO_ERR_DATA_INTEGRITY = 20,
  RELINFO_ERR_BUFFER_TOO_SMALL = 30,
  RELINFO_ERR_INTERNAL = 99
} relinfo_status;

RELINFO_API const char* relinfo_version(void);
RELINFO_API const char* relinfo_generator_id(void);
RELINFO_API const char* relinfo_last_error(void);
RELINFO_API const char* relinfo_status_name(relinfo_status status);
/* Nonzero for the input-validation statuses (1..9). */
RELINFO_API int relinfo_status_is_validation(relinfo_status status);

/* ---- Monte Carlo configuration ---------------------------------------- */

typedef struct relinfo_mc_config {
  uint64_t n_draws;
  uint64_t seed;
  uint32_t worker_hint;    /* 0 = hardware concurrency */
  double max_relative_se;  /* <= 0 disables adaptive stopping */
} relinfo_mc_config;

RELINFO_API void relinfo_mc_config_default(relinfo_mc_config* config);

typedef enum relinfo_method {
  RELINFO_METHOD_CLOSED_FORM = 0,
  RELINFO_METHOD_SUFFICIENT_STAT_IMPUTATION = 1,
  RELINFO_METHOD_MONTE_CARLO = 2
} relinfo_method;

RELINFO_API const char* relinfo_method_name(relinfo_method method);

/* result flags */
#define RELINFO_FLAG_NULL_IMPUTATION_ORIENTATION 0x1u
#define RELINFO_FLAG_DELTA_METHOD_SE 0x2u
#define RELINFO_FLAG_CENSORED_RANK_RESAMPLING 0x4u

typedef struct relinfo_result {
  double estimate;
  double mc_standard_error;
  double numerator;   /* observed-data lod */
  double denominator; /* expected complete-data lod (or lod variance) */
  uint64_t n_draws;
  uint64_t seed;
  uint64_t sentinel_count;
  relinfo_method method;
  uint32_t flags;
} relinfo_result;

typedef struct relinfo_estimate {
  double mean;
  double standard_error;
  uint64_t n_effective;
  uint64_t sentinel_count;
} relinfo_estimate;

/* ---- Binomial model ------------------------------------------------------ */

typedef struct relinfo_binomial {
  uint64_t successes;
  uint64_t n_observed;
  uint64_t n_missing;
} relinfo_binomial;

typedef enum relinfo_route {
  RELINFO_ROUTE_AUTOMATIC = 0,
  RELINFO_ROUTE_IMPUTATION = 1,
  RELINFO_ROUTE_MONTE_CARLO = 2
} relinfo_route;

RELINFO_API relinfo_status relinfo_binomial_lod(const relinfo_binomial* data, double p_alt, double p_null,
                                                double* lod);
RELINFO_API relinfo_status relinfo_binomial_mle(const relinfo_binomial* data, double* mle);
RELINFO_API relinfo_status relinfo_binomial_ri1_closed_form(const relinfo_binomial* data, double* ri1);
/* RI1 with the alternative at the observed MLE. config may be NULL for the imputation route. */
RELINFO_API relinfo_status relinfo_binomial_ri1(const relinfo_binomial* data, double p_null, relinfo_route route,
                                                const relinfo_mc_config* config, relinfo_result* result);
/* RI1 at a fixed pair, expectation at the observed MLE. */
RELINFO_API relinfo_status relinfo_binomial_ri1_fixed_pair(const relinfo_binomial* data, double p_alt, double p_null,
                                                           relinfo_route route, const relinfo_mc_config* config,
                                                           relinfo_result* result);
/* RI1 with the expectation computed by exact enumeration (n_missing <= cap). */
RELINFO_API relinfo_status relinfo_binomial_ri1_enumerated(const relinfo_binomial* data, double p_null,
                                                           uint64_t cap, double* ri1);
RELINFO_API relinfo_status relinfo_binomial_ri0(const relinfo_binomial* data, double p_null, relinfo_result* result);

/* Writes config->n_draws samples of RIy into samples (capacity in elements).
 * Sentinel (+inf) samples are counted in *sentinel_count. */
RELINFO_API relinfo_status relinfo_binomial_ri_y_samples(const relinfo_binomial* data, double p_alt, double p_null,
                                                         const relinfo_mc_config* config, double* samples,
                                                         size_t capacity, uint64_t* sentinel_count);
/* Mean of 1/RIy (non-sentinel samples) and the sample standard deviation of RIy. */
RELINFO_API relinfo_status relinfo_ri_y_summary(const double* samples, size_t n, relinfo_estimate* reciprocal_mean,
                                                double* spread);

RELINFO_API relinfo_status relinfo_binomial_lod_ratio_variance(const relinfo_binomial* data, double p_null,
                                                               const relinfo_mc_config* config,
                                                               relinfo_result* result);

typedef struct relinfo_lod_gap {
  relinfo_estimate at_complete_mle;
  relinfo_estimate at_observed_mle;
  relinfo_estimate gap;
  uint64_t dominance_violations;
  double observed_lod;
} relinfo_lod_gap;

RELINFO_API relinfo_status relinfo_binomial_expected_lod_gap(const relinfo_binomial* data, double p_null,
                                                             const relinfo_mc_config* config, relinfo_lod_gap* gap);

/* ---- Survival data and Cox model ------------------------------------------- */

typedef struct relinfo_survival relinfo_survival;

/* time,status,<covariates...> CSV; parse errors name file, line and column. */
RELINFO_API relinfo_status relinfo_survival_read_csv(const char* path, relinfo_survival** out);
/* covariates is row-major n x dim; status 1 = event, 0 = censored. */
RELINFO_API relinfo_status relinfo_survival_create(size_t n, size_t dim, const double* times, const int* status,
                                                   const double* covariates, relinfo_survival** out);
RELINFO_API void relinfo_survival_destroy(relinfo_survival* data);
RELINFO_API size_t relinfo_survival_size(const relinfo_survival* data);
RELINFO_API size_t relinfo_survival_dim(const relinfo_survival* data);
RELINFO_API size_t relinfo_survival_events(const relinfo_survival* data);
/* Name of covariate column j, or NULL when out of range. */
RELINFO_API const char* relinfo_survival_covariate_name(const relinfo_survival* data, size_t j);

typedef enum relinfo_ties { RELINFO_TIES_BRESLOW = 0, RELINFO_TIES_JITTER = 1 } relinfo_ties;

/* beta and se have dim elements each. */
RELINFO_API relinfo_status relinfo_cox_fit(const relinfo_survival* data, relinfo_ties ties, double* beta, double* se,
                                           size_t dim, int* iterations);

typedef enum relinfo_conditioning {
  RELINFO_CONDITION_RANK_DATA = 0,    /* correct: condition on the partial data */
  RELINFO_CONDITION_CENSORED_DATA = 1 /* naive: condition on the censored data */
} relinfo_conditioning;

typedef struct relinfo_cox_options {
  relinfo_conditioning conditioning;
  size_t n_new;
  const double* new_covariates; /* row-major new_covariate_rows x dim, or NULL */
  size_t new_covariate_rows;    /* 0 = reuse existing covariate rows cyclically */
  const double* beta_null;      /* dim elements, or NULL for zero */
  double new_censoring_rate;    /* 0 = new subjects uncensored */
  double tail_rate;             /* <= 0 = derived from the last baseline segment */
  double baseline_scale;        /* 0 or 1 = estimated baseline as is */
  relinfo_ties ties;
} relinfo_cox_options;

RELINFO_API void relinfo_cox_options_default(relinfo_cox_options* options);
RELINFO_API relinfo_status relinfo_cox_ri1(const relinfo_survival* data, const relinfo_cox_options* options,
                                           const relinfo_mc_config* config, relinfo_result* result);

RELINFO_API relinfo_status relinfo_ri_w_wald(double observed_stat, double observed_var, double complete_stat_mean,
                                             double complete_stat_var, double theta_null, double* ri_w);

/* ---- Paired naive/correct Cox simulation ----------------------------------- */

typedef struct relinfo_doss_config {
  size_t n_datasets;
  size_t n_subjects;
  double censoring_fraction;
  size_t n_new;
  double beta;          /* true coefficient of the binary covariate */
  double baseline_rate; /* exponential baseline hazard */
} relinfo_doss_config;

typedef struct relinfo_doss_row {
  uint64_t dataset_seed;
  double censored_fraction;
  relinfo_result naive;
  relinfo_result correct_uncensored;
} relinfo_doss_row;

typedef struct relinfo_doss_summary {
  size_t n_rows;
  size_t skipped;
  size_t naive_above_one;
  size_t correct_above_bound;
  double fraction_naive_above_one;
} relinfo_doss_summary;

typedef struct relinfo_doss_run relinfo_doss_run;

RELINFO_API void relinfo_doss_config_default(relinfo_doss_config* config);
RELINFO_API relinfo_status relinfo_doss_replication(const relinfo_doss_config* config,
                                                    const relinfo_mc_config* mc, relinfo_doss_run** out);
RELINFO_API void relinfo_doss_run_destroy(relinfo_doss_run* run);
RELINFO_API relinfo_status relinfo_doss_run_summary(const relinfo_doss_run* run, relinfo_doss_summary* summary);
RELINFO_API relinfo_status relinfo_doss_run_row(const relinfo_doss_run* run, size_t index, relinfo_doss_row* row);

/* ---- Combining independent studies ------------------------------------------ */

typedef struct relinfo_study {
  double lod_observed;
  double ri1;
} relinfo_study;

RELINFO_API relinfo_status relinfo_combine_weighted_harmonic(const relinfo_study* studies, size_t n, double* ri1);

/* Per-study lod and RI1 at one shared pair (p_null, p_alt; p_alt < 0 means the
 * pooled observed MLE), written to studies_out[n]; also the pooled RI1. */
RELINFO_API relinfo_status relinfo_binomial_study_summaries(const relinfo_binomial* studies, size_t n, double p_null,
                                                            double p_alt, relinfo_study* studies_out,
                                                            double* pooled_ri1, double* shared_alt);

/* ---- Design evaluation ------------------------------------------------------ */

typedef struct relinfo_design relinfo_design;

/* A path to an existing file (one point per line) or a design expression. */
RELINFO_API relinfo_status relinfo_design_load(const char* spec, relinfo_design** out);
RELINFO_API relinfo_status relinfo_design_from_points(const double* points, size_t n, relinfo_design** out);
RELINFO_API void relinfo_design_destroy(relinfo_design* design);
RELINFO_API size_t relinfo_design_size(const relinfo_design* design);
RELINFO_API relinfo_status relinfo_design_sx(const relinfo_design* design, int centered, double* sx);
/* Exact S_x as num/den when every point is an exact fraction; *exact set to 0 otherwise. */
RELINFO_API relinfo_status relinfo_design_sx_exact(const relinfo_design* design, int centered, int64_t* num,
                                                   int64_t* den, int* exact);
RELINFO_API relinfo_status relinfo_design_variance_ratio(const relinfo_design* a, const relinfo_design* b,
                                                         int centered, double* ratio);

#ifdef __cplusplus
}
#endif

#endif /* RELINFO_RELINFO_H */
