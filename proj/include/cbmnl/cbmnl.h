// Copyright 2026 The cbmnl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CBMNL_CBMNL_H_
#define CBMNL_CBMNL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CBMNL_BUILDING_LIBRARY)
#define CBMNL_API __declspec(dllexport)
#else
#define CBMNL_API __declspec(dllimport)
#endif
#else
#define CBMNL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cbmnl_status {
  CBMNL_OK = 0,
  CBMNL_ERR_INVALID_ARGUMENT = 1,  /* null pointer or malformed input */
  CBMNL_ERR_DIMENSION = 2,
  CBMNL_ERR_INDEX = 3,
  CBMNL_ERR_CONFIG = 4,
  CBMNL_ERR_AGGREGATION = 5,
  CBMNL_ERR_IO = 6,
  CBMNL_ERR_CHECK_FAILED = 7,      /* a check suite ran and reported violations */
  CBMNL_ERR_INTERNAL = 99
} cbmnl_status;

typedef struct cbmnl_instance cbmnl_instance;
typedef struct cbmnl_experiment cbmnl_experiment;
typedef struct cbmnl_runlog cbmnl_runlog;

CBMNL_API const char* cbmnl_version(void);
CBMNL_API const char* cbmnl_status_string(cbmnl_status status);
/* Message of the last failed call on this thread; "" if none. */
CBMNL_API const char* cbmnl_last_error(void);
/* Frees strings returned through char** out-parameters. */
CBMNL_API void cbmnl_string_free(char* s);

/* MNL primitives. contexts is row-major k x d. Outputs must hold k entries. */
CBMNL_API cbmnl_status cbmnl_choice_probabilities(const double* contexts, size_t k, size_t d,
                                                  const double* theta, double* item_probs,
                                                  double* no_purchase_prob);
/* prices may be NULL (all ones). */
CBMNL_API cbmnl_status cbmnl_expected_revenue(const double* contexts, const double* prices, size_t k,
                                              size_t d, const double* theta, double* revenue);
CBMNL_API cbmnl_status cbmnl_diag_derivative(const double* contexts, size_t k, size_t d,
                                             const double* theta, size_t position, double* value);
CBMNL_API cbmnl_status cbmnl_diag_second_derivative(const double* contexts, size_t k, size_t d,
                                                    const double* theta, size_t position, double* value);
CBMNL_API cbmnl_status cbmnl_gamma_radius(double delta, double lambda, double S, double L_const, size_t d,
                                          size_t K, size_t t, double* gamma);

/* Instances. context_mode is "fixed_pool" or "fresh_iid". */
CBMNL_API cbmnl_status cbmnl_instance_create(size_t d, size_t N, size_t K, double S, double S_true,
                                             const char* context_mode, uint64_t seed,
                                             cbmnl_instance** out);
CBMNL_API cbmnl_status cbmnl_instance_from_json(const char* json, cbmnl_instance** out);
CBMNL_API cbmnl_status cbmnl_instance_to_json(const cbmnl_instance* inst, char** json);
CBMNL_API cbmnl_status cbmnl_instance_kappa(const cbmnl_instance* inst, size_t grid_size, double* kappa);
CBMNL_API void cbmnl_instance_free(cbmnl_instance* inst);

/* Experiments. */
CBMNL_API cbmnl_status cbmnl_experiment_default(cbmnl_experiment** out);
CBMNL_API cbmnl_status cbmnl_experiment_from_json(const char* json, cbmnl_experiment** out);
CBMNL_API cbmnl_status cbmnl_experiment_to_json(const cbmnl_experiment* exp, char** json);
CBMNL_API cbmnl_status cbmnl_experiment_set_policy(cbmnl_experiment* exp, const char* policy);
CBMNL_API cbmnl_status cbmnl_experiment_set_T(cbmnl_experiment* exp, size_t T);
CBMNL_API cbmnl_status cbmnl_experiment_set_delta(cbmnl_experiment* exp, double delta);
/* "a..b" or a comma-separated list. */
CBMNL_API cbmnl_status cbmnl_experiment_set_seeds(cbmnl_experiment* exp, const char* seeds);
CBMNL_API cbmnl_status cbmnl_experiment_set_output_dir(cbmnl_experiment* exp, const char* dir);
/* The instance a run with this experiment and seed would use. */
CBMNL_API cbmnl_status cbmnl_experiment_instance(const cbmnl_experiment* exp, uint64_t seed,
                                                 cbmnl_instance** out);
CBMNL_API void cbmnl_experiment_free(cbmnl_experiment* exp);

CBMNL_API cbmnl_status cbmnl_run(const cbmnl_experiment* exp, uint64_t seed, cbmnl_runlog** out);
/* Runs every configured seed on up to `jobs` threads and writes
   run_<seed>.csv / run_<seed>.json into the experiment's output directory.
   summary_json (optional) receives the aggregate of all runs. */
CBMNL_API cbmnl_status cbmnl_run_batch(const cbmnl_experiment* exp, size_t jobs, char** summary_json);

CBMNL_API cbmnl_status cbmnl_runlog_csv(const cbmnl_runlog* log, char** csv);
CBMNL_API cbmnl_status cbmnl_runlog_metadata(const cbmnl_runlog* log, char** json);
CBMNL_API cbmnl_status cbmnl_runlog_write(const cbmnl_runlog* log, const char* directory);
CBMNL_API cbmnl_status cbmnl_runlog_total_regret(const cbmnl_runlog* log, double* total);
CBMNL_API cbmnl_status cbmnl_runlog_rounds(const cbmnl_runlog* log, size_t* rounds);
/* JSON report of the elliptical potential and determinant-trace checks. */
CBMNL_API cbmnl_status cbmnl_runlog_potential_check(const cbmnl_runlog* log, double L_const, char** json,
                                                    int* holds);
CBMNL_API void cbmnl_runlog_free(cbmnl_runlog* log);

/* Aggregates every run_<seed>.csv / .json pair found in a directory. */
CBMNL_API cbmnl_status cbmnl_summarize_dir(const char* directory, char** summary_json);

/* Runs a named check suite and returns its JSON report. Returns
   CBMNL_ERR_CHECK_FAILED (with the report still filled) when any check fails. */
CBMNL_API cbmnl_status cbmnl_check(const char* suite, uint64_t seed, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* CBMNL_CBMNL_H_ */
