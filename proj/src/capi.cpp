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

#include "cbmnl/cbmnl.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbmnl/checks.hpp"
#include "cbmnl/harness.hpp"

struct cbmnl_instance {
  cbmnl::Instance value;
};

struct cbmnl_experiment {
  cbmnl::ExperimentConfig value;
};

struct cbmnl_runlog {
  cbmnl::RunLog value;
  cbmnl::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

cbmnl_status fail(cbmnl_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Maps library exceptions to status codes.
template <class F>
cbmnl_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const cbmnl::DimensionError& e) {
    return fail(CBMNL_ERR_DIMENSION, e.what());
  } catch (const cbmnl::IndexError& e) {
    return fail(CBMNL_ERR_INDEX, e.what());
  } catch (const cbmnl::ConfigError& e) {
    return fail(CBMNL_ERR_CONFIG, e.what());
  } catch (const cbmnl::AggregationError& e) {
    return fail(CBMNL_ERR_AGGREGATION, e.what());
  } catch (const cbmnl::IoError& e) {
    return fail(CBMNL_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CBMNL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CBMNL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CBMNL_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cbmnl::Assortment make_assortment(const double* contexts, const double* prices, std::size_t k, std::size_t d) {
  if (d == 0) throw cbmnl::DimensionError("dimension must be positive");
  cbmnl::Assortment a;
  a.contexts.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  a.prices = cbmnl::Vector::Ones(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    a.items.push_back(i);
    for (std::size_t j = 0; j < d; ++j) {
      a.contexts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = contexts[i * d + j];
    }
    if (prices != nullptr) a.prices[static_cast<Eigen::Index>(i)] = prices[i];
  }
  return a;
}

cbmnl::Vector make_vector(const double* values, std::size_t n) {
  return Eigen::Map<const cbmnl::Vector>(values, static_cast<Eigen::Index>(n));
}

#define CBMNL_REQUIRE(cond)                                                   \
  do {                                                                        \
    if (!(cond)) return fail(CBMNL_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* cbmnl_version(void) {
  static const std::string version(cbmnl::library_version());
  return version.c_str();
}

const char* cbmnl_status_string(cbmnl_status status) {
  switch (status) {
    case CBMNL_OK: return "ok";
    case CBMNL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CBMNL_ERR_DIMENSION: return "dimension error";
    case CBMNL_ERR_INDEX: return "index error";
    case CBMNL_ERR_CONFIG: return "config error";
    case CBMNL_ERR_AGGREGATION: return "aggregation error";
    case CBMNL_ERR_IO: return "io error";
    case CBMNL_ERR_CHECK_FAILED: return "check failed";
    case CBMNL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cbmnl_last_error(void) { return last_error.c_str(); }

void cbmnl_string_free(char* s) { std::free(s); }

cbmnl_status cbmnl_choice_probabilities(const double* contexts, size_t k, size_t d, const double* theta,
                                        double* item_probs, double* no_purchase_prob) {
  CBMNL_REQUIRE((contexts != nullptr || k == 0) && theta != nullptr && no_purchase_prob != nullptr);
  CBMNL_REQUIRE(item_probs != nullptr || k == 0);
  return guarded([&] {
    const cbmnl::ChoiceDistribution p =
        cbmnl::choice_probabilities(make_assortment(contexts, nullptr, k, d), make_vector(theta, d));
    for (std::size_t i = 0; i < k; ++i) item_probs[i] = p.item_probs[static_cast<Eigen::Index>(i)];
    *no_purchase_prob = p.no_purchase_prob;
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_expected_revenue(const double* contexts, const double* prices, size_t k, size_t d,
                                    const double* theta, double* revenue) {
  CBMNL_REQUIRE((contexts != nullptr || k == 0) && theta != nullptr && revenue != nullptr);
  return guarded([&] {
    *revenue = cbmnl::expected_revenue(make_assortment(contexts, prices, k, d), make_vector(theta, d));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_diag_derivative(const double* contexts, size_t k, size_t d, const double* theta,
                                   size_t position, double* value) {
  CBMNL_REQUIRE((contexts != nullptr || k == 0) && theta != nullptr && value != nullptr);
  return guarded([&] {
    *value = cbmnl::diag_derivative(make_assortment(contexts, nullptr, k, d), make_vector(theta, d), position);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_diag_second_derivative(const double* contexts, size_t k, size_t d, const double* theta,
                                          size_t position, double* value) {
  CBMNL_REQUIRE((contexts != nullptr || k == 0) && theta != nullptr && value != nullptr);
  return guarded([&] {
    *value = cbmnl::diag_second_derivative(make_assortment(contexts, nullptr, k, d), make_vector(theta, d),
                                           position);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_gamma_radius(double delta, double lambda, double S, double L_const, size_t d, size_t K,
                                size_t t, double* gamma) {
  CBMNL_REQUIRE(gamma != nullptr);
  return guarded([&] {
    cbmnl::ConfidenceConfig cfg;
    cfg.delta = delta;
    cfg.lambda = lambda;
    cfg.S = S;
    cfg.L_const = L_const;
    cfg.d = d;
    cfg.K = K;
    cfg.validate();
    *gamma = cbmnl::gamma_radius(cfg, t);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_instance_create(size_t d, size_t N, size_t K, double S, double S_true,
                                   const char* context_mode, uint64_t seed, cbmnl_instance** out) {
  CBMNL_REQUIRE(out != nullptr);
  return guarded([&] {
    cbmnl::InstanceConfig cfg;
    cfg.d = d;
    cfg.N = N;
    cfg.K = K;
    cfg.S = S;
    cfg.S_true = S_true;
    if (context_mode != nullptr) cfg.context_mode = cbmnl::parse_context_mode(context_mode);
    *out = new cbmnl_instance{cbmnl::make_instance(cfg, seed)};
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_instance_from_json(const char* json, cbmnl_instance** out) {
  CBMNL_REQUIRE(json != nullptr && out != nullptr);
  return guarded([&] {
    *out = new cbmnl_instance{cbmnl::instance_from_json(json)};
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_instance_to_json(const cbmnl_instance* inst, char** json) {
  CBMNL_REQUIRE(inst != nullptr && json != nullptr);
  return guarded([&] {
    *json = copy_string(cbmnl::instance_to_json(inst->value));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_instance_kappa(const cbmnl_instance* inst, size_t grid_size, double* kappa) {
  CBMNL_REQUIRE(inst != nullptr && kappa != nullptr);
  return guarded([&] {
    *kappa = cbmnl::estimate_kappa(inst->value, grid_size).value;
    return CBMNL_OK;
  });
}

void cbmnl_instance_free(cbmnl_instance* inst) { delete inst; }

cbmnl_status cbmnl_experiment_default(cbmnl_experiment** out) {
  CBMNL_REQUIRE(out != nullptr);
  return guarded([&] {
    *out = new cbmnl_experiment{};
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_from_json(const char* json, cbmnl_experiment** out) {
  CBMNL_REQUIRE(json != nullptr && out != nullptr);
  return guarded([&] {
    *out = new cbmnl_experiment{cbmnl::experiment_from_json(json)};
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_to_json(const cbmnl_experiment* exp, char** json) {
  CBMNL_REQUIRE(exp != nullptr && json != nullptr);
  return guarded([&] {
    *json = copy_string(cbmnl::experiment_to_json(exp->value));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_set_policy(cbmnl_experiment* exp, const char* policy) {
  CBMNL_REQUIRE(exp != nullptr && policy != nullptr);
  return guarded([&] {
    exp->value.policy = cbmnl::parse_policy_kind(policy);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_set_T(cbmnl_experiment* exp, size_t T) {
  CBMNL_REQUIRE(exp != nullptr);
  return guarded([&] {
    cbmnl::ExperimentConfig next = exp->value;
    next.T = T;
    next.validate();
    exp->value = std::move(next);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_set_delta(cbmnl_experiment* exp, double delta) {
  CBMNL_REQUIRE(exp != nullptr);
  return guarded([&] {
    cbmnl::ExperimentConfig next = exp->value;
    next.delta = delta;
    next.validate();
    exp->value = std::move(next);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_set_seeds(cbmnl_experiment* exp, const char* seeds) {
  CBMNL_REQUIRE(exp != nullptr && seeds != nullptr);
  return guarded([&] {
    exp->value.seeds = cbmnl::parse_seed_range(seeds);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_set_output_dir(cbmnl_experiment* exp, const char* dir) {
  CBMNL_REQUIRE(exp != nullptr && dir != nullptr);
  return guarded([&] {
    exp->value.output_dir = dir;
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_experiment_instance(const cbmnl_experiment* exp, uint64_t seed, cbmnl_instance** out) {
  CBMNL_REQUIRE(exp != nullptr && out != nullptr);
  return guarded([&] {
    *out = new cbmnl_instance{cbmnl::make_instance(exp->value.instance, seed)};
    return CBMNL_OK;
  });
}

void cbmnl_experiment_free(cbmnl_experiment* exp) { delete exp; }

cbmnl_status cbmnl_run(const cbmnl_experiment* exp, uint64_t seed, cbmnl_runlog** out) {
  CBMNL_REQUIRE(exp != nullptr && out != nullptr);
  return guarded([&] {
    *out = new cbmnl_runlog{cbmnl::run_experiment(exp->value, seed), exp->value};
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_run_batch(const cbmnl_experiment* exp, size_t jobs, char** summary_json) {
  CBMNL_REQUIRE(exp != nullptr);
  return guarded([&] {
    const std::vector<cbmnl::RunLog> logs = cbmnl::run_seeds(exp->value, jobs);
    for (const cbmnl::RunLog& log : logs) cbmnl::write_run_files(log, exp->value.output_dir);
    if (summary_json != nullptr) *summary_json = copy_string(cbmnl::summary_to_json(cbmnl::summarize_runs(logs)));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_runlog_csv(const cbmnl_runlog* log, char** csv) {
  CBMNL_REQUIRE(log != nullptr && csv != nullptr);
  return guarded([&] {
    *csv = copy_string(cbmnl::to_csv(log->value));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_runlog_metadata(const cbmnl_runlog* log, char** json) {
  CBMNL_REQUIRE(log != nullptr && json != nullptr);
  return guarded([&] {
    *json = copy_string(cbmnl::run_metadata_json(log->value));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_runlog_write(const cbmnl_runlog* log, const char* directory) {
  CBMNL_REQUIRE(log != nullptr && directory != nullptr);
  return guarded([&] {
    cbmnl::write_run_files(log->value, directory);
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_runlog_total_regret(const cbmnl_runlog* log, double* total) {
  CBMNL_REQUIRE(log != nullptr && total != nullptr);
  *total = log->value.total_regret;
  return CBMNL_OK;
}

cbmnl_status cbmnl_runlog_rounds(const cbmnl_runlog* log, size_t* rounds) {
  CBMNL_REQUIRE(log != nullptr && rounds != nullptr);
  *rounds = log->value.rounds.size();
  return CBMNL_OK;
}

cbmnl_status cbmnl_runlog_potential_check(const cbmnl_runlog* log, double L_const, char** json, int* holds) {
  CBMNL_REQUIRE(log != nullptr);
  return guarded([&] {
    const cbmnl::PotentialReport r = cbmnl::elliptical_potential_check(log->value, log->value.history, L_const);
    if (holds != nullptr) *holds = r.holds() ? 1 : 0;
    if (json != nullptr) {
      nlohmann::ordered_json j;
      j["potential_J"] = r.potential_J;
      j["potential_J_bound"] = r.potential_J_bound;
      j["potential_V"] = r.potential_V;
      j["potential_V_bound"] = r.potential_V_bound;
      j["log_det_V"] = r.log_det_V;
      j["log_det_V_bound"] = r.log_det_V_bound;
      j["log_det_J"] = r.log_det_J;
      j["log_det_J_bound"] = r.log_det_J_bound;
      j["potential_holds"] = r.potential_holds;
      j["determinant_holds"] = r.determinant_holds;
      *json = copy_string(j.dump(2));
    }
    return CBMNL_OK;
  });
}

void cbmnl_runlog_free(cbmnl_runlog* log) { delete log; }

cbmnl_status cbmnl_summarize_dir(const char* directory, char** summary_json) {
  CBMNL_REQUIRE(directory != nullptr && summary_json != nullptr);
  return guarded([&] {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(directory, ec)) throw cbmnl::IoError(std::string("not a directory: ") + directory);
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(directory)) {
      const fs::path p = entry.path();
      if (p.extension() == ".csv" && p.filename().string().rfind("run_", 0) == 0) csvs.push_back(p);
    }
    std::sort(csvs.begin(), csvs.end());
    std::vector<cbmnl::RunLog> logs;
    for (const fs::path& csv : csvs) {
      fs::path meta = csv;
      meta.replace_extension(".json");
      logs.push_back(cbmnl::load_run(csv.string(), meta.string()));
    }
    *summary_json = copy_string(cbmnl::summary_to_json(cbmnl::summarize_runs(logs)));
    return CBMNL_OK;
  });
}

cbmnl_status cbmnl_check(const char* suite, uint64_t seed, char** report_json) {
  CBMNL_REQUIRE(suite != nullptr);
  return guarded([&] {
    const std::vector<cbmnl::CheckResult> results = cbmnl::run_check_suite(suite, seed);
    if (report_json != nullptr) *report_json = copy_string(cbmnl::check_report_json(results));
    for (const cbmnl::CheckResult& r : results) {
      if (!r.passed) return fail(CBMNL_ERR_CHECK_FAILED, r.suite + "/" + r.name + " failed");
    }
    return CBMNL_OK;
  });
}

}  // extern "C"
