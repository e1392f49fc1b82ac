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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cbmnl/cbmnl.h"

namespace {

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  cbmnl_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version and status strings") {
  CHECK(std::string(cbmnl_version()) == "0.1.0");
  CHECK(std::string(cbmnl_status_string(CBMNL_OK)) == "ok");
  CHECK(std::string(cbmnl_status_string(CBMNL_ERR_DIMENSION)) == "dimension error");
  CHECK(std::string(cbmnl_status_string(static_cast<cbmnl_status>(1234))) == "unknown status");
}

TEST_CASE("math primitives") {
  const double contexts[] = {1.0, -1.0};
  const double theta[] = {1.0};
  double probs[2];
  double none = 0.0;
  REQUIRE(cbmnl_choice_probabilities(contexts, 2, 1, theta, probs, &none) == CBMNL_OK);
  const double z = 1.0 + std::exp(1.0) + std::exp(-1.0);
  CHECK(probs[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(none == doctest::Approx(1.0 / z).epsilon(1e-14));

  double rev = 0.0;
  const double prices[] = {2.0, 1.0};
  REQUIRE(cbmnl_expected_revenue(contexts, prices, 2, 1, theta, &rev) == CBMNL_OK);
  CHECK(rev == doctest::Approx((2.0 * std::exp(1.0) + std::exp(-1.0)) / z));
  REQUIRE(cbmnl_expected_revenue(contexts, nullptr, 2, 1, theta, &rev) == CBMNL_OK);
  CHECK(rev == doctest::Approx(1.0 - 1.0 / z));

  double v = 0.0;
  REQUIRE(cbmnl_diag_derivative(contexts, 2, 1, theta, 0, &v) == CBMNL_OK);
  CHECK(v == doctest::Approx(probs[0] * (1 - probs[0])));
  REQUIRE(cbmnl_diag_second_derivative(contexts, 2, 1, theta, 0, &v) == CBMNL_OK);
  CHECK(v == doctest::Approx(probs[0] * (1 - probs[0]) * (1 - 2 * probs[0])));
  CHECK(cbmnl_diag_derivative(contexts, 2, 1, theta, 2, &v) == CBMNL_ERR_INDEX);
  CHECK(std::string(cbmnl_last_error()).size() > 0);

  double g = 0.0;
  REQUIRE(cbmnl_gamma_radius(0.1, 1.0, 1.0, 0.25, 1, 1, 1, &g) == CBMNL_OK);
  CHECK(std::abs(g - 6.714608) < 1e-6);
  CHECK(cbmnl_gamma_radius(0.0, 1.0, 1.0, 0.25, 1, 1, 1, &g) == CBMNL_ERR_CONFIG);
}

TEST_CASE("argument validation") {
  double x = 0.0;
  CHECK(cbmnl_choice_probabilities(nullptr, 1, 1, &x, &x, &x) == CBMNL_ERR_INVALID_ARGUMENT);
  CHECK(cbmnl_instance_to_json(nullptr, nullptr) == CBMNL_ERR_INVALID_ARGUMENT);
  CHECK(cbmnl_run(nullptr, 1, nullptr) == CBMNL_ERR_INVALID_ARGUMENT);
  const double ctx[] = {1.0};
  CHECK(cbmnl_expected_revenue(ctx, nullptr, 1, 0, &x, &x) == CBMNL_ERR_DIMENSION);
  cbmnl_instance_free(nullptr);
  cbmnl_experiment_free(nullptr);
  cbmnl_runlog_free(nullptr);
  cbmnl_string_free(nullptr);
}

TEST_CASE("instances") {
  cbmnl_instance* inst = nullptr;
  REQUIRE(cbmnl_instance_create(2, 5, 2, 1.0, 1.0, "fixed_pool", 11, &inst) == CBMNL_OK);
  char* raw = nullptr;
  REQUIRE(cbmnl_instance_to_json(inst, &raw) == CBMNL_OK);
  const std::string json = take(raw);
  const auto j = nlohmann::json::parse(json);
  for (const char* key : {"d", "N", "K", "S", "S_true", "theta_star", "context_mode", "pool", "prices", "seed"}) {
    CHECK(j.contains(key));
  }
  double kappa = 0.0;
  REQUIRE(cbmnl_instance_kappa(inst, 64, &kappa) == CBMNL_OK);
  CHECK(kappa >= 4.0);

  cbmnl_instance* copy = nullptr;
  REQUIRE(cbmnl_instance_from_json(json.c_str(), &copy) == CBMNL_OK);
  REQUIRE(cbmnl_instance_to_json(copy, &raw) == CBMNL_OK);
  CHECK(take(raw) == json);
  cbmnl_instance_free(copy);
  cbmnl_instance_free(inst);

  CHECK(cbmnl_instance_create(2, 5, 6, 1.0, 1.0, "fixed_pool", 1, &inst) == CBMNL_ERR_CONFIG);
  CHECK(cbmnl_instance_create(2, 5, 2, 1.0, 1.0, "sideways", 1, &inst) == CBMNL_ERR_CONFIG);
  CHECK(cbmnl_instance_from_json("{", &inst) == CBMNL_ERR_CONFIG);
}

TEST_CASE("experiments and runs") {
  cbmnl_experiment* exp = nullptr;
  REQUIRE(cbmnl_experiment_from_json(R"({"instance": {"d": 2, "N": 4, "K": 2}, "T": 30, "restarts": 1})", &exp) ==
          CBMNL_OK);
  CHECK(cbmnl_experiment_set_policy(exp, "cb_mnl_c") == CBMNL_OK);
  CHECK(cbmnl_experiment_set_policy(exp, "nope") == CBMNL_ERR_CONFIG);
  CHECK(cbmnl_experiment_set_T(exp, 0) == CBMNL_ERR_CONFIG);
  CHECK(cbmnl_experiment_set_T(exp, 25) == CBMNL_OK);
  CHECK(cbmnl_experiment_set_delta(exp, 2.0) == CBMNL_ERR_CONFIG);
  CHECK(cbmnl_experiment_set_delta(exp, 0.2) == CBMNL_OK);
  CHECK(cbmnl_experiment_set_seeds(exp, "3..4") == CBMNL_OK);
  CHECK(cbmnl_experiment_set_seeds(exp, "x") == CBMNL_ERR_CONFIG);

  char* raw = nullptr;
  REQUIRE(cbmnl_experiment_to_json(exp, &raw) == CBMNL_OK);
  const auto cfg = nlohmann::json::parse(take(raw));
  CHECK(cfg.at("T") == 25);
  CHECK(cfg.at("policy") == "cb_mnl_c");
  CHECK(cfg.at("delta") == 0.2);

  cbmnl_runlog* a = nullptr;
  cbmnl_runlog* b = nullptr;
  REQUIRE(cbmnl_run(exp, 3, &a) == CBMNL_OK);
  REQUIRE(cbmnl_run(exp, 3, &b) == CBMNL_OK);
  size_t rounds = 0;
  CHECK(cbmnl_runlog_rounds(a, &rounds) == CBMNL_OK);
  CHECK(rounds == 25);
  char* csv_a = nullptr;
  char* csv_b = nullptr;
  REQUIRE(cbmnl_runlog_csv(a, &csv_a) == CBMNL_OK);
  REQUIRE(cbmnl_runlog_csv(b, &csv_b) == CBMNL_OK);
  CHECK(take(csv_a) == take(csv_b));

  REQUIRE(cbmnl_runlog_metadata(a, &raw) == CBMNL_OK);
  const auto meta = nlohmann::json::parse(take(raw));
  CHECK(meta.at("seed") == 3);
  CHECK(meta.at("version") == "0.1.0");
  double total = -1.0;
  CHECK(cbmnl_runlog_total_regret(a, &total) == CBMNL_OK);
  CHECK(meta.at("total_regret").get<double>() == total);

  int holds = 0;
  REQUIRE(cbmnl_runlog_potential_check(a, 0.25, &raw, &holds) == CBMNL_OK);
  CHECK(holds == 1);
  CHECK(nlohmann::json::parse(take(raw)).at("determinant_holds") == true);

  cbmnl_instance* inst = nullptr;
  REQUIRE(cbmnl_experiment_instance(exp, 3, &inst) == CBMNL_OK);
  cbmnl_instance_free(inst);

  cbmnl_runlog_free(a);
  cbmnl_runlog_free(b);
  cbmnl_experiment_free(exp);
}

TEST_CASE("batch runs and summaries") {
  const auto dir = std::filesystem::temp_directory_path() / "cbmnl_capi_batch";
  std::filesystem::remove_all(dir);
  cbmnl_experiment* exp = nullptr;
  REQUIRE(cbmnl_experiment_default(&exp) == CBMNL_OK);
  REQUIRE(cbmnl_experiment_set_policy(exp, "random") == CBMNL_OK);
  REQUIRE(cbmnl_experiment_set_T(exp, 50) == CBMNL_OK);
  REQUIRE(cbmnl_experiment_set_seeds(exp, "1..3") == CBMNL_OK);
  REQUIRE(cbmnl_experiment_set_output_dir(exp, dir.string().c_str()) == CBMNL_OK);
  char* raw = nullptr;
  REQUIRE(cbmnl_run_batch(exp, 2, &raw) == CBMNL_OK);
  const auto batch = nlohmann::json::parse(take(raw));
  CHECK(batch.at("runs") == 3);
  for (int s = 1; s <= 3; ++s) {
    CHECK(std::filesystem::exists(dir / ("run_" + std::to_string(s) + ".csv")));
    CHECK(std::filesystem::exists(dir / ("run_" + std::to_string(s) + ".json")));
  }
  REQUIRE(cbmnl_summarize_dir(dir.string().c_str(), &raw) == CBMNL_OK);
  const auto summary = nlohmann::json::parse(take(raw));
  CHECK(summary.at("runs") == 3);
  CHECK(summary.at("final_mean_cum_regret").get<double>() == doctest::Approx(batch.at("final_mean_cum_regret").get<double>()));
  CHECK(cbmnl_summarize_dir((dir / "missing").string().c_str(), &raw) == CBMNL_ERR_IO);
  cbmnl_experiment_free(exp);
  std::filesystem::remove_all(dir);
}

TEST_CASE("check suites") {
  char* raw = nullptr;
  REQUIRE(cbmnl_check("policy", 1, &raw) == CBMNL_OK);
  CHECK(nlohmann::json::parse(take(raw)).at("passed") == true);
  CHECK(cbmnl_check("everything", 1, &raw) == CBMNL_ERR_CONFIG);
}
