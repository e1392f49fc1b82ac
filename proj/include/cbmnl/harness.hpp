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

#ifndef CBMNL_HARNESS_HPP_
#define CBMNL_HARNESS_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbmnl/policy.hpp"
#include "cbmnl/simulator.hpp"

namespace cbmnl {

std::string_view library_version();

struct ExperimentConfig {
  InstanceConfig instance;
  PolicyKind policy = PolicyKind::kCbMnlE;
  std::size_t T = 1000;
  double delta = 0.1;
  std::optional<double> lambda;  // default max(1, d ln(K T))
  double L_const = 0.25;
  double M_const = 0.25;  // second-derivative bound used by bonus_ucb
  int restarts = 5;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "runs";
  std::size_t kappa_grid = 256;
  std::size_t c_candidates = 512;
  double mle_tol = 1e-8;
  int mle_max_iter = 100;

  void validate() const;
  double effective_lambda() const;
  ConfidenceConfig confidence_config(const Instance& instance) const;
};

ExperimentConfig experiment_from_json(std::string_view text);
std::string experiment_to_json(const ExperimentConfig& cfg);

// "a..b" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> parse_seed_range(std::string_view text);

// One round of a run. Fields that need theta_star are simulator-side
// diagnostics; the policy never sees them.
struct RoundRecord {
  std::size_t t = 0;
  IndexSet assortment;
  std::size_t outcome = 0;
  double opt_value = 0.0;
  double oracle_value = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  bool covered = false;     // theta_star in the set the policy uses (C for cb_mnl_c, else E)
  double dev_H = 0.0;       // |theta_t - theta_star| in the H(theta_star) norm
  double dev_bound = 0.0;   // 2(1+2S) gamma

  // Not part of the CSV.
  bool covered_E = false;
  bool covered_C = false;
  double dev_bound_E = 0.0;  // (2+2S) gamma + 2 sqrt(1+S) beta
  double pred_error = 0.0;   // |mu(X theta_star) - mu(X theta_t)| on the chosen set
  double chosen_value = 0.0; // expected revenue of the chosen set under theta_star
  bool mle_converged = true;
};

struct RunLog {
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::kCbMnlE;
  std::string config_echo;  // experiment JSON without seeds and output_dir
  std::vector<RoundRecord> rounds;
  double total_regret = 0.0;
  double kappa_hat = 0.0;
  double wall_time_seconds = 0.0;
  double lambda = 1.0;
  double S = 1.0;
  std::size_t K = 1;
  Vector theta_star;
  std::size_t mle_failures = 0;
  History history{1};

  bool covered_all_rounds() const;
};

RunLog run_experiment(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs every configured seed on up to `jobs` threads; results in seed order.
std::vector<RunLog> run_seeds(const ExperimentConfig& cfg, std::size_t jobs);

inline constexpr std::string_view kCsvHeader =
    "t,assortment,outcome,opt_value,oracle_value,inst_regret,cum_regret,gamma,beta,covered,dev_H,dev_bound";

void write_csv(const RunLog& log, std::ostream& out);
std::string to_csv(const RunLog& log);
RunLog read_csv(std::istream& in);

std::string run_metadata_json(const RunLog& log);

// Writes run_<seed>.csv and run_<seed>.json under the output directory.
void write_run_files(const RunLog& log, const std::string& directory);

// Loads a run back from its CSV and metadata files.
RunLog load_run(const std::string& csv_path, const std::string& metadata_path);

struct PotentialReport {
  // Elliptical potential with theta_star-weighted contexts (J matrices).
  double potential_J = 0.0;
  double potential_J_bound = 0.0;
  // Same with unit weights (V matrices).
  double potential_V = 0.0;
  double potential_V_bound = 0.0;
  // Determinant-trace, in logs.
  double log_det_V = 0.0;
  double log_det_V_bound = 0.0;
  double log_det_J = 0.0;
  double log_det_J_bound = 0.0;
  bool potential_holds = true;
  bool determinant_holds = true;

  bool holds() const { return potential_holds && determinant_holds; }
};

PotentialReport elliptical_potential_check(const RunLog& run, const History& history, double L_const = 0.25);

struct RunSummary {
  std::size_t runs = 0;
  std::size_t T = 0;
  std::vector<double> mean_cum_regret;
  std::vector<double> stderr_cum_regret;
  double coverage_rate = 0.0;
  double loglog_slope = 0.0;  // least squares on [T/2, T]
};

RunSummary summarize_runs(const std::vector<RunLog>& logs);
std::string summary_to_json(const RunSummary& summary);

// Least-squares slope of log y against log t over t in [T/2, T] (1-based t).
double loglog_slope(const std::vector<double>& values);

}  // namespace cbmnl

#endif  // CBMNL_HARNESS_HPP_
