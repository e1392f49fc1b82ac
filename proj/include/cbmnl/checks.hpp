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

#ifndef CBMNL_CHECKS_HPP_
#define CBMNL_CHECKS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cbmnl/estimator.hpp"
#include "cbmnl/types.hpp"

namespace cbmnl {

// Outcome of one property check.
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst = 0.0;  // worst observed margin, sign convention per check
  std::string detail;
};

// Suites: mnl, estimator, confidence, policy, simulator, harness, all.
std::vector<std::string_view> check_suite_names();
std::vector<CheckResult> run_check_suite(std::string_view suite, std::uint64_t seed = 1);
std::string check_report_json(const std::vector<CheckResult>& results);

// Random assortment with d-dimensional contexts of norm at most one and
// `k` items, plus a random theta of norm at most `radius`.
struct RandomDraw {
  Assortment assortment;
  Vector theta;
};
RandomDraw random_draw(std::size_t d, std::size_t k, double radius, Rng& rng);

// History of `rounds` random rounds whose outcomes are drawn under `theta`.
History random_history(std::size_t d, std::size_t K, std::size_t rounds, const Vector& theta, Rng& rng);

// Individual checks, shared by the suites.
CheckResult check_derivative_identity(std::size_t draws, std::uint64_t seed);
CheckResult check_self_concordance(std::size_t draws, std::uint64_t seed);
CheckResult check_mle_stationarity(std::size_t histories, std::uint64_t seed);
CheckResult check_g_identity(std::size_t configs, std::uint64_t seed);
// Smallest eigenvalue of G(theta1, theta2) - H(theta_i)/(1+2S) for i = 1, 2.
CheckResult check_g_ordering(std::size_t configs, std::uint64_t seed);
// Same ordering with alpha_i taken coordinatewise (other utilities held at theta1).
CheckResult check_g_ordering_coordinatewise(std::size_t configs, std::uint64_t seed);
CheckResult check_c_inside_e(std::size_t snapshots, std::size_t members_per_snapshot, std::uint64_t seed);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

}  // namespace cbmnl

#endif  // CBMNL_CHECKS_HPP_
