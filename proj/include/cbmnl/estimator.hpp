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

#ifndef CBMNL_ESTIMATOR_HPP_
#define CBMNL_ESTIMATOR_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "cbmnl/mnl.hpp"

namespace cbmnl {

struct Round {
  Assortment assortment;
  std::size_t outcome = 0;  // 0 = no purchase
};

// Rounds that offered exactly the same contexts, collapsed into outcome counts.
// Likelihood, score and design matrices only depend on these counts, so in the
// fixed-pool regime every evaluation costs O(#distinct assortments) instead of
// O(#rounds).
struct ChoiceGroup {
  Matrix contexts;          // k x d
  std::vector<Eigen::Index> context_ids;  // rows of History::context_table()
  Vector outcome_counts;    // k + 1, slot 0 = no purchase
  double rounds = 0.0;
  Vector chosen_sum;        // sum of contexts of purchased items
  Matrix gram;              // rounds * contexts^T contexts
};

// Append-only interaction log.
class History {
 public:
  explicit History(std::size_t dim);

  void append(Assortment assortment, std::size_t outcome);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  const std::vector<Round>& rounds() const { return rounds_; }
  const std::vector<ChoiceGroup>& groups() const { return groups_; }

  // Sum over rounds and offered items of x x^T (no regularization).
  const Matrix& gram() const { return gram_; }
  // Sum over rounds of the purchased item's context.
  const Vector& chosen_sum() const { return chosen_sum_; }

  // Distinct context vectors seen so far, one per row.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> context_table() const;

 private:
  std::size_t dim_;
  std::vector<Round> rounds_;
  std::vector<ChoiceGroup> groups_;
  std::unordered_map<std::string, std::size_t> group_index_;
  std::vector<double> context_table_;  // row-major
  std::unordered_map<std::string, Eigen::Index> context_index_;
  Matrix gram_;
  Vector chosen_sum_;
};

struct MleResult {
  Vector theta_hat;
  double score_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Full multinomial log-likelihood (no-purchase outcomes included) minus
// (lambda/2)|theta|^2.
double penalized_log_likelihood(const History& history, const Vector& theta, double lambda);

// Gradient of penalized_log_likelihood.
Vector score(const History& history, const Vector& theta, double lambda);

// Damped Newton from the origin with backtracking halving. Non-convergence is
// reported through MleResult::converged, never thrown.
MleResult fit_mle(const History& history, double lambda, double tol = 1e-8, int max_iter = 100);

// sum mu_i(theta) x_i + lambda theta.
Vector g_vector(const History& history, const Vector& theta, double lambda);

// sum mu_i(1-mu_i)(theta) x x^T + lambda I.
Matrix matrix_H(const History& history, const Vector& theta, double lambda);

// sum x x^T + lambda I.
Matrix matrix_V(const History& history, double lambda);

// sum alpha_i(theta1, theta2) x x^T + lambda I, with alpha_i the difference
// quotient of mu_i between theta1 and theta2 along x_i.
Matrix matrix_G(const History& history, const Vector& theta1, const Vector& theta2, double lambda);

// Negative Hessian of penalized_log_likelihood (includes the -mu_i mu_j
// cross terms that matrix_H leaves out).
Matrix fisher_information(const History& history, const Vector& theta, double lambda);

// Projections |x_i . (theta2 - theta1)| below this use the derivative at theta1.
inline constexpr double kAlphaFallbackThreshold = 1e-10;

}  // namespace cbmnl

#endif  // CBMNL_ESTIMATOR_HPP_
