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

#ifndef CBMNL_CONFIDENCE_HPP_
#define CBMNL_CONFIDENCE_HPP_

#include "cbmnl/estimator.hpp"

namespace cbmnl {

struct ConfidenceConfig {
  double delta = 0.1;
  double lambda = 1.0;
  double S = 1.0;         // norm bound of the parameter set
  double L_const = 0.25;  // upper bound on mu_i(1 - mu_i) used in gamma
  std::size_t d = 1;
  std::size_t K = 1;
  std::size_t horizon = 1;

  void validate() const;
};

// max(1, d ln(K T)), held fixed for a run.
double default_lambda(std::size_t d, std::size_t K, std::size_t horizon);

double gamma_radius(const ConfidenceConfig& cfg, std::size_t t);

double beta_radius(double gamma, double lambda);

// Everything the confidence sets need at one round. Immutable once built.
struct ConfidenceState {
  std::size_t t = 1;
  Vector theta_hat;
  double gamma = 0.0;
  double beta = 0.0;
  Matrix H_hat;          // matrix_H at theta_hat
  Matrix V;
  Vector g_hat;          // g_vector at theta_hat
  double loss_at_hat = 0.0;  // negative penalized log-likelihood at theta_hat
  // Feasible point used as the centre of line searches: theta_hat, or its
  // radial projection onto the S-ball when the estimate lies outside.
  Vector anchor;
  double anchor_gap = 0.0;  // loss_gap at the anchor
};

ConfidenceState make_confidence_state(const History& history, const ConfidenceConfig& cfg,
                                      const Vector& theta_hat, std::size_t t);

bool in_parameter_ball(const Vector& theta, double S);

// ||g(theta) - g(theta_hat)|| in the H(theta)^{-1} norm.
double c_set_statistic(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
                       const ConfidenceState& state);

// loss(theta) - loss(theta_hat), loss = negative penalized log-likelihood.
double loss_gap(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
                const ConfidenceState& state);

bool in_set_C(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
              const ConfidenceState& state);

bool in_set_E(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
              const ConfidenceState& state);

struct AscentOptions {
  double initial_step = 0.1;
  double min_step = 1e-4;
  int max_iterations = 200;
};

struct InnerMaximum {
  double value = 0.0;
  Vector theta;
};

// Multi-start projected ascent of expected_revenue over E_t intersected with
// the S-ball. Start 0 is the anchor; the rest are random directions pulled
// back onto the feasible set. Deterministic for a given seed.
InnerMaximum max_revenue_over_E(const Assortment& assortment, const History& history,
                                const ConfidenceConfig& cfg, const ConfidenceState& state,
                                int restarts, std::uint64_t seed, const AscentOptions& options = {});

// Largest point of the segment [from, to] that stays in E_t and the S-ball.
// `from` must be feasible.
Vector pull_back_to_E(const Vector& from, const Vector& to, const History& history,
                      const ConfidenceConfig& cfg, const ConfidenceState& state);

}  // namespace cbmnl

#endif  // CBMNL_CONFIDENCE_HPP_
