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

#ifndef CBMNL_SIMULATOR_HPP_
#define CBMNL_SIMULATOR_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbmnl/mnl.hpp"

namespace cbmnl {

enum class ContextMode { kFixedPool, kFreshIid };

std::string_view to_string(ContextMode mode);
ContextMode parse_context_mode(std::string_view name);

struct InstanceConfig {
  std::size_t d = 2;
  std::size_t N = 8;
  std::size_t K = 2;
  double S = 1.0;       // bound given to the learner
  double S_true = 1.0;  // radius theta_star is drawn from
  ContextMode context_mode = ContextMode::kFixedPool;
  std::vector<double> prices;  // empty = all ones

  void validate() const;
};

// Ground truth of one synthetic problem. Immutable after creation.
struct Instance {
  std::size_t d = 0;
  std::size_t N = 0;
  std::size_t K = 0;
  double S = 0.0;
  double S_true = 0.0;
  Vector theta_star;
  ContextMode context_mode = ContextMode::kFixedPool;
  Matrix pool;  // N x d in fixed_pool mode, empty otherwise
  Vector prices;
  std::uint64_t seed = 0;
};

Instance make_instance(const InstanceConfig& cfg, std::uint64_t seed);

// N x d contexts for round t (t >= 1).
Matrix serve_contexts(const Instance& instance, std::size_t t);

std::size_t environment_step(const Instance& instance, const Assortment& assortment, Rng& rng);

struct KappaEstimate {
  double value = 4.0;
  Vector argmax_theta;
  Vector argmax_context;
};

// max of 1/(mu_i (1 - mu_i)) over the instance's assortments (at most 1000,
// sampled when there are more), their items, and `grid_size` random points of
// the S-ball plus the origin and the extremes +-S x/|x| of every pool item.
KappaEstimate estimate_kappa(const Instance& instance, std::size_t grid_size);

// Same search over an explicit parameter list.
KappaEstimate kappa_over_thetas(const Instance& instance, const std::vector<Vector>& thetas);

// The parameter points estimate_kappa searches for a ball of radius S.
std::vector<Vector> kappa_search_points(const Instance& instance, double S, std::size_t grid_size);

std::string instance_to_json(const Instance& instance);
Instance instance_from_json(std::string_view text);

}  // namespace cbmnl

#endif  // CBMNL_SIMULATOR_HPP_
