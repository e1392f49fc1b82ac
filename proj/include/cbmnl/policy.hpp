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

#ifndef CBMNL_POLICY_HPP_
#define CBMNL_POLICY_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "cbmnl/confidence.hpp"

namespace cbmnl {

enum class PolicyKind { kCbMnlE, kCbMnlC, kBonusUcb, kOracle, kRandom };
enum class SetKind { kE, kC };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct Decision {
  Assortment assortment;
  Vector theta_used;
  double optimistic_value = 0.0;
};

struct PolicyOptions {
  int restarts = 5;
  std::size_t c_candidates = 512;
  AscentOptions ascent;
};

inline constexpr std::size_t kMaxAssortments = 1'000'000;

// Nonempty subsets of {0..N-1} with at most K elements, ordered by size and
// then lexicographically. Ties in every argmax below resolve to the earliest
// set in this order.
std::vector<IndexSet> enumerate_assortments(std::size_t N, std::size_t K);

// Optimistic decision: argmax over assortments of the best revenue attainable
// inside the confidence set.
Decision cb_mnl_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                     const History& history, const ConfidenceConfig& cfg, const ConfidenceState& state,
                     SetKind set_kind, std::uint64_t seed, const PolicyOptions& options = {});

// Members of C_t found by rejection sampling the ellipsoid
// |theta - theta_hat|_{H(theta_hat)} <= 2(1+2S) gamma. The anchor is always
// the first entry.
std::vector<Vector> sample_C_members(const History& history, const ConfidenceConfig& cfg,
                                     const ConfidenceState& state, std::size_t candidates,
                                     std::uint64_t seed);

// Exploration bonus of one assortment at theta_hat (nonnegative).
double ucb_bonus(const Assortment& assortment, const ConfidenceConfig& cfg, const ConfidenceState& state,
                 double kappa, double M_const);

Decision bonus_ucb_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                        const ConfidenceConfig& cfg, const ConfidenceState& state, double kappa,
                        double M_const);

IndexSet oracle_assortment(const Matrix& contexts, const Vector& prices, const Vector& theta_star,
                           const std::vector<IndexSet>& sets);
IndexSet oracle_assortment(const Matrix& contexts, const Vector& prices, const Vector& theta_star,
                           std::size_t K);

Decision random_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                     const Vector& theta_hat, Rng& rng);

std::string format_index_set(const IndexSet& set);  // 1-based, ';'-separated

}  // namespace cbmnl

#endif  // CBMNL_POLICY_HPP_
