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

#include "cbmnl/policy.hpp"

#include <cmath>
#include <limits>

namespace cbmnl {

namespace {

// Replace the incumbent only on a strict improvement so that earlier sets win ties.
constexpr double kTieTolerance = 1e-12;

void check_sets(const std::vector<IndexSet>& sets) {
  if (sets.empty()) throw ConfigError("no feasible assortments");
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kCbMnlE: return "cb_mnl_e";
    case PolicyKind::kCbMnlC: return "cb_mnl_c";
    case PolicyKind::kBonusUcb: return "bonus_ucb";
    case PolicyKind::kOracle: return "oracle";
    case PolicyKind::kRandom: return "random";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::kCbMnlE, PolicyKind::kCbMnlC, PolicyKind::kBonusUcb,
                       PolicyKind::kOracle, PolicyKind::kRandom}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown policy kind '" + std::string(name) +
                    "' (expected cb_mnl_e, cb_mnl_c, bonus_ucb, oracle or random)");
}

std::vector<IndexSet> enumerate_assortments(std::size_t N, std::size_t K) {
  if (N < 1 || K < 1 || K > N) {
    throw ConfigError("assortment enumeration needs 1 <= K <= N (got N=" + std::to_string(N) +
                      ", K=" + std::to_string(K) + ")");
  }
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= K; ++k) {
    binom = binom * static_cast<double>(N - k + 1) / static_cast<double>(k);
    total += binom;
  }
  if (total > static_cast<double>(kMaxAssortments)) {
    throw ConfigError("enumerating all assortments of up to " + std::to_string(K) + " out of " +
                      std::to_string(N) + " items needs " + std::to_string(static_cast<long long>(total)) +
                      " sets (limit " + std::to_string(kMaxAssortments) + "); reduce N or K");
  }
  std::vector<IndexSet> sets;
  sets.reserve(static_cast<std::size_t>(total));
  for (std::size_t k = 1; k <= K; ++k) {
    IndexSet current(k);
    for (std::size_t i = 0; i < k; ++i) current[i] = i;
    while (true) {
      sets.push_back(current);
      // Advance to the next k-combination in lexicographic order.
      std::size_t pos = k;
      while (pos > 0 && current[pos - 1] == N - k + pos - 1) --pos;
      if (pos == 0) break;
      ++current[pos - 1];
      for (std::size_t j = pos; j < k; ++j) current[j] = current[j - 1] + 1;
    }
  }
  return sets;
}

std::vector<Vector> sample_C_members(const History& history, const ConfidenceConfig& cfg,
                                     const ConfidenceState& state, std::size_t candidates,
                                     std::uint64_t seed) {
  std::vector<Vector> members{state.anchor};
  const double radius = 2.0 * (1.0 + 2.0 * cfg.S) * state.gamma;
  Eigen::LLT<Matrix> llt(state.H_hat);
  const Matrix upper = llt.matrixU();
  // Every member lies in both the ellipsoid and the S-ball, so proposing
  // uniformly from the smaller of the two keeps the accepted points uniform
  // on the intersection.
  const double d = static_cast<double>(history.dim());
  const double log_ellipsoid = d * std::log(radius) - upper.diagonal().array().log().sum();
  const bool from_ball = cfg.S > 0.0 && d * std::log(cfg.S) < log_ellipsoid;
  Rng rng = make_stream(seed, Stream::kPolicy, 1);
  for (std::size_t n = 0; n < candidates; ++n) {
    const Vector u = sample_ball(history.dim(), 1.0, rng);
    // theta_hat + r U^{-1} u is uniform in the H_hat ellipsoid when u is
    // uniform in the unit ball.
    const Vector theta = from_ball ? Vector(cfg.S * u)
                                   : Vector(state.theta_hat + radius * upper.triangularView<Eigen::Upper>().solve(u));
    if (from_ball && (theta - state.theta_hat).dot(state.H_hat * (theta - state.theta_hat)) > radius * radius) continue;
    if (in_set_C(theta, history, cfg, state)) members.push_back(theta);
  }
  return members;
}

Decision cb_mnl_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                     const History& history, const ConfidenceConfig& cfg, const ConfidenceState& state,
                     SetKind set_kind, std::uint64_t seed, const PolicyOptions& options) {
  check_sets(sets);
  std::vector<Vector> members;
  if (set_kind == SetKind::kC) members = sample_C_members(history, cfg, state, options.c_candidates, seed);

  Decision best;
  best.optimistic_value = -std::numeric_limits<double>::infinity();
  for (const IndexSet& set : sets) {
    Assortment a = Assortment::from_pool(contexts, prices, set);
    InnerMaximum inner;
    if (set_kind == SetKind::kE) {
      // Same seed for every set: identical inputs give identical answers.
      inner = max_revenue_over_E(a, history, cfg, state, options.restarts, seed, options.ascent);
    } else {
      inner.value = -std::numeric_limits<double>::infinity();
      for (const Vector& theta : members) {
        const double v = expected_revenue(a, theta);
        if (v > inner.value) {
          inner.value = v;
          inner.theta = theta;
        }
      }
    }
    if (inner.value > best.optimistic_value + kTieTolerance) {
      best.assortment = std::move(a);
      best.theta_used = inner.theta;
      best.optimistic_value = inner.value;
    }
  }
  return best;
}

double ucb_bonus(const Assortment& assortment, const ConfidenceConfig& cfg, const ConfidenceState& state,
                 double kappa, double M_const) {
  const Eigen::LLT<Matrix> h_llt(state.H_hat);
  const Eigen::LLT<Matrix> v_llt(state.V);
  double sum_h = 0.0;
  double sum_v2 = 0.0;
  for (Eigen::Index i = 0; i < assortment.contexts.rows(); ++i) {
    const Vector x = assortment.contexts.row(i).transpose();
    sum_h += std::sqrt(std::max(0.0, x.dot(h_llt.solve(x))));
    sum_v2 += std::max(0.0, x.dot(v_llt.solve(x)));
  }
  const double s = cfg.S;
  const double g = state.gamma;
  return (2.0 + 4.0 * s) * g * sum_h + 4.0 * kappa * (1.0 + 2.0 * s) * (1.0 + 2.0 * s) * M_const * g * g * sum_v2;
}

Decision bonus_ucb_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                        const ConfidenceConfig& cfg, const ConfidenceState& state, double kappa,
                        double M_const) {
  check_sets(sets);
  Decision best;
  best.optimistic_value = -std::numeric_limits<double>::infinity();
  for (const IndexSet& set : sets) {
    Assortment a = Assortment::from_pool(contexts, prices, set);
    const double value = expected_revenue(a, state.theta_hat) + ucb_bonus(a, cfg, state, kappa, M_const);
    if (value > best.optimistic_value + kTieTolerance) {
      best.assortment = std::move(a);
      best.optimistic_value = value;
    }
  }
  best.theta_used = state.theta_hat;
  return best;
}

IndexSet oracle_assortment(const Matrix& contexts, const Vector& prices, const Vector& theta_star,
                           const std::vector<IndexSet>& sets) {
  check_sets(sets);
  const IndexSet* best = nullptr;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const IndexSet& set : sets) {
    const double v = expected_revenue(Assortment::from_pool(contexts, prices, set), theta_star);
    if (v > best_value + kTieTolerance) {
      best_value = v;
      best = &set;
    }
  }
  return *best;
}

IndexSet oracle_assortment(const Matrix& contexts, const Vector& prices, const Vector& theta_star,
                           std::size_t K) {
  return oracle_assortment(contexts, prices, theta_star,
                           enumerate_assortments(static_cast<std::size_t>(contexts.rows()), K));
}

Decision random_step(const Matrix& contexts, const Vector& prices, const std::vector<IndexSet>& sets,
                     const Vector& theta_hat, Rng& rng) {
  check_sets(sets);
  std::uniform_int_distribution<std::size_t> pick(0, sets.size() - 1);
  Decision d;
  d.assortment = Assortment::from_pool(contexts, prices, sets[pick(rng)]);
  d.theta_used = theta_hat;
  d.optimistic_value = expected_revenue(d.assortment, theta_hat);
  return d;
}

std::string format_index_set(const IndexSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k > 0) out += ';';
    out += std::to_string(set[k] + 1);
  }
  return out;
}

}  // namespace cbmnl
