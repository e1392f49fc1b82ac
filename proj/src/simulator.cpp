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

#include "cbmnl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cbmnl/policy.hpp"

namespace cbmnl {

using nlohmann::json;

std::string_view to_string(ContextMode mode) {
  return mode == ContextMode::kFixedPool ? "fixed_pool" : "fresh_iid";
}

ContextMode parse_context_mode(std::string_view name) {
  if (name == "fixed_pool") return ContextMode::kFixedPool;
  if (name == "fresh_iid") return ContextMode::kFreshIid;
  throw ConfigError("unknown context_mode '" + std::string(name) + "' (expected fixed_pool or fresh_iid)");
}

void InstanceConfig::validate() const {
  if (d < 1) throw ConfigError("instance dimension d must be at least 1");
  if (N < 1) throw ConfigError("instance must have at least one item");
  if (K < 1 || K > N) throw ConfigError("instance needs 1 <= K <= N");
  if (!(S_true >= 0.0) || !(S >= S_true) || !std::isfinite(S)) {
    throw ConfigError("instance needs 0 <= S_true <= S");
  }
  if (!prices.empty()) {
    if (prices.size() != N) throw ConfigError("prices must list one value per item");
    for (double p : prices) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("prices must be nonnegative");
    }
  }
}

Instance make_instance(const InstanceConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Instance inst;
  inst.d = cfg.d;
  inst.N = cfg.N;
  inst.K = cfg.K;
  inst.S = cfg.S;
  inst.S_true = cfg.S_true;
  inst.context_mode = cfg.context_mode;
  inst.seed = seed;
  Rng rng = make_stream(seed, Stream::kInstance);
  inst.theta_star = sample_ball(cfg.d, cfg.S_true, rng);
  const auto n = static_cast<Eigen::Index>(cfg.N);
  inst.prices = Vector::Ones(n);
  for (std::size_t i = 0; i < cfg.prices.size(); ++i) inst.prices[static_cast<Eigen::Index>(i)] = cfg.prices[i];
  if (cfg.context_mode == ContextMode::kFixedPool) {
    inst.pool.resize(n, static_cast<Eigen::Index>(cfg.d));
    for (Eigen::Index i = 0; i < n; ++i) inst.pool.row(i) = sample_ball(cfg.d, 1.0, rng).transpose();
  } else {
    inst.pool.resize(0, static_cast<Eigen::Index>(cfg.d));
  }
  return inst;
}

Matrix serve_contexts(const Instance& instance, std::size_t t) {
  if (t < 1) throw ConfigError("rounds are numbered from 1");
  if (instance.context_mode == ContextMode::kFixedPool) return instance.pool;
  Rng rng = make_stream(instance.seed, Stream::kContexts, t);
  Matrix contexts(static_cast<Eigen::Index>(instance.N), static_cast<Eigen::Index>(instance.d));
  for (Eigen::Index i = 0; i < contexts.rows(); ++i) {
    contexts.row(i) = sample_ball(instance.d, 1.0, rng).transpose();
  }
  return contexts;
}

std::size_t environment_step(const Instance& instance, const Assortment& assortment, Rng& rng) {
  return sample_choice(choice_probabilities(assortment, instance.theta_star), rng);
}

namespace {

constexpr std::size_t kMaxKappaAssortments = 1000;

Matrix kappa_pool(const Instance& instance) {
  return instance.context_mode == ContextMode::kFixedPool ? instance.pool : serve_contexts(instance, 1);
}

std::vector<IndexSet> kappa_assortments(const Instance& instance) {
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t k = 1; k <= instance.K; ++k) {
    binom = binom * static_cast<double>(instance.N - k + 1) / static_cast<double>(k);
    total += binom;
  }
  if (total <= static_cast<double>(kMaxKappaAssortments)) return enumerate_assortments(instance.N, instance.K);
  Rng rng = make_stream(instance.seed, Stream::kKappa, 1);
  std::vector<std::size_t> items(instance.N);
  std::iota(items.begin(), items.end(), 0);
  std::uniform_int_distribution<std::size_t> size(1, instance.K);
  std::vector<IndexSet> sets;
  for (std::size_t n = 0; n < kMaxKappaAssortments; ++n) {
    std::shuffle(items.begin(), items.end(), rng);
    IndexSet s(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(size(rng)));
    std::sort(s.begin(), s.end());
    sets.push_back(std::move(s));
  }
  return sets;
}

}  // namespace

std::vector<Vector> kappa_search_points(const Instance& instance, double S, std::size_t grid_size) {
  std::vector<Vector> points;
  points.push_back(Vector::Zero(static_cast<Eigen::Index>(instance.d)));
  Rng rng = make_stream(instance.seed, Stream::kKappa, 0);
  for (std::size_t n = 0; n < grid_size; ++n) points.push_back(sample_ball(instance.d, S, rng));
  const Matrix pool = kappa_pool(instance);
  for (Eigen::Index i = 0; i < pool.rows(); ++i) {
    const double norm = pool.row(i).norm();
    if (norm == 0.0) continue;
    const Vector dir = pool.row(i).transpose() / norm;
    points.push_back(S * dir);
    points.push_back(-S * dir);
  }
  return points;
}

KappaEstimate kappa_over_thetas(const Instance& instance, const std::vector<Vector>& thetas) {
  const Matrix pool = kappa_pool(instance);
  const std::vector<IndexSet> sets = kappa_assortments(instance);
  KappaEstimate best;
  best.value = 0.0;
  for (const Vector& theta : thetas) {
    const Vector utilities = pool * theta;
    for (const IndexSet& set : sets) {
      Vector u(static_cast<Eigen::Index>(set.size()));
      for (std::size_t k = 0; k < set.size(); ++k) u[static_cast<Eigen::Index>(k)] = utilities[static_cast<Eigen::Index>(set[k])];
      const ChoiceDistribution dist = choice_probabilities_from_utilities(u);
      for (std::size_t k = 0; k < set.size(); ++k) {
        const double mu = dist.item_probs[static_cast<Eigen::Index>(k)];
        const double value = 1.0 / (mu * (1.0 - mu));
        if (value > best.value) {
          best.value = value;
          best.argmax_theta = theta;
          best.argmax_context = pool.row(static_cast<Eigen::Index>(set[k])).transpose();
        }
      }
    }
  }
  return best;
}

KappaEstimate estimate_kappa(const Instance& instance, std::size_t grid_size) {
  return kappa_over_thetas(instance, kappa_search_points(instance, instance.S, grid_size));
}

namespace {

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  json j;
  j["d"] = instance.d;
  j["N"] = instance.N;
  j["K"] = instance.K;
  j["S"] = instance.S;
  j["S_true"] = instance.S_true;
  j["theta_star"] = std::vector<double>(instance.theta_star.data(), instance.theta_star.data() + instance.theta_star.size());
  j["context_mode"] = std::string(to_string(instance.context_mode));
  j["pool"] = matrix_rows(instance.pool);
  j["prices"] = std::vector<double>(instance.prices.data(), instance.prices.data() + instance.prices.size());
  j["seed"] = instance.seed;
  return j.dump(2);
}

Instance instance_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance JSON does not parse: ") + e.what());
  }
  try {
    Instance inst;
    inst.d = j.at("d").get<std::size_t>();
    inst.N = j.at("N").get<std::size_t>();
    inst.K = j.at("K").get<std::size_t>();
    inst.S = j.at("S").get<double>();
    inst.S_true = j.at("S_true").get<double>();
    inst.theta_star = to_vector(j.at("theta_star"));
    inst.context_mode = parse_context_mode(j.at("context_mode").get<std::string>());
    inst.prices = to_vector(j.at("prices"));
    inst.seed = j.at("seed").get<std::uint64_t>();
    const json& rows = j.at("pool");
    inst.pool.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(inst.d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Vector row = to_vector(rows[i]);
      if (static_cast<std::size_t>(row.size()) != inst.d) throw DimensionError("pool row has wrong dimension");
      inst.pool.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    if (static_cast<std::size_t>(inst.theta_star.size()) != inst.d) throw DimensionError("theta_star has wrong dimension");
    if (static_cast<std::size_t>(inst.prices.size()) != inst.N) throw DimensionError("prices must list one value per item");
    if (inst.context_mode == ContextMode::kFixedPool && static_cast<std::size_t>(inst.pool.rows()) != inst.N) {
      throw DimensionError("fixed_pool instance needs N pool rows");
    }
    if (inst.K < 1 || inst.K > inst.N) throw ConfigError("instance needs 1 <= K <= N");
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("instance JSON is missing or mistyped a field: ") + e.what());
  }
}

}  // namespace cbmnl
