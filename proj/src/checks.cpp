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

#include "cbmnl/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "cbmnl/confidence.hpp"
#include "cbmnl/harness.hpp"
#include "cbmnl/policy.hpp"
#include "cbmnl/simulator.hpp"

namespace cbmnl {
namespace {

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

CheckResult named(std::string suite, std::string name) {
  CheckResult r;
  r.suite = std::move(suite);
  r.name = std::move(name);
  return r;
}

CheckResult finish(CheckResult r, std::size_t trials, std::size_t violations, double worst) {
  r.trials = trials;
  r.violations = violations;
  r.worst = worst;
  r.passed = violations == 0;
  return r;
}

Matrix coordinatewise_G(const History& history, const Vector& theta1, const Vector& theta2, double lambda) {
  const auto d = static_cast<Eigen::Index>(history.dim());
  Matrix G = lambda * Matrix::Identity(d, d);
  for (const ChoiceGroup& g : history.groups()) {
    const Vector u1 = g.contexts * theta1;
    const Vector u2 = g.contexts * theta2;
    const Vector mu1 = choice_probabilities_from_utilities(u1).item_probs;
    for (Eigen::Index i = 0; i < u1.size(); ++i) {
      const double du = u2[i] - u1[i];
      double alpha = mu1[i] * (1.0 - mu1[i]);
      if (std::abs(du) >= kAlphaFallbackThreshold) {
        Vector moved = u1;
        moved[i] = u2[i];
        alpha = (choice_probabilities_from_utilities(moved).item_probs[i] - mu1[i]) / du;
      }
      const Vector x = g.contexts.row(i).transpose();
      G += g.rounds * alpha * x * x.transpose();
    }
  }
  return G;
}

struct OrderingConfig {
  History history{1};
  double S = 1.0;
  double lambda = 1.0;
  Vector theta1;
  Vector theta2;
};

OrderingConfig random_ordering_config(Rng& rng) {
  OrderingConfig c;
  const std::size_t d = uniform_size(rng, 1, 5);
  const std::size_t K = uniform_size(rng, 1, 5);
  const std::size_t rounds = uniform_size(rng, 1, 60);
  c.S = uniform_real(rng, 0.1, 3.0);
  c.lambda = std::max(1.0, static_cast<double>(d) * std::log(static_cast<double>(K * rounds)));
  const Vector truth = sample_ball(d, c.S, rng);
  c.history = random_history(d, K, rounds, truth, rng);
  c.theta1 = sample_ball(d, c.S, rng);
  c.theta2 = sample_ball(d, c.S, rng);
  return c;
}

CheckResult ordering_check(CheckResult r, std::size_t configs, std::uint64_t seed, bool coordinatewise) {
  Rng rng = make_stream(seed, Stream::kCheck, coordinatewise ? 5 : 4);
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < configs; ++n) {
    const OrderingConfig c = random_ordering_config(rng);
    const Matrix G = coordinatewise ? coordinatewise_G(c.history, c.theta1, c.theta2, c.lambda)
                                    : matrix_G(c.history, c.theta1, c.theta2, c.lambda);
    const double scale = 1.0 / (1.0 + 2.0 * c.S);
    const double e1 = min_eigenvalue(G - scale * matrix_H(c.history, c.theta1, c.lambda));
    const double e2 = min_eigenvalue(G - scale * matrix_H(c.history, c.theta2, c.lambda));
    const double e = std::min(e1, e2);
    worst = std::min(worst, e);
    if (e < -1e-9) ++violations;
  }
  return finish(std::move(r), configs, violations, worst);
}

}  // namespace

double min_eigenvalue(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

RandomDraw random_draw(std::size_t d, std::size_t k, double radius, Rng& rng) {
  Matrix pool(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pool.rows(); ++i) pool.row(i) = sample_ball(d, 1.0, rng).transpose();
  IndexSet idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  return {Assortment::from_pool(pool, Vector(), idx), sample_ball(d, radius, rng)};
}

History random_history(std::size_t d, std::size_t K, std::size_t rounds, const Vector& theta, Rng& rng) {
  History h(d);
  for (std::size_t t = 0; t < rounds; ++t) {
    RandomDraw draw = random_draw(d, uniform_size(rng, 1, K), 0.0, rng);
    const std::size_t outcome = sample_choice(choice_probabilities(draw.assortment, theta), rng);
    h.append(std::move(draw.assortment), outcome);
  }
  return h;
}

CheckResult check_derivative_identity(std::size_t draws, std::uint64_t seed) {
  CheckResult r = named("mnl", "derivative_identity");
  Rng rng = make_stream(seed, Stream::kCheck, 1);
  std::size_t violations = 0;
  double worst = 0.0;
  const double h = 1e-5;
  for (std::size_t n = 0; n < draws; ++n) {
    const RandomDraw draw = random_draw(uniform_size(rng, 1, 10), uniform_size(rng, 1, 5), 3.0, rng);
    const Vector u = draw.assortment.contexts * draw.theta;
    const std::size_t i = uniform_size(rng, 0, draw.assortment.size() - 1);
    const auto ii = static_cast<Eigen::Index>(i);
    Vector up = u, down = u;
    up[ii] += h;
    down[ii] -= h;
    const double fd = (choice_probabilities_from_utilities(up).item_probs[ii] -
                       choice_probabilities_from_utilities(down).item_probs[ii]) / (2.0 * h);
    const double exact = diag_derivative(draw.assortment, draw.theta, i);
    const double rel = std::abs(fd - exact) / std::max(std::abs(exact), 1e-300);
    worst = std::max(worst, rel);
    if (!(rel < 1e-6)) ++violations;
  }
  return finish(std::move(r), draws, violations, worst);
}

CheckResult check_self_concordance(std::size_t draws, std::uint64_t seed) {
  CheckResult r = named("mnl", "self_concordance");
  Rng rng = make_stream(seed, Stream::kCheck, 2);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n < draws; ++n) {
    const RandomDraw draw = random_draw(uniform_size(rng, 1, 10), uniform_size(rng, 1, 5), 5.0, rng);
    for (std::size_t i = 0; i < draw.assortment.size(); ++i) {
      const double first = diag_derivative(draw.assortment, draw.theta, i);
      const double second = diag_second_derivative(draw.assortment, draw.theta, i);
      const double ratio = first > 0.0 ? std::abs(second) / first : 0.0;
      worst = std::max(worst, ratio);
      if (std::abs(second) > first) ++violations;
    }
  }
  return finish(std::move(r), draws, violations, worst);
}

CheckResult check_mle_stationarity(std::size_t histories, std::uint64_t seed) {
  CheckResult r = named("estimator", "mle_stationarity");
  Rng rng = make_stream(seed, Stream::kCheck, 3);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n < histories; ++n) {
    const std::size_t d = uniform_size(rng, 1, 5);
    const std::size_t K = uniform_size(rng, 1, 5);
    const std::size_t rounds = uniform_size(rng, 1, 300);
    const Vector truth = sample_ball(d, 2.0, rng);
    const History h = random_history(d, K, rounds, truth, rng);
    const double lambda = std::max(1.0, static_cast<double>(d) * std::log(static_cast<double>(K * rounds)));
    const MleResult fit = fit_mle(h, lambda);
    const double norm = score(h, fit.theta_hat, lambda).norm();
    worst = std::max(worst, norm);
    if (!(norm <= 1e-8)) ++violations;
  }
  return finish(std::move(r), histories, violations, worst);
}

CheckResult check_g_identity(std::size_t configs, std::uint64_t seed) {
  CheckResult r = named("estimator", "g_difference_identity");
  Rng rng = make_stream(seed, Stream::kCheck, 6);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t n = 0; n < configs; ++n) {
    const OrderingConfig c = random_ordering_config(rng);
    const Vector lhs = g_vector(c.history, c.theta1, c.lambda) - g_vector(c.history, c.theta2, c.lambda);
    const Vector rhs = matrix_G(c.history, c.theta1, c.theta2, c.lambda) * (c.theta1 - c.theta2);
    const double err = (lhs - rhs).norm() / std::max(1.0, lhs.norm());
    worst = std::max(worst, err);
    if (!(err <= 1e-8)) ++violations;
  }
  return finish(std::move(r), configs, violations, worst);
}

CheckResult check_g_ordering(std::size_t configs, std::uint64_t seed) {
  return ordering_check(named("estimator", "g_ordering"), configs, seed, false);
}

CheckResult check_g_ordering_coordinatewise(std::size_t configs, std::uint64_t seed) {
  return ordering_check(named("estimator", "g_ordering_coordinatewise"), configs, seed, true);
}

CheckResult check_c_inside_e(std::size_t snapshots, std::size_t members_per_snapshot, std::uint64_t seed) {
  CheckResult r = named("confidence", "c_inside_e");
  Rng rng = make_stream(seed, Stream::kCheck, 7);
  std::size_t violations = 0;
  std::size_t trials = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < snapshots; ++n) {
    const std::size_t d = uniform_size(rng, 1, 4);
    const std::size_t K = uniform_size(rng, 1, 4);
    const std::size_t rounds = uniform_size(rng, 10, 300);
    ConfidenceConfig cfg;
    cfg.d = d;
    cfg.K = K;
    cfg.S = uniform_real(rng, 0.5, 2.0);
    cfg.horizon = rounds + 1;
    cfg.lambda = default_lambda(d, K, cfg.horizon);
    const Vector truth = sample_ball(d, cfg.S, rng);
    const History h = random_history(d, K, rounds, truth, rng);
    const MleResult fit = fit_mle(h, cfg.lambda);
    const ConfidenceState state = make_confidence_state(h, cfg, fit.theta_hat, rounds + 1);
    std::size_t found = 0;
    for (std::uint64_t batch = 0; batch < 64 && found < members_per_snapshot; ++batch) {
      const std::vector<Vector> members = sample_C_members(h, cfg, state, 256, seed * 1000003 + n * 97 + batch);
      for (std::size_t m = 1; m < members.size() && found < members_per_snapshot; ++m) {
        ++found;
        ++trials;
        const double margin = loss_gap(members[m], h, cfg, state) - state.beta * state.beta;
        worst = std::max(worst, margin);
        if (!in_set_E(members[m], h, cfg, state)) ++violations;
      }
    }
  }
  CheckResult out = finish(std::move(r), trials, violations, worst);
  if (trials < snapshots * members_per_snapshot) {
    out.passed = false;
    out.detail = "rejection sampling found too few members of C";
  }
  return out;
}

std::vector<std::string_view> check_suite_names() {
  return {"mnl", "estimator", "confidence", "policy", "simulator", "harness", "all"};
}

namespace {

std::vector<CheckResult> mnl_suite(std::uint64_t seed) {
  std::vector<CheckResult> out{check_derivative_identity(1000, seed), check_self_concordance(1000, seed)};
  CheckResult simplex = named("mnl", "probability_simplex");
  Rng rng = make_stream(seed, Stream::kCheck, 8);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    Vector u(static_cast<Eigen::Index>(uniform_size(rng, 1, 6)));
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = uniform_real(rng, -800.0, 800.0);
    const ChoiceDistribution p = choice_probabilities_from_utilities(u);
    const double err = std::abs(p.item_probs.sum() + p.no_purchase_prob - 1.0);
    worst = std::max(worst, err);
    if (!(err <= 1e-12) || p.item_probs.minCoeff() < 0.0 || p.no_purchase_prob < 0.0) ++bad;
  }
  out.push_back(finish(simplex, 1000, bad, worst));
  return out;
}

std::vector<CheckResult> estimator_suite(std::uint64_t seed) {
  return {check_mle_stationarity(20, seed), check_g_identity(100, seed), check_g_ordering(200, seed),
          check_g_ordering_coordinatewise(200, seed)};
}

std::vector<CheckResult> confidence_suite(std::uint64_t seed) {
  std::vector<CheckResult> out{check_c_inside_e(10, 20, seed)};
  CheckResult mono = named("confidence", "gamma_nondecreasing");
  std::size_t bad = 0;
  ConfidenceConfig cfg;
  cfg.d = 3;
  cfg.K = 4;
  cfg.lambda = default_lambda(3, 4, 1000);
  for (std::size_t t = 1; t < 1000; ++t) {
    if (gamma_radius(cfg, t + 1) < gamma_radius(cfg, t)) ++bad;
  }
  out.push_back(finish(mono, 999, bad, 0.0));
  return out;
}

std::vector<CheckResult> policy_suite(std::uint64_t seed) {
  CheckResult count = named("policy", "enumeration_count");
  std::size_t bad = 0, trials = 0;
  for (std::size_t N = 1; N <= 10; ++N) {
    for (std::size_t K = 1; K <= N; ++K) {
      double expected = 0.0, binom = 1.0;
      for (std::size_t k = 1; k <= K; ++k) {
        binom = binom * static_cast<double>(N - k + 1) / static_cast<double>(k);
        expected += binom;
      }
      const auto sets = enumerate_assortments(N, K);
      ++trials;
      if (static_cast<double>(sets.size()) != expected) ++bad;
    }
  }
  std::vector<CheckResult> out{finish(count, trials, bad, 0.0)};

  CheckResult oracle = named("policy", "oracle_maximal");
  Rng rng = make_stream(seed, Stream::kCheck, 9);
  bad = 0;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const std::size_t d = uniform_size(rng, 1, 4), N = uniform_size(rng, 1, 7), K = uniform_size(rng, 1, N);
    Matrix pool(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < pool.rows(); ++i) pool.row(i) = sample_ball(d, 1.0, rng).transpose();
    Vector prices(static_cast<Eigen::Index>(N));
    for (Eigen::Index i = 0; i < prices.size(); ++i) prices[i] = uniform_real(rng, 0.5, 2.0);
    const Vector theta = sample_ball(d, 2.0, rng);
    const auto sets = enumerate_assortments(N, K);
    const double best = expected_revenue(Assortment::from_pool(pool, prices, oracle_assortment(pool, prices, theta, sets)), theta);
    for (const IndexSet& s : sets) {
      const double gap = expected_revenue(Assortment::from_pool(pool, prices, s), theta) - best;
      worst = std::max(worst, gap);
      if (gap > 1e-12) ++bad;
    }
  }
  out.push_back(finish(oracle, 100, bad, worst));
  return out;
}

std::vector<CheckResult> simulator_suite(std::uint64_t seed) {
  CheckResult inst = named("simulator", "instance_bounds_and_round_trip");
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::uint64_t s = seed; s < seed + 20; ++s) {
    InstanceConfig cfg;
    cfg.d = 1 + s % 4;
    cfg.N = 3 + s % 5;
    cfg.K = 1 + s % 3;
    cfg.S = 1.5;
    cfg.S_true = 1.0;
    cfg.context_mode = s % 2 ? ContextMode::kFixedPool : ContextMode::kFreshIid;
    const Instance a = make_instance(cfg, s);
    const Matrix ctx = serve_contexts(a, 3);
    worst = std::max(worst, a.theta_star.norm() - cfg.S_true);
    if (a.theta_star.norm() > cfg.S_true * (1 + 1e-12)) ++bad;
    if (ctx.rowwise().norm().maxCoeff() > 1.0 + 1e-12) ++bad;
    const std::string text = instance_to_json(a);
    if (instance_to_json(instance_from_json(text)) != text) ++bad;
    if (estimate_kappa(a, 32).value < 4.0) ++bad;
  }
  return {finish(inst, 20, bad, worst)};
}

std::vector<CheckResult> harness_suite(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.instance.d = 2;
  cfg.instance.N = 6;
  cfg.instance.K = 2;
  cfg.policy = PolicyKind::kCbMnlC;
  cfg.T = 60;
  const RunLog a = run_experiment(cfg, seed);
  const RunLog b = run_experiment(cfg, seed);

  CheckResult regret = named("harness", "regret_accounting");
  std::size_t bad = 0;
  double sum = 0.0, prev = 0.0;
  for (const RoundRecord& r : a.rounds) {
    sum += r.inst_regret;
    if (r.inst_regret < -1e-9 || r.cum_regret < prev) ++bad;
    prev = r.cum_regret;
  }
  if (std::abs(sum - a.total_regret) > 1e-9) ++bad;
  std::vector<CheckResult> out{finish(regret, a.rounds.size(), bad, std::abs(sum - a.total_regret))};

  CheckResult det = named("harness", "determinism");
  out.push_back(finish(det, 1, to_csv(a) == to_csv(b) ? 0 : 1, 0.0));

  CheckResult pot = named("harness", "elliptical_potential");
  const PotentialReport rep = elliptical_potential_check(a, a.history, cfg.L_const);
  out.push_back(finish(pot, 1, rep.holds() ? 0 : 1, rep.potential_J_bound - rep.potential_J));

  CheckResult io = named("harness", "csv_round_trip");
  std::istringstream in(to_csv(a));
  const RunLog back = read_csv(in);
  out.push_back(finish(io, 1, to_csv(back) == to_csv(a) ? 0 : 1, 0.0));
  return out;
}

}  // namespace

std::vector<CheckResult> run_check_suite(std::string_view suite, std::uint64_t seed) {
  if (suite == "mnl") return mnl_suite(seed);
  if (suite == "estimator") return estimator_suite(seed);
  if (suite == "confidence") return confidence_suite(seed);
  if (suite == "policy") return policy_suite(seed);
  if (suite == "simulator") return simulator_suite(seed);
  if (suite == "harness") return harness_suite(seed);
  if (suite == "all") {
    std::vector<CheckResult> out;
    for (std::string_view name : check_suite_names()) {
      if (name == "all") continue;
      auto part = run_check_suite(name, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw ConfigError("unknown check suite: " + std::string(suite));
}

std::string check_report_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json report;
  bool all = true;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const CheckResult& r : results) {
    all = all && r.passed;
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["name"] = r.name;
    j["passed"] = r.passed;
    j["trials"] = r.trials;
    j["violations"] = r.violations;
    j["worst"] = std::isfinite(r.worst) ? nlohmann::ordered_json(r.worst) : nlohmann::ordered_json(nullptr);
    if (!r.detail.empty()) j["detail"] = r.detail;
    list.push_back(std::move(j));
  }
  report["passed"] = all;
  report["checks"] = std::move(list);
  return report.dump(2);
}

}  // namespace cbmnl
