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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cbmnl/checks.hpp"
#include "cbmnl/harness.hpp"
#include "oracles.hpp"

using namespace cbmnl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  verdicts.push_back({id, title, pass, detail});
  std::printf("%s  C%-2d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

std::vector<double> utilities(const Assortment& a, const Vector& theta) {
  std::vector<double> u;
  for (Eigen::Index i = 0; i < a.contexts.rows(); ++i) u.push_back(a.contexts.row(i).dot(theta));
  return u;
}

// Penalized score from the reference softmax.
Vector reference_score(const History& h, const Vector& theta, double lambda) {
  Vector s = -lambda * theta;
  for (const Round& r : h.rounds()) {
    const auto p = oracle::softmax(utilities(r.assortment, theta));
    for (Eigen::Index i = 0; i < r.assortment.contexts.rows(); ++i) {
      const double reward = r.outcome == static_cast<std::size_t>(i) + 1 ? 1.0 : 0.0;
      s += (reward - static_cast<double>(p[static_cast<std::size_t>(i)])) * r.assortment.contexts.row(i).transpose();
    }
  }
  return s;
}

History prefix(const History& h, std::size_t n) {
  History out(h.dim());
  for (std::size_t i = 0; i < n && i < h.size(); ++i) out.append(h.rounds()[i].assortment, h.rounds()[i].outcome);
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ExperimentConfig base_config(PolicyKind policy, std::size_t T, const std::string& seeds) {
  ExperimentConfig c;
  c.instance.d = 2;
  c.instance.N = 8;
  c.instance.K = 2;
  c.instance.S = 1.0;
  c.instance.S_true = 1.0;
  c.instance.context_mode = ContextMode::kFixedPool;
  c.policy = policy;
  c.T = T;
  c.delta = 0.1;
  c.seeds = parse_seed_range(seeds);
  return c;
}

// Random draw with d <= 10, K <= 5 and a parameter of norm at most 3.
RandomDraw draw(Rng& rng) {
  const std::size_t d = 1 + rng() % 10, k = 1 + rng() % 5;
  return random_draw(d, k, 3.0, rng);
}

// ---------------------------------------------------------------------------

struct DerivativeReport {
  std::size_t draws = 0;
  std::size_t violations = 0;
  double worst = 0.0;
};

DerivativeReport derivative_identities(std::uint64_t seed) {
  Rng rng = make_stream(seed, Stream::kCheck, 1001);
  DerivativeReport r;
  for (r.draws = 0; r.draws < 10000; ++r.draws) {
    const RandomDraw d = draw(rng);
    const std::vector<double> u = utilities(d.assortment, d.theta);
    for (std::size_t i = 0; i < u.size(); ++i) {
      auto mu = [&](double ui) {
        std::vector<double> v = u;
        v[i] = ui;
        return static_cast<double>(oracle::softmax(v)[i]);
      };
      const double fd = oracle::central_difference(mu, u[i], 1e-5);
      const double exact = diag_derivative(d.assortment, d.theta, i);
      const double rel = std::abs(fd - exact) / std::abs(exact);
      r.worst = std::max(r.worst, rel);
      if (!(rel < 1e-6)) ++r.violations;
    }
  }
  return r;
}

void criterion1() {
  const auto start = Clock::now();
  const DerivativeReport r = derivative_identities(1);
  const double secs = seconds_since(start);
  report(1, "derivative identities", r.violations == 0 && secs < 5.0,
         fmt("%zu draws, %zu violations, max rel err %.2e, %.2f s (limit 5 s)", r.draws, r.violations, r.worst, secs));
}

DerivativeReport self_concordance(std::uint64_t seed) {
  Rng rng = make_stream(seed, Stream::kCheck, 1002);
  DerivativeReport r;
  for (r.draws = 0; r.draws < 10000; ++r.draws) {
    const RandomDraw d = draw(rng);
    for (std::size_t i = 0; i < d.assortment.size(); ++i) {
      const double first = diag_derivative(d.assortment, d.theta, i);
      const double second = diag_second_derivative(d.assortment, d.theta, i);
      r.worst = std::max(r.worst, std::abs(second) / first);
      if (std::abs(second) > first) ++r.violations;
    }
  }
  return r;
}

void criterion2() {
  const DerivativeReport r = self_concordance(1);
  report(2, "self-concordance", r.violations == 0,
         fmt("%zu draws, %zu violations, max |mu''|/mu' %.6f", r.draws, r.violations, r.worst));
}

// ---------------------------------------------------------------------------

std::vector<RunLog> consistency_runs;

void criterion3() {
  const auto start = Clock::now();
  Rng rng = make_stream(3, Stream::kCheck, 1003);
  double worst_score = 0.0;
  std::size_t score_failures = 0;
  for (int n = 0; n < 100; ++n) {
    const std::size_t d = 1 + rng() % 5, K = 1 + rng() % 5, T = 1 + rng() % 400;
    const History h = random_history(d, K, T, sample_ball(d, 2.0, rng), rng);
    const double lam = default_lambda(d, K, T);
    const MleResult fit = fit_mle(h, lam);
    const double norm = reference_score(h, fit.theta_hat, lam).norm();
    worst_score = std::max(worst_score, norm);
    if (!(norm <= 1e-8)) ++score_failures;
  }

  const ExperimentConfig cfg = base_config(PolicyKind::kRandom, 5000, "1..20");
  consistency_runs = run_seeds(cfg, jobs());
  const std::size_t checkpoints[] = {500, 1500, 5000};
  std::vector<double> medians;
  for (std::size_t n : checkpoints) {
    std::vector<double> errors;
    for (const RunLog& log : consistency_runs) {
      const MleResult fit = fit_mle(prefix(log.history, n), log.lambda);
      errors.push_back((fit.theta_hat - log.theta_star).norm());
    }
    medians.push_back(median(errors));
  }
  const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
  const double secs = seconds_since(start);
  report(3, "MLE stationarity and consistency", score_failures == 0 && decreasing && secs < 120.0,
         fmt("max score norm %.2e over 100 histories (%zu > 1e-8); median error %.4f / %.4f / %.4f at 500/1500/5000; "
             "%.1f s (limit 120 s)",
             worst_score, score_failures, medians[0], medians[1], medians[2], secs));
}

// ---------------------------------------------------------------------------

std::vector<RunLog> coverage_runs;
ExperimentConfig coverage_config;

void criterion4() {
  const auto start = Clock::now();
  coverage_config = base_config(PolicyKind::kCbMnlC, 500, "1..200");
  coverage_config.c_candidates = 128;
  coverage_runs = run_seeds(coverage_config, jobs());
  std::size_t covered_E = 0, covered_C = 0;
  for (const RunLog& log : coverage_runs) {
    covered_E += std::all_of(log.rounds.begin(), log.rounds.end(), [](const RoundRecord& r) { return r.covered_E; });
    covered_C += std::all_of(log.rounds.begin(), log.rounds.end(), [](const RoundRecord& r) { return r.covered_C; });
  }
  const double rate = static_cast<double>(covered_E) / static_cast<double>(coverage_runs.size());
  report(4, "coverage of E", rate >= 0.85,
         fmt("%zu/%zu runs keep theta* in E for all t (rate %.3f, need >= 0.85); C: %zu/%zu; policy cb_mnl_c; %.1f s",
             covered_E, coverage_runs.size(), rate, covered_C, coverage_runs.size(), seconds_since(start)));
}

void criterion5() {
  std::size_t members = 0, violations = 0, not_in_C = 0;
  double worst = -std::numeric_limits<double>::infinity();
  ConfidenceConfig ccfg;
  const std::size_t times[] = {50, 150, 250, 350, 450};
  for (std::size_t run = 0; run < 10; ++run) {
    const RunLog& log = coverage_runs[run];
    const Instance inst = make_instance(coverage_config.instance, log.seed);
    ccfg = coverage_config.confidence_config(inst);
    for (std::size_t t : times) {
      const History h = prefix(log.history, t - 1);
      const ConfidenceState state = make_confidence_state(h, ccfg, fit_mle(h, ccfg.lambda).theta_hat, t);
      std::size_t found = 0;
      for (std::uint64_t batch = 0; found < 20 && batch < 100; ++batch) {
        const std::vector<Vector> sample = sample_C_members(h, ccfg, state, 200, log.seed * 7919 + t * 31 + batch);
        for (std::size_t m = 1; m < sample.size() && found < 20; ++m, ++found) {
          ++members;
          if (!in_set_C(sample[m], h, ccfg, state)) ++not_in_C;
          worst = std::max(worst, loss_gap(sample[m], h, ccfg, state) - state.beta * state.beta);
          if (!in_set_E(sample[m], h, ccfg, state)) ++violations;
        }
      }
    }
  }
  report(5, "C inside E", members == 1000 && violations == 0 && not_in_C == 0,
         fmt("%zu C members over 50 snapshots, %zu outside E, worst loss gap - beta^2 = %.3f", members, violations,
             worst));
}

void criterion6() {
  std::size_t covered = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const RunLog& log : coverage_runs) {
    for (const RoundRecord& r : log.rounds) {
      if (!r.covered) continue;
      ++covered;
      worst_ratio = std::max(worst_ratio, r.dev_H / r.dev_bound);
      if (r.dev_H > r.dev_bound) ++violations;
    }
  }
  report(6, "deviation bound", violations == 0 && covered > 0,
         fmt("%zu covered rounds, %zu violations, max dev_H / bound %.4f", covered, violations, worst_ratio));
}

// ---------------------------------------------------------------------------

std::vector<RunLog> regret_runs_E;
std::vector<RunLog> regret_runs_random;

void criterion7() {
  std::size_t runs = 0, failures = 0;
  double min_pot = std::numeric_limits<double>::infinity(), min_det = std::numeric_limits<double>::infinity();
  for (const auto* group : {&consistency_runs, &coverage_runs, &regret_runs_E, &regret_runs_random}) {
    for (const RunLog& log : *group) {
      const PotentialReport r = elliptical_potential_check(log, log.history, 0.25);
      ++runs;
      if (!r.holds()) ++failures;
      min_pot = std::min({min_pot, r.potential_J_bound - r.potential_J, r.potential_V_bound - r.potential_V});
      min_det = std::min({min_det, r.log_det_V_bound - r.log_det_V, r.log_det_J_bound - r.log_det_J});
    }
  }
  report(7, "elliptical potential and determinant-trace", failures == 0 && runs > 0,
         fmt("%zu runs, %zu failing; min potential slack %.4f, min log-det slack %.4f", runs, failures, min_pot,
             min_det));
}

// ---------------------------------------------------------------------------

struct OrderingReport {
  std::size_t configs = 0;
  std::size_t violations = 0;
  double worst = std::numeric_limits<double>::infinity();
};

OrderingReport g_ordering(std::uint64_t seed) {
  Rng rng = make_stream(seed, Stream::kCheck, 1008);
  std::uniform_real_distribution<double> unit;
  OrderingReport r;
  for (r.configs = 0; r.configs < 200; ++r.configs) {
    const std::size_t d = 1 + rng() % 5, K = 1 + rng() % 5, T = 1 + rng() % 60;
    const double S = 0.1 + 2.9 * unit(rng);
    const double lam = default_lambda(d, K, T);
    const History h = random_history(d, K, T, sample_ball(d, S, rng), rng);
    const Vector t1 = sample_ball(d, S, rng), t2 = sample_ball(d, S, rng);
    const Matrix G = matrix_G(h, t1, t2, lam);
    double e = std::numeric_limits<double>::infinity();
    for (const Vector* t : {&t1, &t2}) {
      const Matrix diff = G - matrix_H(h, *t, lam) / (1.0 + 2.0 * S);
      Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (diff + diff.transpose()), Eigen::EigenvaluesOnly);
      e = std::min(e, solver.eigenvalues().minCoeff());
    }
    r.worst = std::min(r.worst, e);
    if (e < -1e-9) ++r.violations;
  }
  return r;
}

void criterion8() {
  const OrderingReport r = g_ordering(8);
  const CheckResult coord = check_g_ordering_coordinatewise(200, 8);
  report(8, "G versus H ordering", r.violations == 0,
         fmt("%zu/%zu configurations below -1e-9, min eigenvalue %.4g", r.violations, r.configs, r.worst));
  std::printf("      info: coordinatewise alpha variant: %zu/%zu below -1e-9, min eigenvalue %.4g\n", coord.violations,
              coord.trials, coord.worst);
}

// ---------------------------------------------------------------------------

ExperimentConfig regret_config_E;
ExperimentConfig regret_config_random;

void criterion9() {
  regret_config_E = base_config(PolicyKind::kCbMnlE, 3000, "1..20");
  regret_config_E.restarts = 1;
  regret_config_random = base_config(PolicyKind::kRandom, 3000, "1..20");
  const auto start = Clock::now();
  regret_runs_E = run_seeds(regret_config_E, jobs());
  const double secs_E = seconds_since(start);
  regret_runs_random = run_seeds(regret_config_random, jobs());
  const double secs = seconds_since(start);
  const RunSummary e = summarize_runs(regret_runs_E);
  const RunSummary r = summarize_runs(regret_runs_random);
  const double ratio = e.mean_cum_regret.back() / r.mean_cum_regret.back();
  const bool pass = e.loglog_slope <= 0.75 && ratio <= 0.6 && secs < 900.0;
  report(9, "regret behaviour", pass,
         fmt("CB-MNL(E) mean regret %.2f vs random %.2f (ratio %.3f, need <= 0.6); log-log slope %.3f on [T/2, T] "
             "(need <= 0.75); %.0f s (CB-MNL %.0f s, limit 900 s)",
             e.mean_cum_regret.back(), r.mean_cum_regret.back(), ratio, e.loglog_slope, secs, secs_E));
}

// ---------------------------------------------------------------------------

void criterion10() {
  std::size_t compared = 0, mismatches = 0;
  auto same_csv = [&](const ExperimentConfig& cfg, const RunLog& first) {
    ++compared;
    if (to_csv(run_experiment(cfg, first.seed)) != to_csv(first)) ++mismatches;
  };
  same_csv(base_config(PolicyKind::kRandom, 5000, "1"), consistency_runs.front());
  same_csv(coverage_config, coverage_runs.front());
  same_csv(coverage_config, coverage_runs.back());
  same_csv(regret_config_E, regret_runs_E.front());
  same_csv(regret_config_random, regret_runs_random.front());

  auto same_value = [&](bool equal) {
    ++compared;
    if (!equal) ++mismatches;
  };
  const DerivativeReport d1 = derivative_identities(1), d2 = derivative_identities(1);
  same_value(d1.worst == d2.worst && d1.violations == d2.violations);
  const DerivativeReport s1 = self_concordance(1), s2 = self_concordance(1);
  same_value(s1.worst == s2.worst);
  const OrderingReport o1 = g_ordering(8), o2 = g_ordering(8);
  same_value(o1.worst == o2.worst && o1.violations == o2.violations);
  report(10, "determinism", mismatches == 0,
         fmt("%zu re-runs (5 byte-compared CSVs, 3 property sweeps), %zu mismatches", compared, mismatches));
}

}  // namespace

int main() {
  std::printf("cbmnl %s acceptance suite\n", std::string(library_version()).c_str());
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion9();
  criterion7();
  criterion8();
  criterion10();
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::size_t passed = 0;
  std::printf("\nsummary\n");
  for (const Verdict& v : verdicts) {
    passed += v.pass;
    std::printf("%s  C%-2d %s\n", v.pass ? "PASS" : "FAIL", v.id, v.title.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", passed, verdicts.size());
  return passed == verdicts.size() ? 0 : 1;
}
