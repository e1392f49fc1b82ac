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

#include "cbmnl/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbmnl {

void ConfidenceConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (!(S >= 0.0) || !std::isfinite(S)) throw ConfigError("S must be nonnegative");
  if (!(L_const > 0.0 && L_const <= 1.0)) throw ConfigError("L_const must lie in (0, 1]");
  if (d == 0 || K == 0) throw ConfigError("d and K must be positive");
}

double default_lambda(std::size_t d, std::size_t K, std::size_t horizon) {
  const double kt = static_cast<double>(K) * static_cast<double>(std::max<std::size_t>(horizon, 1));
  return std::max(1.0, static_cast<double>(d) * std::log(kt));
}

double gamma_radius(const ConfidenceConfig& cfg, std::size_t t) {
  if (t < 1) throw ConfigError("gamma_radius needs t >= 1");
  const double d = static_cast<double>(cfg.d);
  const double lam = cfg.lambda;
  const double root = std::sqrt(lam);
  // log((lam + L K t / d)^{d/2} lam^{-d/2} / delta), expanded to stay finite
  // for large d.
  const double growth = 1.0 + cfg.L_const * static_cast<double>(cfg.K) * static_cast<double>(t) / (d * lam);
  const double log_term = 0.5 * d * std::log(growth) - std::log(cfg.delta);
  return root / 2.0 + (2.0 / root) * log_term + (2.0 * d / root) * std::log(2.0);
}

double beta_radius(double gamma, double lambda) {
  if (gamma < 0.0) throw ConfigError("gamma must be nonnegative");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  return gamma + gamma * gamma / lambda;
}

bool in_parameter_ball(const Vector& theta, double S) {
  return theta.norm() <= S * (1.0 + 1e-12) + 1e-15;
}

ConfidenceState make_confidence_state(const History& history, const ConfidenceConfig& cfg,
                                      const Vector& theta_hat, std::size_t t) {
  cfg.validate();
  ConfidenceState s;
  s.t = t;
  s.theta_hat = theta_hat;
  s.gamma = gamma_radius(cfg, t);
  s.beta = beta_radius(s.gamma, cfg.lambda);
  s.H_hat = matrix_H(history, theta_hat, cfg.lambda);
  s.V = matrix_V(history, cfg.lambda);
  s.g_hat = g_vector(history, theta_hat, cfg.lambda);
  s.loss_at_hat = -penalized_log_likelihood(history, theta_hat, cfg.lambda);
  const double norm = theta_hat.norm();
  s.anchor = (norm <= cfg.S || norm == 0.0) ? theta_hat : Vector(theta_hat * (cfg.S / norm));
  s.anchor_gap = -penalized_log_likelihood(history, s.anchor, cfg.lambda) - s.loss_at_hat;
  return s;
}

double c_set_statistic(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
                       const ConfidenceState& state) {
  const Vector diff = g_vector(history, theta, cfg.lambda) - state.g_hat;
  const Matrix h = matrix_H(history, theta, cfg.lambda);
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) throw Error("H(theta) is not positive definite");
  return std::sqrt(std::max(0.0, diff.dot(llt.solve(diff))));
}

double loss_gap(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
                const ConfidenceState& state) {
  return -penalized_log_likelihood(history, theta, cfg.lambda) - state.loss_at_hat;
}

bool in_set_C(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
              const ConfidenceState& state) {
  if (!in_parameter_ball(theta, cfg.S)) return false;
  return c_set_statistic(theta, history, cfg, state) <= state.gamma;
}

bool in_set_E(const Vector& theta, const History& history, const ConfidenceConfig& cfg,
              const ConfidenceState& state) {
  if (!in_parameter_ball(theta, cfg.S)) return false;
  return loss_gap(theta, history, cfg, state) <= state.beta * state.beta;
}

Vector pull_back_to_E(const Vector& from, const Vector& to, const History& history,
                      const ConfidenceConfig& cfg, const ConfidenceState& state) {
  const Vector dir = to - from;
  const double a = dir.squaredNorm();
  if (a == 0.0) return from;

  // Largest s in [0, 1] with |from + s dir| <= S.
  double s_max = 1.0;
  if (to.norm() > cfg.S) {
    const double b = 2.0 * from.dot(dir);
    const double c = from.squaredNorm() - cfg.S * cfg.S;
    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    s_max = std::clamp((-b + std::sqrt(disc)) / (2.0 * a), 0.0, 1.0);
  }

  const double level = state.beta * state.beta;
  auto excess = [&](double s) {
    return loss_gap(Vector(from + s * dir), history, cfg, state) - level;
  };

  double hi = s_max;
  double f_hi = excess(hi);
  if (f_hi <= 0.0) return from + hi * dir;
  double lo = 0.0;
  const bool at_anchor = from.size() == state.anchor.size() && from == state.anchor;
  double f_lo = at_anchor ? state.anchor_gap - level : excess(lo);
  if (f_lo > 0.0) return from;

  // Illinois false position; the excess is convex along the segment with a
  // single sign change, and `lo` always stays feasible.
  int side = 0;
  for (int iter = 0; iter < 100 && hi - lo > 1e-12; ++iter) {
    const double s = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    const double f = excess(s);
    if (f <= 0.0) {
      lo = s;
      f_lo = f;
      if (f > -1e-8 * std::max(1.0, level)) break;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = s;
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  return from + lo * dir;
}

namespace {

InnerMaximum ascend(const Assortment& assortment, const History& history, const ConfidenceConfig& cfg,
                    const ConfidenceState& state, Vector theta, const AscentOptions& options) {
  double value = expected_revenue(assortment, theta);
  double step = options.initial_step;
  for (int iter = 0; iter < options.max_iterations && step >= options.min_step; ++iter) {
    const Vector grad = revenue_gradient(assortment, theta);
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) break;
    const Vector candidate = pull_back_to_E(state.anchor, theta + (step / gnorm) * grad, history, cfg, state);
    const double candidate_value = expected_revenue(assortment, candidate);
    if (candidate_value > value) {
      theta = candidate;
      value = candidate_value;
    } else {
      step *= 0.5;
    }
  }
  return {value, theta};
}

}  // namespace

InnerMaximum max_revenue_over_E(const Assortment& assortment, const History& history,
                                const ConfidenceConfig& cfg, const ConfidenceState& state,
                                int restarts, std::uint64_t seed, const AscentOptions& options) {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  check_dimension(assortment, state.anchor);
  InnerMaximum best{expected_revenue(assortment, state.anchor), state.anchor};
  if (assortment.size() == 0) return best;
  if (!in_set_E(state.anchor, history, cfg, state)) return best;

  Rng rng = make_stream(seed, Stream::kPolicy, 0);
  for (int r = 0; r < restarts; ++r) {
    Vector start = state.anchor;
    if (r > 0) {
      const Vector target = state.anchor + sample_ball(history.dim(), cfg.S, rng);
      start = pull_back_to_E(state.anchor, target, history, cfg, state);
    }
    const InnerMaximum local = ascend(assortment, history, cfg, state, start, options);
    if (local.value > best.value) best = local;
  }
  return best;
}

}  // namespace cbmnl
