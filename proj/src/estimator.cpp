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

#include "cbmnl/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace cbmnl {

namespace {

std::string group_key(const Assortment& a) {
  std::string key;
  const std::size_t n = static_cast<std::size_t>(a.contexts.size());
  key.resize(sizeof(std::size_t) + n * sizeof(double));
  const std::size_t rows = a.size();
  std::memcpy(key.data(), &rows, sizeof(std::size_t));
  // Column-major storage; rows and dim are fixed per key length.
  std::memcpy(key.data() + sizeof(std::size_t), a.contexts.data(), n * sizeof(double));
  return key;
}

// log(1 + sum exp(u)), shifted.
double log_partition(const Vector& u) {
  const double shift = u.size() > 0 ? std::max(0.0, u.maxCoeff()) : 0.0;
  return shift + std::log(std::exp(-shift) + (u.array() - shift).exp().sum());
}

void check_theta(const History& h, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != h.dim()) {
    throw DimensionError("parameter dimension " + std::to_string(theta.size()) +
                         " does not match history dimension " + std::to_string(h.dim()));
  }
}

void check_lambda(double lambda, bool allow_zero) {
  if (!(lambda > 0.0 || (allow_zero && lambda == 0.0)) || !std::isfinite(lambda)) {
    throw ConfigError("regularization lambda must be positive, got " + std::to_string(lambda));
  }
}

}  // namespace

History::History(std::size_t dim)
    : dim_(dim),
      gram_(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))),
      chosen_sum_(Vector::Zero(static_cast<Eigen::Index>(dim))) {}

void History::append(Assortment assortment, std::size_t outcome) {
  if (assortment.dim() != dim_ && assortment.size() > 0) {
    throw DimensionError("assortment dimension " + std::to_string(assortment.dim()) +
                         " does not match history dimension " + std::to_string(dim_));
  }
  if (assortment.size() == 0) assortment.contexts.resize(0, static_cast<Eigen::Index>(dim_));
  if (outcome > assortment.size()) {
    throw IndexError("outcome " + std::to_string(outcome) + " exceeds assortment size " +
                     std::to_string(assortment.size()));
  }

  const std::string key = group_key(assortment);
  auto it = group_index_.find(key);
  if (it == group_index_.end()) {
    ChoiceGroup g;
    g.contexts = assortment.contexts;
    g.outcome_counts = Vector::Zero(static_cast<Eigen::Index>(assortment.size()) + 1);
    g.chosen_sum = Vector::Zero(static_cast<Eigen::Index>(dim_));
    g.gram = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (Eigen::Index i = 0; i < assortment.contexts.rows(); ++i) {
      const Vector x = assortment.contexts.row(i).transpose();
      std::string ckey(static_cast<std::size_t>(x.size()) * sizeof(double), '\0');
      std::memcpy(ckey.data(), x.data(), ckey.size());
      auto cit = context_index_.find(ckey);
      if (cit == context_index_.end()) {
        const auto id = static_cast<Eigen::Index>(context_table_.size() / std::max<std::size_t>(dim_, 1));
        context_table_.insert(context_table_.end(), x.data(), x.data() + x.size());
        cit = context_index_.emplace(std::move(ckey), id).first;
      }
      g.context_ids.push_back(cit->second);
    }
    groups_.push_back(std::move(g));
    it = group_index_.emplace(key, groups_.size() - 1).first;
  }
  ChoiceGroup& g = groups_[it->second];
  const Matrix outer = assortment.contexts.transpose() * assortment.contexts;
  g.rounds += 1.0;
  g.outcome_counts[static_cast<Eigen::Index>(outcome)] += 1.0;
  g.gram += outer;
  gram_ += outer;
  if (outcome > 0) {
    const Vector x = assortment.contexts.row(static_cast<Eigen::Index>(outcome) - 1).transpose();
    g.chosen_sum += x;
    chosen_sum_ += x;
  }
  rounds_.push_back(Round{std::move(assortment), outcome});
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
History::context_table() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  const auto rows = d == 0 ? 0 : static_cast<Eigen::Index>(context_table_.size()) / d;
  return {context_table_.data(), rows, d};
}

double penalized_log_likelihood(const History& history, const Vector& theta, double lambda) {
  check_theta(history, theta);
  check_lambda(lambda, true);
  double ll = history.chosen_sum().dot(theta) - 0.5 * lambda * theta.squaredNorm();
  if (history.groups().empty()) return ll;
  // Exponentiate each distinct context once; groups only add and take logs.
  const Vector u = history.context_table() * theta;
  const double shift = std::max(0.0, u.maxCoeff());
  const Vector e = (u.array() - shift).exp().matrix();
  const double outside = std::exp(-shift);
  for (const ChoiceGroup& g : history.groups()) {
    double z = outside;
    for (Eigen::Index id : g.context_ids) z += e[id];
    const double lse = z > 1e-280 ? shift + std::log(z) : log_partition(g.contexts * theta);
    ll -= g.rounds * lse;
  }
  return ll;
}

Vector score(const History& history, const Vector& theta, double lambda) {
  check_theta(history, theta);
  check_lambda(lambda, true);
  Vector s = history.chosen_sum() - lambda * theta;
  for (const ChoiceGroup& g : history.groups()) {
    const ChoiceDistribution dist = choice_probabilities_from_utilities(g.contexts * theta);
    s.noalias() -= g.rounds * (g.contexts.transpose() * dist.item_probs);
  }
  return s;
}

Vector g_vector(const History& history, const Vector& theta, double lambda) {
  check_theta(history, theta);
  check_lambda(lambda, true);
  Vector out = lambda * theta;
  for (const ChoiceGroup& g : history.groups()) {
    const ChoiceDistribution dist = choice_probabilities_from_utilities(g.contexts * theta);
    out.noalias() += g.rounds * (g.contexts.transpose() * dist.item_probs);
  }
  return out;
}

Matrix fisher_information(const History& history, const Vector& theta, double lambda) {
  check_theta(history, theta);
  check_lambda(lambda, true);
  const auto d = static_cast<Eigen::Index>(history.dim());
  Matrix info = lambda * Matrix::Identity(d, d);
  for (const ChoiceGroup& g : history.groups()) {
    const ChoiceDistribution dist = choice_probabilities_from_utilities(g.contexts * theta);
    const Vector mean = g.contexts.transpose() * dist.item_probs;
    info.noalias() += g.rounds * (g.contexts.transpose() * dist.item_probs.asDiagonal() * g.contexts);
    info.noalias() -= g.rounds * (mean * mean.transpose());
  }
  return info;
}

MleResult fit_mle(const History& history, double lambda, double tol, int max_iter) {
  check_lambda(lambda, false);
  if (!(tol > 0.0)) throw ConfigError("MLE tolerance must be positive");
  MleResult result;
  result.theta_hat = Vector::Zero(static_cast<Eigen::Index>(history.dim()));
  Vector grad = score(history, result.theta_hat, lambda);
  double objective = penalized_log_likelihood(history, result.theta_hat, lambda);
  result.score_norm = grad.norm();
  while (result.score_norm > tol && result.iterations < max_iter) {
    ++result.iterations;
    const Matrix info = fisher_information(history, result.theta_hat, lambda);
    const Vector step = info.llt().solve(grad);
    // Near the optimum the objective change drops below its rounding error;
    // tolerate that much so full Newton steps are not halved into stagnation.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(objective));
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Vector trial = result.theta_hat + scale * step;
      const double trial_objective = penalized_log_likelihood(history, trial, lambda);
      if (trial_objective >= objective - slack) {
        result.theta_hat = trial;
        objective = trial_objective;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    grad = score(history, result.theta_hat, lambda);
    result.score_norm = grad.norm();
    if (!improved) break;
  }
  result.converged = result.score_norm <= tol;
  return result;
}

Matrix matrix_H(const History& history, const Vector& theta, double lambda) {
  check_theta(history, theta);
  check_lambda(lambda, false);
  const auto d = static_cast<Eigen::Index>(history.dim());
  Matrix h = lambda * Matrix::Identity(d, d);
  for (const ChoiceGroup& g : history.groups()) {
    const ChoiceDistribution dist = choice_probabilities_from_utilities(g.contexts * theta);
    const Vector w = g.rounds * dist.item_probs.cwiseProduct((1.0 - dist.item_probs.array()).matrix());
    h.noalias() += g.contexts.transpose() * w.asDiagonal() * g.contexts;
  }
  return h;
}

Matrix matrix_V(const History& history, double lambda) {
  check_lambda(lambda, false);
  const auto d = static_cast<Eigen::Index>(history.dim());
  return history.gram() + lambda * Matrix::Identity(d, d);
}

Matrix matrix_G(const History& history, const Vector& theta1, const Vector& theta2, double lambda) {
  check_theta(history, theta1);
  check_theta(history, theta2);
  check_lambda(lambda, false);
  const auto d = static_cast<Eigen::Index>(history.dim());
  Matrix out = lambda * Matrix::Identity(d, d);
  const Vector diff = theta2 - theta1;
  for (const ChoiceGroup& g : history.groups()) {
    const ChoiceDistribution p1 = choice_probabilities_from_utilities(g.contexts * theta1);
    const ChoiceDistribution p2 = choice_probabilities_from_utilities(g.contexts * theta2);
    const Vector proj = g.contexts * diff;
    Vector alpha(proj.size());
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
      if (std::abs(proj[i]) < kAlphaFallbackThreshold) {
        alpha[i] = p1.item_probs[i] * (1.0 - p1.item_probs[i]);
      } else {
        alpha[i] = (p2.item_probs[i] - p1.item_probs[i]) / proj[i];
      }
    }
    out.noalias() += g.rounds * (g.contexts.transpose() * alpha.asDiagonal() * g.contexts);
  }
  return out;
}

}  // namespace cbmnl
