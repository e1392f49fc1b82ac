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

#include "cbmnl/mnl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbmnl {

Assortment Assortment::from_pool(const Matrix& pool, const Vector& prices, std::span<const std::size_t> idx) {
  Assortment a;
  a.items.assign(idx.begin(), idx.end());
  a.contexts.resize(static_cast<Eigen::Index>(idx.size()), pool.cols());
  a.prices = Vector::Ones(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= static_cast<std::size_t>(pool.rows())) {
      throw IndexError("item index " + std::to_string(idx[k]) + " outside pool of " +
                       std::to_string(pool.rows()));
    }
    a.contexts.row(static_cast<Eigen::Index>(k)) = pool.row(static_cast<Eigen::Index>(idx[k]));
    if (prices.size() > 0) a.prices[static_cast<Eigen::Index>(k)] = prices[static_cast<Eigen::Index>(idx[k])];
  }
  return a;
}

Assortment Assortment::empty(std::size_t d) {
  Assortment a;
  a.contexts.resize(0, static_cast<Eigen::Index>(d));
  a.prices.resize(0);
  return a;
}

void check_dimension(const Assortment& assortment, const Vector& theta) {
  if (assortment.contexts.cols() != theta.size()) {
    throw DimensionError("context dimension " + std::to_string(assortment.contexts.cols()) +
                         " does not match parameter dimension " + std::to_string(theta.size()));
  }
  if (assortment.prices.size() != assortment.contexts.rows() ||
      assortment.items.size() != static_cast<std::size_t>(assortment.contexts.rows())) {
    throw DimensionError("assortment items, contexts and prices disagree in length");
  }
}

ChoiceDistribution choice_probabilities_from_utilities(const Vector& utilities) {
  ChoiceDistribution dist;
  const double shift = utilities.size() > 0 ? std::max(0.0, utilities.maxCoeff()) : 0.0;
  dist.item_probs = (utilities.array() - shift).exp().matrix();
  const double outside = std::exp(-shift);
  const double z = outside + dist.item_probs.sum();
  dist.item_probs /= z;
  dist.no_purchase_prob = outside / z;
  return dist;
}

ChoiceDistribution choice_probabilities(const Assortment& assortment, const Vector& theta) {
  check_dimension(assortment, theta);
  return choice_probabilities_from_utilities(assortment.contexts * theta);
}

double expected_revenue(const Assortment& assortment, const Vector& theta) {
  const ChoiceDistribution dist = choice_probabilities(assortment, theta);
  return assortment.prices.dot(dist.item_probs);
}

namespace {

double item_prob(const Assortment& assortment, const Vector& theta, std::size_t position) {
  if (position >= assortment.size()) {
    throw IndexError("position " + std::to_string(position) + " outside assortment of size " +
                     std::to_string(assortment.size()));
  }
  return choice_probabilities(assortment, theta).item_probs[static_cast<Eigen::Index>(position)];
}

}  // namespace

double diag_derivative(const Assortment& assortment, const Vector& theta, std::size_t position) {
  const double mu = item_prob(assortment, theta, position);
  return mu * (1.0 - mu);
}

double diag_second_derivative(const Assortment& assortment, const Vector& theta, std::size_t position) {
  const double mu = item_prob(assortment, theta, position);
  return mu * (1.0 - mu) * (1.0 - 2.0 * mu);
}

std::size_t sample_choice(const ChoiceDistribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = dist.no_purchase_prob;
  if (u < acc) return 0;
  for (Eigen::Index k = 0; k < dist.item_probs.size(); ++k) {
    acc += dist.item_probs[k];
    if (u < acc) return static_cast<std::size_t>(k) + 1;
  }
  // Rounding left u above the accumulated mass; give it to the last
  // outcome with positive probability.
  for (Eigen::Index k = dist.item_probs.size(); k > 0; --k) {
    if (dist.item_probs[k - 1] > 0.0) return static_cast<std::size_t>(k);
  }
  return 0;
}

Vector revenue_gradient(const Assortment& assortment, const Vector& theta) {
  const ChoiceDistribution dist = choice_probabilities(assortment, theta);
  const Vector mean_context = assortment.contexts.transpose() * dist.item_probs;
  const double revenue = assortment.prices.dot(dist.item_probs);
  const Vector weighted = dist.item_probs.cwiseProduct(assortment.prices);
  return assortment.contexts.transpose() * weighted - revenue * mean_context;
}

}  // namespace cbmnl
