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

#ifndef CBMNL_MNL_HPP_
#define CBMNL_MNL_HPP_

#include <span>

#include "cbmnl/types.hpp"

namespace cbmnl {

// The items offered in one round, with their contexts (one row per item) and
// prices. Item order is the order of `items`; outcome k >= 1 refers to row k-1.
struct Assortment {
  IndexSet items;
  Matrix contexts;  // |items| x d
  Vector prices;    // |items|, default 1

  std::size_t size() const { return items.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(contexts.cols()); }

  // Rows `idx` of `pool`; prices default to 1 when `prices` is empty.
  static Assortment from_pool(const Matrix& pool, const Vector& prices, std::span<const std::size_t> idx);
  static Assortment empty(std::size_t d);
};

struct ChoiceDistribution {
  Vector item_probs;
  double no_purchase_prob = 1.0;
};

// Softmax with an outside option of utility 0, shifted by max(0, max u).
ChoiceDistribution choice_probabilities_from_utilities(const Vector& utilities);

ChoiceDistribution choice_probabilities(const Assortment& assortment, const Vector& theta);

// Sum of price * purchase probability.
double expected_revenue(const Assortment& assortment, const Vector& theta);

// mu_i (1 - mu_i): derivative of mu_i along its own utility.
double diag_derivative(const Assortment& assortment, const Vector& theta, std::size_t position);

// mu_i (1 - mu_i)(1 - 2 mu_i).
double diag_second_derivative(const Assortment& assortment, const Vector& theta, std::size_t position);

// 0 = no purchase, k = k-th offered item.
std::size_t sample_choice(const ChoiceDistribution& dist, Rng& rng);

// Gradient of expected_revenue with respect to theta.
Vector revenue_gradient(const Assortment& assortment, const Vector& theta);

void check_dimension(const Assortment& assortment, const Vector& theta);

}  // namespace cbmnl

#endif  // CBMNL_MNL_HPP_
