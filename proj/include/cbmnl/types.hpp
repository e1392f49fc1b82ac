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

#ifndef CBMNL_TYPES_HPP_
#define CBMNL_TYPES_HPP_

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cbmnl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Sorted, 0-based item indices of one assortment.
using IndexSet = std::vector<std::size_t>;

// Single random engine type used everywhere; streams are derived with
// make_stream so that runs, rounds and purposes never share state.
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Purposes for derived random streams.
enum class Stream : std::uint64_t {
  kInstance = 1,
  kContexts = 2,
  kEnvironment = 3,
  kPolicy = 4,
  kKappa = 5,
  kCheck = 6,
};

inline Rng make_stream(std::uint64_t seed, Stream purpose, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(index & 0xffffffffu),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// Uniform draw from the d-dimensional ball of the given radius: normalized
// Gaussian direction with radius scaled by U^{1/d}.
inline Vector sample_ball(std::size_t d, double radius, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  double n2 = 0.0;
  do {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
    n2 = v.squaredNorm();
  } while (n2 == 0.0 && d > 0);
  if (d == 0) return v;
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
  return v * (r / std::sqrt(n2));
}

}  // namespace cbmnl

#endif  // CBMNL_TYPES_HPP_
