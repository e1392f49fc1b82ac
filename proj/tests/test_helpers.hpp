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

#ifndef CBMNL_TESTS_HELPERS_HPP_
#define CBMNL_TESTS_HELPERS_HPP_

#include <initializer_list>

#include "cbmnl/mnl.hpp"

namespace testing {

inline cbmnl::Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  const auto k = static_cast<Eigen::Index>(values.size());
  const auto d = k == 0 ? 1 : static_cast<Eigen::Index>(values.begin()->size());
  cbmnl::Matrix m(k, d);
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline cbmnl::Assortment offer(const cbmnl::Matrix& contexts) {
  cbmnl::IndexSet idx(static_cast<std::size_t>(contexts.rows()));
  for (std::size_t n = 0; n < idx.size(); ++n) idx[n] = n;
  return cbmnl::Assortment::from_pool(contexts, cbmnl::Vector(), idx);
}

inline cbmnl::Vector vec(std::initializer_list<double> v) {
  cbmnl::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace testing

#endif  // CBMNL_TESTS_HELPERS_HPP_
