/*
 * Copyright 2026 The fragdb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace fragdb {

// Query answer. Grouped results hold one (key, aggregate) pair per group in
// ascending key order; ungrouped results hold projected rows (a bag) sorted
// lexicographically.
struct ResultSet {
  bool grouped = true;
  bool real = false;  // aggregate values live in `reals` instead of `ints`
  std::vector<std::uint32_t> keys;
  std::vector<std::int64_t> ints;
  std::vector<double> reals;
  std::size_t width = 0;            // ungrouped: columns per row
  std::vector<std::uint32_t> cells;  // ungrouped: row-major

  std::size_t size() const { return grouped ? keys.size() : (width ? cells.size() / width : 0); }
  double value(std::size_t i) const { return real ? reals[i] : static_cast<double>(ints[i]); }

  // Sorts rows of an ungrouped result into canonical order.
  void canonicalize();
  bool operator==(const ResultSet&) const = default;
};

// Empty optional when equal: integers exactly, reals within relative tolerance.
std::optional<std::string> compare_results(const ResultSet& expected, const ResultSet& actual,
                                           double rel_tol = 1e-9);

// Indices of the k largest aggregates, ties broken by ascending key.
std::vector<std::size_t> top_k(const ResultSet& r, std::size_t k);

// Dense aggregation state: one accumulator and one seen flag per group key.
template <class Acc>
struct DenseAggState {
  std::vector<Acc> acc;
  std::vector<std::uint8_t> seen;
};

template <class Acc>
ResultSet collect(const DenseAggState<Acc>& state) {
  ResultSet r;
  r.real = std::is_floating_point_v<Acc>;
  for (std::size_t g = 0; g < state.seen.size(); ++g) {
    if (!state.seen[g]) continue;
    r.keys.push_back(static_cast<std::uint32_t>(g));
    if constexpr (std::is_floating_point_v<Acc>) {
      r.reals.push_back(static_cast<double>(state.acc[g]));
    } else {
      r.ints.push_back(static_cast<std::int64_t>(state.acc[g]));
    }
  }
  return r;
}

}  // namespace fragdb
