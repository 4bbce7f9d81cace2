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


#include "fragdb/result.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fragdb {

void ResultSet::canonicalize() {
  if (grouped || width == 0) return;
  const std::size_t n = cells.size() / width;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(cells.begin() + a * width, cells.begin() + (a + 1) * width,
                                        cells.begin() + b * width, cells.begin() + (b + 1) * width);
  });
  std::vector<std::uint32_t> sorted;
  sorted.reserve(cells.size());
  for (auto i : order) sorted.insert(sorted.end(), cells.begin() + i * width, cells.begin() + (i + 1) * width);
  cells = std::move(sorted);
}

std::optional<std::string> compare_results(const ResultSet& e, const ResultSet& a, double rel_tol) {
  if (e.grouped != a.grouped) return "grouped/ungrouped mismatch";
  if (!e.grouped) {
    if (e.width != a.width) return "row width " + std::to_string(e.width) + " vs " + std::to_string(a.width);
    if (e.cells != a.cells)
      return "rows differ (" + std::to_string(e.size()) + " vs " + std::to_string(a.size()) + " rows)";
    return std::nullopt;
  }
  if (e.keys.size() != a.keys.size())
    return "group count " + std::to_string(e.keys.size()) + " vs " + std::to_string(a.keys.size());
  for (std::size_t i = 0; i < e.keys.size(); ++i) {
    if (e.keys[i] != a.keys[i])
      return "group " + std::to_string(i) + ": key " + std::to_string(e.keys[i]) + " vs " + std::to_string(a.keys[i]);
    if (!e.real && !a.real) {
      if (e.ints[i] != a.ints[i])
        return "key " + std::to_string(e.keys[i]) + ": " + std::to_string(e.ints[i]) + " vs " + std::to_string(a.ints[i]);
      continue;
    }
    const double x = e.value(i), y = a.value(i);
    const double scale = std::max({std::fabs(x), std::fabs(y), 1e-300});
    if (!(std::fabs(x - y) <= rel_tol * scale) && !(x == y))
      return "key " + std::to_string(e.keys[i]) + ": " + std::to_string(x) + " vs " + std::to_string(y);
  }
  return std::nullopt;
}

std::vector<std::size_t> top_k(const ResultSet& r, std::size_t k) {
  std::vector<std::size_t> idx(r.keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    const double x = r.value(a), y = r.value(b);
    if (x != y) return x > y;
    return r.keys[a] < r.keys[b];
  };
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

}  // namespace fragdb
