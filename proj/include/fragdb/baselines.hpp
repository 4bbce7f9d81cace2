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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragdb/algebra.hpp"
#include "fragdb/database.hpp"
#include "fragdb/normalize.hpp"
#include "fragdb/result.hpp"

// Materializing column-executor baselines and the brute-force oracle. All of
// them consume the same RQNA as the fragment executor.
namespace fragdb {

// One copy of a table sorted by `key` (then by the remaining foreign key),
// with the key column stored as (value, start) runs.
struct SortedCopy {
  std::string table;
  std::string key;
  std::uint32_t rows = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> runs;  // (value, start), both increasing
  std::map<std::string, std::vector<std::uint32_t>> columns;  // non-key columns in sorted order
  // Dense variant: start[v], end[v] for every v in the key domain.
  std::vector<std::uint32_t> dense_start;
  std::vector<std::uint32_t> dense_end;

  // Row range [start, end) holding key v; empty when absent.
  std::pair<std::uint32_t, std::uint32_t> find_binary(std::uint32_t v) const;
  std::pair<std::uint32_t, std::uint32_t> find_dense(std::uint32_t v) const {
    if (v >= dense_start.size()) return {0, 0};
    return {dense_start[v], dense_end[v]};
  }
  const std::vector<std::uint32_t>& column(const std::string& attr) const;
  std::uint64_t bytes() const;
};

SortedCopy make_sorted_copy(const Table& table, const std::string& key, const std::string& tiebreak,
                            std::uint32_t key_domain);

// Two copies per relationship table (one per foreign key), one per entity table.
class OmcColumnSet {
 public:
  static OmcColumnSet build(const Database& db);
  const SortedCopy& copy(const std::string& table, const std::string& key) const;
  std::uint64_t bytes() const;

 private:
  std::map<std::string, SortedCopy> copies_;  // "Table.Key"
};

struct BaselineStats {
  std::uint64_t materialized_cells = 0;  // total cells written to intermediate results
  double seconds = 0.0;
};

ResultSet pmc_execute(const Rqna& q, const Database& db, std::span<const std::string> params,
                      BaselineStats* stats = nullptr);
ResultSet omc_execute(const Rqna& q, const Database& db, const OmcColumnSet& omc,
                      std::span<const std::string> params, BaselineStats* stats = nullptr);
ResultSet omc_dense_execute(const Rqna& q, const Database& db, const OmcColumnSet& omc,
                            std::span<const std::string> params, BaselineStats* stats = nullptr);

struct OracleLimits {
  std::uint64_t max_steps = 200'000'000;  // scanned rows before ScaleExceeded
};

// Nested loops with full scans along the normalized chain; map-based grouping.
ResultSet oracle_execute(const Rqna& q, const Database& db, std::span<const std::string> params,
                         OracleLimits limits = {});
// Independent evaluation of the unnormalized algebra: FROM-order nested loops,
// predicates checked as soon as their variables are bound.
ResultSet oracle_execute_algebra(const Algebra& a, const Database& db, std::span<const std::string> params,
                                 OracleLimits limits = {});

}  // namespace fragdb
