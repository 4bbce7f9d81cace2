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
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fragdb/database.hpp"
#include "fragdb/planner.hpp"
#include "fragdb/result.hpp"

// Pipelined execution of physical plans: nested loops over decoded fragments
// with scalar loop variables, dense dedup and aggregation arrays.
namespace fragdb {

// How a key finds its fragment: the dense lookup table, or binary search over
// the keys that have fragments.
enum class LookupMode { Direct, BinarySearch };
// Where group aggregates live.
enum class AggMode { DenseArray, HashMap };

struct ExecOptions {
  unsigned threads = 1;
  // Workers are capped at the hardware thread count unless this is set; tests
  // set it to exercise the shared-array path on small machines.
  bool oversubscribe = false;
  LookupMode lookup = LookupMode::Direct;
  AggMode agg = AggMode::DenseArray;
  bool instrumented = false;  // count fragments and elements (separate code path)
  // COUNT plans keep 4-byte accumulators and derive group presence from them,
  // so physical allocation equals the accounted bytes exactly.
  bool compact_count = false;
};

struct MemoryReport {
  std::uint64_t acc_bytes = 0;     // 4 per dense group slot
  std::uint64_t dedup_bytes = 0;   // 1 per semijoin key
  std::uint64_t physical_bytes = 0;  // actually allocated for acc, group flags and dedup
  std::uint64_t accounted() const { return acc_bytes + dedup_bytes; }
};

struct ExecStats {
  std::uint64_t fragments = 0;  // fragment lookups (instrumented only)
  std::uint64_t elements = 0;   // decoded values (instrumented only)
  std::uint64_t semijoin_probes = 0;  // semijoin keys expanded (instrumented only)
  double seconds = 0;
  unsigned workers = 1;  // threads that actually ran
  MemoryReport memory;
};

// Present keys of one index with their fragment offsets, for binary search.
struct SparseLookup {
  std::vector<std::uint32_t> keys;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint64_t> begins;  // (keys.size() + 1) rows of attribute_count() offsets
  std::size_t width = 0;

  static SparseLookup build(const FragmentIndex& index);
  std::uint64_t bytes() const;
};

// Holds per-index auxiliary structures across runs. Thread-safe.
class Executor {
 public:
  explicit Executor(const Database& db) : db_(db) {}

  ResultSet run(const PhysicalPlan& plan, const std::vector<std::string>& params,
                const ExecOptions& options = {}, ExecStats* stats = nullptr) const;

  const Database& database() const { return db_; }
  const SparseLookup& sparse(const FragmentIndex& index) const;

 private:
  const Database& db_;
  mutable std::mutex mu_;
  mutable std::map<const FragmentIndex*, std::unique_ptr<SparseLookup>> sparse_;
};

ResultSet execute(const PhysicalPlan& plan, const Database& db, const std::vector<std::string>& params,
                  const ExecOptions& options = {}, ExecStats* stats = nullptr);

// Parse, normalize, verify and plan in one step.
PhysicalPlan compile_plan(std::string_view sql, const Catalog& catalog, PlanOptions options = {});

// Loop-nest source text for a plan. Buffers first, then one nest per fragment
// operator with decode calls chosen by the recorded encodings.
std::string emit_source(const PhysicalPlan& plan, const Catalog& catalog);

}  // namespace fragdb
