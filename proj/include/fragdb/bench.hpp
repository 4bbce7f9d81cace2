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

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fragdb/baselines.hpp"
#include "fragdb/executor.hpp"

// Engine dispatch shared by the CLI and the benchmark harness.
namespace fragdb {

enum class Engine { Fastr, Pmc, Omc, OmcDense, Oracle };
std::string_view engine_name(Engine e);
std::optional<Engine> parse_engine(std::string_view name);
const std::vector<Engine>& all_engines();

struct EngineRun {
  ResultSet result;
  double seconds = 0;
  ExecStats exec;          // fastr only
  BaselineStats baseline;  // pmc / omc / omc-dense only
};

// Compiles queries and keeps per-database structures (sorted copies, sparse
// lookups) alive across runs.
class Engines {
 public:
  explicit Engines(const Database& db) : db_(db), executor_(db) {}

  EngineRun run(Engine e, const Rqna& query, const std::vector<std::string>& params, const ExecOptions& options = {},
                PlanOptions plan_options = {});
  const OmcColumnSet& omc();
  const Executor& executor() const { return executor_; }

 private:
  const Database& db_;
  Executor executor_;
  std::unique_ptr<OmcColumnSet> omc_;
};

// Minimum wall time of `repeats` calls.
template <class F>
double best_of(unsigned repeats, F&& f);

// Parameter values for a query: each parameter gets the key at `quantile` of the
// nonzero occurrence counts of the column it selects on, a deterministic
// "typical but not tiny" seed.
std::vector<std::string> default_params(const Rqna& query, const Database& db, double quantile = 0.9);

// External spelling of a dense key (dictionary string or the integer itself).
std::string key_text(const Catalog& catalog, const std::string& entity, std::uint32_t key);

struct BenchCase {
  std::string name;
  std::string sql;
  std::vector<std::string> params;
};

struct BenchOptions {
  std::vector<Engine> engines = {Engine::Fastr, Engine::Pmc, Engine::Omc, Engine::OmcDense};
  std::vector<unsigned> threads = {1};  // swept for fastr only
  unsigned repeats = 3;
  ExecOptions exec;
};

struct BenchRow {
  std::string engine;
  std::string query;
  std::string dataset;
  unsigned threads = 1;
  unsigned workers = 1;
  double seconds = 0;
  std::uint64_t fragments = 0;  // from a separate instrumented fastr run
  std::uint64_t elements = 0;
  std::uint64_t result_count = 0;
  std::uint64_t scratch_bytes = 0;
  std::uint64_t materialized_cells = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  // Result counts per query agree across engines and thread counts.
  bool counts_agree() const;
  std::string to_text() const;
  std::string to_json() const;
};

BenchReport run_bench(const Database& db, const std::string& dataset, const std::vector<BenchCase>& cases,
                      const BenchOptions& options = {});

template <class F>
double best_of(unsigned repeats, F&& f) {
  double best = 0;
  for (unsigned i = 0; i < std::max(1u, repeats); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i == 0 || s < best) best = s;
  }
  return best;
}

}  // namespace fragdb
