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


#include "fragdb/bench.hpp"

#include <cstdio>
#include <map>

#include "fragdb/normalize.hpp"

#include <json.hpp>

#include "fragdb/error.hpp"

namespace fragdb {

std::string_view engine_name(Engine e) {
  switch (e) {
    case Engine::Fastr: return "fastr";
    case Engine::Pmc: return "pmc";
    case Engine::Omc: return "omc";
    case Engine::OmcDense: return "omc-dense";
    case Engine::Oracle: return "oracle";
  }
  return "?";
}

std::optional<Engine> parse_engine(std::string_view name) {
  for (Engine e : all_engines())
    if (engine_name(e) == name) return e;
  return std::nullopt;
}

const std::vector<Engine>& all_engines() {
  static const std::vector<Engine> all = {Engine::Fastr, Engine::Pmc, Engine::Omc, Engine::OmcDense, Engine::Oracle};
  return all;
}

const OmcColumnSet& Engines::omc() {
  if (!omc_) omc_ = std::make_unique<OmcColumnSet>(OmcColumnSet::build(db_));
  return *omc_;
}

EngineRun Engines::run(Engine e, const Rqna& query, const std::vector<std::string>& params, const ExecOptions& options,
                       PlanOptions plan_options) {
  EngineRun out;
  const auto t0 = std::chrono::steady_clock::now();
  switch (e) {
    case Engine::Fastr:
      out.result = executor_.run(plan(query, db_.catalog(), plan_options), params, options, &out.exec);
      break;
    case Engine::Pmc:
      out.result = pmc_execute(query, db_, params, &out.baseline);
      break;
    case Engine::Omc:
      out.result = omc_execute(query, db_, omc(), params, &out.baseline);
      break;
    case Engine::OmcDense:
      out.result = omc_dense_execute(query, db_, omc(), params, &out.baseline);
      break;
    case Engine::Oracle:
      out.result = oracle_execute(query, db_, params);
      break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string key_text(const Catalog& catalog, const std::string& entity, std::uint32_t key) {
  if (const Dictionary* d = catalog.find_key_dictionary(entity); d && key < d->size()) return d->decode(key);
  return std::to_string(key);
}

namespace {

struct ParamSite {
  std::size_t var;
  std::string attr;
};

void collect_sites(const Chain& c, std::map<std::size_t, ParamSite>& out) {
  const Leaf& l = c.leaf;
  if (l.kind == Leaf::Kind::Select) {
    if (l.value.param) out.try_emplace(*l.value.param, ParamSite{l.var, l.attr});
    return;
  }
  if (l.context->chain) collect_sites(*l.context->chain, out);
  for (const auto& t : l.context->terms)
    if (t.value.param) out.try_emplace(*t.value.param, ParamSite{t.var, t.key});
}

}  // namespace

std::vector<std::string> default_params(const Rqna& query, const Database& db, double quantile) {
  std::map<std::size_t, ParamSite> sites;
  collect_sites(query.chain, sites);
  std::vector<std::string> out;
  for (std::size_t p = 0; p < query.param_count; ++p) {
    auto it = sites.find(p);
    if (it == sites.end()) fail(Errc::UnsupportedFeature, "parameter ?" + std::to_string(p) + " has no key site");
    const VarDef& v = query.vars[it->second.var];
    const std::string entity = key_entity(db.catalog(), v, it->second.attr);
    std::vector<std::uint64_t> counts(db.catalog().entity_size(entity), 0);
    for (std::uint32_t k : db.table(v.table).column(it->second.attr).values) ++counts[k];
    std::vector<std::pair<std::uint64_t, std::uint32_t>> nonzero;
    for (std::uint32_t k = 0; k < counts.size(); ++k)
      if (counts[k]) nonzero.emplace_back(counts[k], k);
    std::uint32_t key = 0;
    if (!nonzero.empty()) {
      std::sort(nonzero.begin(), nonzero.end());
      const auto pos = static_cast<std::size_t>(quantile * static_cast<double>(nonzero.size() - 1));
      key = nonzero[std::min(pos, nonzero.size() - 1)].second;
    }
    out.push_back(key_text(db.catalog(), entity, key));
  }
  return out;
}

bool BenchReport::counts_agree() const {
  std::map<std::pair<std::string, std::string>, std::uint64_t> first;
  for (const auto& r : rows) {
    auto [it, fresh] = first.try_emplace({r.dataset, r.query}, r.result_count);
    if (!fresh && it->second != r.result_count) return false;
  }
  return true;
}

std::string BenchReport::to_text() const {
  std::string out = "dataset      query    engine     threads workers   seconds   fragments    elements  results  scratch_bytes  materialized\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %-8s %-10s %7u %7u %9.5f %11llu %11llu %8llu %14llu %13llu\n",
                  r.dataset.c_str(), r.query.c_str(), r.engine.c_str(), r.threads, r.workers, r.seconds,
                  static_cast<unsigned long long>(r.fragments), static_cast<unsigned long long>(r.elements),
                  static_cast<unsigned long long>(r.result_count), static_cast<unsigned long long>(r.scratch_bytes),
                  static_cast<unsigned long long>(r.materialized_cells));
    out += buf;
  }
  out += counts_agree() ? "result counts agree across engines\n" : "RESULT COUNTS DIFFER ACROSS ENGINES\n";
  return out;
}

std::string BenchReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"engine", r.engine}, {"query", r.query}, {"dataset", r.dataset}, {"threads", r.threads},
                 {"workers", r.workers}, {"seconds", r.seconds}, {"fragments", r.fragments},
                 {"elements", r.elements}, {"result_count", r.result_count}, {"scratch_bytes", r.scratch_bytes},
                 {"materialized_cells", r.materialized_cells}});
  return nlohmann::json{{"rows", j}, {"counts_agree", counts_agree()}}.dump(2);
}

BenchReport run_bench(const Database& db, const std::string& dataset, const std::vector<BenchCase>& cases,
                      const BenchOptions& options) {
  BenchReport report;
  Engines engines(db);
  for (const auto& c : cases) {
    const Rqna q = compile_query(c.sql, db.catalog());
    const PhysicalPlan p = plan(q, db.catalog());
    // Counters come from an untimed instrumented pass.
    ExecOptions counted = options.exec;
    counted.instrumented = true;
    ExecStats counts;
    engines.executor().run(p, c.params, counted, &counts);
    for (Engine e : options.engines) {
      const std::vector<unsigned> sweep = e == Engine::Fastr ? options.threads : std::vector<unsigned>{1};
      for (unsigned t : sweep) {
        ExecOptions o = options.exec;
        o.threads = t;
        EngineRun last;
        const double s = best_of(options.repeats, [&] { last = engines.run(e, q, c.params, o); });
        BenchRow row;
        row.engine = std::string(engine_name(e));
        row.query = c.name;
        row.dataset = dataset;
        row.threads = t;
        row.workers = e == Engine::Fastr ? last.exec.workers : 1;
        row.seconds = s;
        row.result_count = last.result.size();
        if (e == Engine::Fastr) {
          row.fragments = counts.fragments;
          row.elements = counts.elements;
          row.scratch_bytes = scratch_bytes(p);
        }
        row.materialized_cells = last.baseline.materialized_cells;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace fragdb
