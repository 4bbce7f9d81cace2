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


// fragdb command-line tool. Exit codes: 0 ok, 1 usage, 2 data error, 3 internal.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fragdb/bench.hpp"
#include "fragdb/datagen.hpp"
#include "fragdb/error.hpp"
#include "fragdb/normalize.hpp"
#include "fragdb/report.hpp"

namespace fs = std::filesystem;
using namespace fragdb;

namespace {

void stats_line(const nlohmann::json& j) { std::cout << "stats " << j.dump() << std::endl; }

std::string cell_text(const Catalog& cat, const VarDef& var, const std::string& attr, std::uint32_t v) {
  if (is_key_attribute(cat, var, attr)) return key_text(cat, key_entity(cat, var, attr), v);
  if (const Dictionary* d = cat.find_value_dictionary(var.table, attr); d && v < d->size()) return d->decode(v);
  return std::to_string(v);
}

std::string number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void print_result(const ResultSet& r, const Rqna& q, const Catalog& cat, std::optional<std::size_t> k) {
  if (!r.grouped) {
    for (std::size_t row = 0; row < r.size(); ++row) {
      for (std::size_t c = 0; c < r.width; ++c) {
        const AttrRef& o = q.outputs[c];
        std::cout << (c ? "\t" : "") << cell_text(cat, q.vars[o.var], o.attr, r.cells[row * r.width + c]);
      }
      std::cout << '\n';
    }
    return;
  }
  const AttrRef& g = q.group_by.at(0);
  std::vector<std::size_t> order;
  if (k) {
    order = top_k(r, *k);
  } else {
    for (std::size_t i = 0; i < r.size(); ++i) order.push_back(i);
  }
  for (std::size_t i : order) {
    std::cout << cell_text(cat, q.vars[g.var], g.attr, r.keys[i]) << '\t'
              << (r.real ? number(r.reals[i]) : std::to_string(r.ints[i])) << '\n';
  }
}

int cmd_gen(const std::string& shape, const fs::path& out, std::uint64_t seed, double scale,
            const std::string& band, std::uint64_t domain, std::uint32_t keys) {
  GeneratedData data;
  auto sz = [&](auto v) { return static_cast<decltype(v)>(std::max(1.0, static_cast<double>(v) * scale)); };
  if (shape == "pubmed") {
    PubmedShape p;
    p.seed = seed;
    p.docs = sz(p.docs), p.terms = sz(p.terms), p.authors = sz(p.authors);
    p.dt_rows = sz(p.dt_rows), p.da_rows = sz(p.da_rows);
    data = gen_pubmed(p);
  } else if (shape == "semmed") {
    SemmedShape s;
    s.seed = seed;
    s.concepts = sz(s.concepts), s.semtypes = sz(s.semtypes);
    s.predications = sz(s.predications), s.sentences = sz(s.sentences);
    s.cs_rows = sz(s.cs_rows), s.pa_rows = sz(s.pa_rows), s.sp_rows = sz(s.sp_rows);
    data = gen_semmed(s);
  } else {
    data = gen_fragment_table(FragmentBand::parse(band), domain, keys, seed);
  }
  data.write(out);
  std::uint64_t rows = 0;
  for (const auto& r : data.reports) {
    std::cout << r.to_string() << '\n';
    rows += r.rows;
  }
  stats_line({{"command", "gen-data"}, {"shape", shape}, {"seed", seed}, {"rows", rows}});
  return 0;
}

int cmd_load(const fs::path& data, const fs::path& db_dir) {
  Database db = GeneratedData::load_dir(data);
  db.save(db_dir);
  std::uint64_t rows = 0;
  for (const auto& [name, t] : db.tables()) rows += t.rows();
  std::cout << "loaded " << db.tables().size() << " tables into " << db_dir.string() << '\n';
  stats_line({{"command", "load"}, {"tables", db.tables().size()}, {"rows", rows}});
  return 0;
}

int cmd_build(const fs::path& db_dir, bool all_ua, const std::vector<std::string>& encode) {
  Database db = Database::open(db_dir);
  EncodingOverrides overrides;
  for (const auto& e : encode) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) fail(Errc::Usage, "--encode expects Table.Key.Attr=KIND, got " + e);
    const auto kind = parse_encoding(e.substr(eq + 1));
    if (!kind) fail(Errc::Usage, "unknown encoding " + e.substr(eq + 1));
    overrides[e.substr(0, eq)] = *kind;
  }
  db.build_indices(all_ua ? EncodingPolicy::AllUA : EncodingPolicy::Chosen, overrides);
  db.save(db_dir);
  for (const auto& m : db.catalog().columns())
    std::cout << m.table << '.' << m.key << '.' << m.attribute << '\t' << encoding_name(m.encoding) << '\t'
              << m.byte_size << '\n';
  stats_line({{"command", "build-index"}, {"policy", all_ua ? "all-ua" : "chosen"}, {"index_bytes", db.index_bytes()}});
  return 0;
}

struct QueryArgs {
  fs::path db;
  fs::path file;
  std::string engine = "fastr";
  unsigned threads = 1;
  std::vector<std::string> params;
  bool auto_params = false;
  std::string emit_source;
  std::optional<std::size_t> top_k;
  std::string lookup = "direct";
  std::string agg = "dense";
  bool show_plan = false;
};

int cmd_query(const QueryArgs& a) {
  const auto engine = parse_engine(a.engine);
  if (!engine) fail(Errc::Usage, "unknown engine " + a.engine);
  if (a.lookup != "direct" && a.lookup != "binary") fail(Errc::Usage, "--lookup is direct or binary");
  if (a.agg != "dense" && a.agg != "hash") fail(Errc::Usage, "--agg is dense or hash");
  Database db = Database::open(a.db);
  const std::string sql = read_file(a.file);
  const Rqna q = compile_query(sql, db.catalog());
  std::vector<std::string> params = a.params;
  if (a.auto_params && params.empty()) params = default_params(q, db);
  const PhysicalPlan p = plan(q, db.catalog());
  if (a.show_plan) std::cout << dump(p);
  if (!a.emit_source.empty()) write_file(a.emit_source, emit_source(p, db.catalog()));

  ExecOptions o;
  o.threads = a.threads;
  o.lookup = a.lookup == "binary" ? LookupMode::BinarySearch : LookupMode::Direct;
  o.agg = a.agg == "hash" ? AggMode::HashMap : AggMode::DenseArray;
  Engines engines(db);
  const EngineRun run = engines.run(*engine, q, params, o);
  print_result(run.result, q, db.catalog(), a.top_k);

  nlohmann::json s = {{"command", "query"}, {"engine", a.engine}, {"threads", a.threads},
                      {"rows", run.result.size()}, {"seconds", run.seconds}};
  if (*engine == Engine::Fastr) {
    s["workers"] = run.exec.workers;
    s["scratch_bytes"] = scratch_bytes(p);
    s["accounted_bytes"] = run.exec.memory.accounted();
  } else if (*engine != Engine::Oracle) {
    s["materialized_cells"] = run.baseline.materialized_cells;
  }
  s["params"] = params;
  stats_line(s);
  return 0;
}

struct BenchArgs {
  fs::path db;
  std::vector<std::string> files;
  std::vector<std::string> engines = {"fastr", "pmc", "omc", "omc-dense"};
  std::vector<unsigned> threads = {1};
  unsigned repeats = 3;
  std::vector<std::string> params;  // name=v1,v2
  bool json = false;
};

int cmd_bench(const BenchArgs& a) {
  Database db = Database::open(a.db);
  std::map<std::string, std::vector<std::string>> given;
  for (const auto& p : a.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) fail(Errc::Usage, "--param expects name=v1,v2");
    std::vector<std::string> vals;
    std::stringstream ss(p.substr(eq + 1));
    for (std::string v; std::getline(ss, v, ',');) vals.push_back(v);
    given[p.substr(0, eq)] = vals;
  }
  std::vector<BenchCase> cases;
  for (const auto& f : a.files) {
    BenchCase c;
    c.name = fs::path(f).stem().string();
    c.sql = read_file(f);
    Rqna q;
    try {
      q = compile_query(c.sql, db.catalog());
    } catch (const Error& e) {
      if (e.code() != Errc::UnknownTable) throw;
      std::cerr << "skip " << c.name << ": " << e.what() << '\n';
      continue;
    }
    auto it = given.find(c.name);
    c.params = it != given.end() ? it->second : default_params(q, db);
    cases.push_back(std::move(c));
  }
  BenchOptions o;
  o.engines.clear();
  for (const auto& e : a.engines) {
    const auto engine = parse_engine(e);
    if (!engine) fail(Errc::Usage, "unknown engine " + e);
    o.engines.push_back(*engine);
  }
  o.threads = a.threads;
  o.repeats = a.repeats;
  const BenchReport r = run_bench(db, a.db.filename().string(), cases, o);
  std::cout << (a.json ? r.to_json() + "\n" : r.to_text());
  stats_line({{"command", "bench"}, {"cases", cases.size()}, {"rows", r.rows.size()}, {"counts_agree", r.counts_agree()}});
  return r.counts_agree() ? 0 : 2;
}

int cmd_codec_report(const fs::path& db_dir) {
  Database db = Database::open(db_dir);
  if (db.catalog().columns().empty()) db.build_indices();
  const auto report = codec_report(db);
  std::cout << format_codec_report(report);
  std::size_t minimal = 0;
  for (const auto& r : report) minimal += r.bytes_of(r.chosen) == r.bytes_of(r.smallest());
  stats_line({{"command", "codec-report"}, {"columns", report.size()}, {"chosen_minimal", minimal}});
  return 0;
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::Usage: return 1;
    case Errc::Internal: return 3;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fragdb: fragment-indexed analytic query engine"};
  app.require_subcommand(1);

  std::string shape = "pubmed", band = "1000+-100";
  fs::path out;
  std::uint64_t seed = 1, domain = 1 << 20;
  std::uint32_t keys = 10;
  double scale = 1.0;
  auto* gen = app.add_subcommand("gen-data", "write a seeded synthetic dataset as CSV");
  gen->add_option("--shape", shape)->check(CLI::IsMember({"pubmed", "semmed", "fragments"}));
  gen->add_option("--out", out)->required();
  gen->add_option("--seed", seed);
  gen->add_option("--scale", scale, "multiplies entity sizes and row counts")->check(CLI::PositiveNumber);
  gen->add_option("--band", band, "fragment size band for --shape fragments, e.g. 100000+-1000");
  gen->add_option("--domain", domain, "value domain for --shape fragments");
  gen->add_option("--keys", keys, "fragment count for --shape fragments");

  fs::path data, db_dir;
  auto* load = app.add_subcommand("load", "load a CSV directory into a database directory");
  load->add_option("--data", data)->required();
  load->add_option("--db", db_dir)->required();

  bool all_ua = false;
  std::vector<std::string> encode;
  auto* build = app.add_subcommand("build-index", "build fragment indices");
  build->add_option("--db", db_dir)->required();
  build->add_flag("--all-ua", all_ua, "store every column uncompressed");
  build->add_option("--encode", encode, "override one column: Table.Key.Attr=KIND");

  QueryArgs qa;
  std::size_t top = 0;
  auto* query = app.add_subcommand("query", "run one query");
  query->add_option("--db", qa.db)->required();
  query->add_option("-f,--file", qa.file)->required()->check(CLI::ExistingFile);
  query->add_option("--engine", qa.engine);
  query->add_option("--threads", qa.threads)->check(CLI::Range(1u, 256u));
  query->add_option("--param", qa.params, "positional parameter values in order");
  query->add_flag("--auto-params", qa.auto_params, "pick typical keys for unbound parameters");
  query->add_option("--emit-source", qa.emit_source, "write the generated loop nest here");
  auto* topk = query->add_option("--top-k", top, "print the k largest aggregates");
  query->add_option("--lookup", qa.lookup, "direct or binary");
  query->add_option("--agg", qa.agg, "dense or hash");
  query->add_flag("--plan", qa.show_plan, "print the physical plan first");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "time queries across engines");
  bench->add_option("--db", ba.db)->required();
  bench->add_option("-f,--file", ba.files)->required()->check(CLI::ExistingFile);
  bench->add_option("--engines", ba.engines)->delimiter(',');
  bench->add_option("--threads", ba.threads)->delimiter(',');
  bench->add_option("--repeats", ba.repeats);
  bench->add_option("--param", ba.params, "query=v1,v2 (query is the file stem)");
  bench->add_flag("--json", ba.json);

  auto* codec = app.add_subcommand("codec-report", "per-column sizes under each encoding");
  codec->add_option("--db", db_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen(shape, out, seed, scale, band, domain, keys);
    if (*load) return cmd_load(data, db_dir);
    if (*build) return cmd_build(db_dir, all_ua, encode);
    if (*query) {
      if (*topk) qa.top_k = top;
      return cmd_query(qa);
    }
    if (*bench) return cmd_bench(ba);
    if (*codec) return cmd_codec_report(db_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
