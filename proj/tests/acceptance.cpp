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


// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fragdb/baselines.hpp"
#include "fragdb/bench.hpp"
#include "fragdb/datagen.hpp"
#include "fragdb/error.hpp"
#include "fragdb/executor.hpp"
#include "fragdb/huffman.hpp"
#include "fragdb/normalize.hpp"
#include "fragdb/size_model.hpp"
#include "support/toy.hpp"

using namespace fragdb;

namespace {

using Clock = std::chrono::steady_clock;
using Values = std::vector<std::uint32_t>;
using Bytes = std::vector<std::uint8_t>;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<std::string> kQueries = {"sd", "fsd", "ad", "fad", "as", "cs"};

// Sorted distinct values in [0, d).
Values random_unique(std::mt19937_64& rng, std::uint64_t d, std::uint64_t n) {
  if (n == 0) return {};
  if (n * 2 > d) {
    Values all(d);
    for (std::uint64_t i = 0; i < d; ++i) all[i] = static_cast<std::uint32_t>(i);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(n);
    std::sort(all.begin(), all.end());
    return all;
  }
  Values v;
  while (v.size() < n) {
    const std::uint64_t want = n - v.size();
    for (std::uint64_t i = 0; i < want + want / 8 + 8; ++i) v.push_back(static_cast<std::uint32_t>(rng() % d));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  std::shuffle(v.begin(), v.end(), rng);
  v.resize(n);
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// 1. Codec roundtrip.

Verdict codec_roundtrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  const int per_codec = 10000;
  std::map<EncodingKind, int> done, bad;
  for (EncodingKind kind : {EncodingKind::UA, EncodingKind::BCA, EncodingKind::BB, EncodingKind::HUF,
                            EncodingKind::UB}) {
    for (int t = 0; t < per_codec; ++t) {
      // Domains from 1 to 2^32; fragment sizes from empty to 4096 plus the
      // full domain for bitmaps.
      const int shape = t % 10;
      std::uint64_t d = shape < 4 ? 1 + rng() % 64 : shape < 8 ? 1 + rng() % 100000 : 1 + rng() % (std::uint64_t{1} << 32);
      if (kind == EncodingKind::UB) d = std::min<std::uint64_t>(d, 1 << 20);
      std::uint64_t n = t % 97 == 0 ? 0 : rng() % (t % 13 == 0 ? 4097 : 65);
      Values v;
      if (is_bitmap(kind)) {
        if (t % 101 == 1) n = std::min<std::uint64_t>(d, 4096);  // max size: every value present
        v = random_unique(rng, d, std::min(n, d));
      } else {
        v.resize(n);
        for (auto& x : v) x = static_cast<std::uint32_t>(t % 7 == 0 ? d - 1 : rng() % d);
      }
      std::optional<HuffmanBook> book;
      if (kind == EncodingKind::HUF) {
        if (v.empty()) {
          book = HuffmanBook::build_from_values(Values{0});
        } else {
          book = HuffmanBook::build_from_values(v);
        }
      }
      const HuffmanBook* b = book ? &*book : nullptr;
      const Bytes enc = encode(kind, v, d, b);
      const Values dec = decode(kind, enc, d, v.size(), b);
      ++done[kind];
      if (dec != v) ++bad[kind];
    }
  }
  const double s = since(t0);
  Verdict out;
  std::string counts;
  for (auto [k, n] : done) {
    counts += fmt("%s=%d/%d ", std::string(encoding_name(k)).c_str(), n - bad[k], n);
    out.pass = out.pass && bad[k] == 0 && n >= 10000;
  }
  out.pass = out.pass && s < 60;
  out.detail = counts + fmt("in %.1f s (limit 60 s)", s);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Size formulas.

Verdict size_formulas() {
  std::mt19937_64 rng(202);
  int checks = 0, failures = 0;
  std::string first_failure;
  auto check = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first_failure = what;
  };

  // UA, BCA and UB are exact on a (D, N) grid.
  const std::vector<std::uint64_t> domains = {1, 2, 3, 7, 8, 9, 100, 255, 256, 257, 1000, 65535, 65536, 65537,
                                              1u << 20, (1u << 24) + 3, 1u << 26, std::uint64_t{1} << 31,
                                              std::uint64_t{1} << 32};
  const std::vector<std::uint64_t> sizes = {0, 1, 2, 3, 5, 7, 8, 9, 31, 100, 1000, 4096};
  for (auto d : domains) {
    for (auto n : sizes) {
      Values any(n);
      for (auto& x : any) x = static_cast<std::uint32_t>(rng() % d);
      for (auto kind : {EncodingKind::UA, EncodingKind::BCA}) {
        const auto bytes = encode(kind, any, d).size();
        check(bytes * 8 == model_bits(kind, n, d), fmt("%s D=%llu N=%llu", std::string(encoding_name(kind)).c_str(),
                                                       (unsigned long long)d, (unsigned long long)n));
      }
      if (n <= d && d <= (1u << 26)) {
        const auto bytes = encode(EncodingKind::UB, random_unique(rng, d, n), d).size();
        check(n == 0 ? bytes == 0 : bytes * 8 == model_bits(EncodingKind::UB, n, d),
              fmt("UB D=%llu N=%llu", (unsigned long long)d, (unsigned long long)n));
      }
    }
  }
  // Hand-checked anchors.
  check(encode(EncodingKind::UA, Values{1, 2, 3}, 1000).size() == 12, "UA N=3 D=1000 -> 96 bits");
  check(encode(EncodingKind::BCA, Values{1, 2, 3}, 1000).size() == 4, "BCA N=3 D=1000 -> 32 bits");
  check(encode(EncodingKind::UB, Values{0, 2, 5}, 12).size() == 2, "UB D=12 -> 16 bits");

  // Huffman: column data bits in [N*E, N*(E+1)) with E the empirical entropy.
  int huf_cols = 0;
  for (double s : {0.3, 0.8, 1.2, 1.5, 2.5}) {
    for (std::uint64_t d : {2ull, 5ull, 20ull, 300ull, 5000ull}) {
      ZipfSpec z{s, d, 20000, std::nullopt, rng()};
      const Values col = gen_column(z);
      if (std::set<std::uint32_t>(col.begin(), col.end()).size() < 2) continue;
      const HuffmanBook book = HuffmanBook::build_from_values(col);
      const double e = entropy_bits(col);
      const double n = static_cast<double>(col.size());
      // Split the column into fragments; data bits add up per fragment.
      std::uint64_t bits = 0, bytes = 0, fragment_bits = 0;
      for (std::size_t at = 0; at < col.size(); at += 977) {
        const std::span<const std::uint32_t> f(col.data() + at, std::min<std::size_t>(977, col.size() - at));
        const std::uint64_t fb = book.data_bits(f);
        fragment_bits += fb;
        bytes += encode(EncodingKind::HUF, f, d, &book).size();
        check(encode(EncodingKind::HUF, f, d, &book).size() == (fb + 7) / 8, "HUF fragment padding");
      }
      bits = book.data_bits(col);
      check(bits == fragment_bits, "HUF fragment bits add up");
      check(static_cast<double>(bits) >= n * e - 1e-6 && static_cast<double>(bits) < n * (e + 1),
            fmt("HUF s=%.1f D=%llu bits=%llu NE=%.1f", s, (unsigned long long)d, (unsigned long long)bits, n * e));
      ++huf_cols;
      (void)bytes;
    }
  }

  // BB on uniform-random unique fragments: mean gap placed at the geometric
  // centre of each byte band, 128^(b-1/2), where the mean-gap formula applies.
  double worst_bb = 0;
  int bb_cases = 0;
  for (unsigned b = 1; b <= 4; ++b) {
    const double gap = std::pow(128.0, b - 0.5);
    for (std::uint64_t n : {200ull, 2000ull, 20000ull}) {
      const auto d = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * (gap + 1)));
      if (d > (std::uint64_t{1} << 32)) continue;
      const Values v = random_unique(rng, d, n);
      const double actual = 8.0 * static_cast<double>(encode(EncodingKind::BB, v, d).size());
      const double formula = static_cast<double>(n) * 8 * bb_bytes_per_value(static_cast<double>(n), d);
      const double rel = std::abs(actual - formula) / formula;
      worst_bb = std::max(worst_bb, rel);
      check(rel <= 0.15, fmt("BB b=%u N=%llu rel=%.3f", b, (unsigned long long)n, rel));
      ++bb_cases;
    }
  }
  // Crafted gaps: exact.
  check(encode(EncodingKind::BB, Values{100, 3101, 3197}, 4000).size() == 4, "BB gaps 100/3000/95 -> 4 bytes");
  check(encode(EncodingKind::BB, Values{100, 3101, 3197}, 4000) == Bytes{0x64, 0xB8, 0x17, 0x5F},
        "BB gaps 100/3000/95 bytes");
  for (std::uint64_t g : {0ull, 5ull, 100ull, 127ull, 1000ull, 16383ull, 20000ull, 2000000ull}) {
    // N values, each preceded by exactly g zeros: the formula is exact.
    const std::uint64_t n = 50, d = n * (g + 1);
    Values v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<std::uint32_t>(i * (g + 1) + g);
    const auto bytes = encode(EncodingKind::BB, v, d).size();
    const std::uint64_t per = g < 128 ? 1 : g < 16384 ? 2 : g < 2097152 ? 3 : 4;
    check(bytes == n * per, fmt("BB crafted gap %llu", (unsigned long long)g));
    if (g > 0) check(bytes * 8 == model_bits(EncodingKind::BB, n, d), fmt("BB formula gap %llu", (unsigned long long)g));
  }

  Verdict out;
  out.pass = failures == 0;
  out.detail = fmt("%d checks, %d failures; %d Huffman columns; BB worst rel error %.3f over %d band-centred cases (limit 0.15)",
                   checks, failures, huf_cols, worst_bb, bb_cases);
  if (failures) out.detail += "; first: " + first_failure;
  return out;
}

// ---------------------------------------------------------------------------
// 3. Region analysis.

Verdict region_analysis() {
  std::mt19937_64 rng(303);
  int points = 0, exact = 0, padded = 0, misses = 0, case1 = 0, bb_bca_misses = 0;
  double edge_distance = 0;  // largest |log128(mean gap) - nearest integer| among misses
  std::string first_miss;
  // D log-spaced by sqrt(2) from 8 to 2^30; N log-spaced by sqrt(2) from 1 to
  // min(D, 2^20) plus N = D.
  for (int kd = 6; kd <= 60; ++kd) {
    const auto d = static_cast<std::uint64_t>(std::llround(std::pow(2.0, kd / 2.0)));
    std::set<std::uint64_t> ns;
    for (int kn = 0;; ++kn) {
      const auto n = static_cast<std::uint64_t>(std::llround(std::pow(2.0, kn / 2.0)));
      if (n > d || n > (1u << 20)) break;
      ns.insert(n);
    }
    if (d <= (1u << 20)) ns.insert(d);
    for (auto n : ns) {
      const Values v = random_unique(rng, d, n);
      std::map<EncodingKind, std::uint64_t> bytes;
      for (auto kind : {EncodingKind::BCA, EncodingKind::BB, EncodingKind::UB})
        bytes[kind] = encode(kind, v, d).size();
      const auto ua = encode(EncodingKind::UA, v, d).size();
      case1 += ua >= bytes[EncodingKind::BCA];
      const EncodingKind predicted = predict_unique_region(d, n).value_or(formula_min_unique(d, n));
      std::uint64_t best = UINT64_MAX;
      for (auto [k, b] : bytes) best = std::min(best, b);
      const std::uint64_t got = bytes[predicted];
      ++points;
      if (got == best) {
        ++exact;
      } else if (got <= best + 1) {
        ++padded;
      } else {
        ++misses;
        const double g = (static_cast<double>(d) - n) / n;
        const double lg = std::log(g) / std::log(128.0);
        edge_distance = std::max(edge_distance, std::abs(lg - std::round(lg)));
        std::set<EncodingKind> pair{predicted};
        for (auto [k, b] : bytes)
          if (b == best) pair.insert(k);
        bb_bca_misses += pair == std::set<EncodingKind>{EncodingKind::BB, EncodingKind::BCA};
        if (misses == 1)
          first_miss = fmt("D=%llu N=%llu predicted %s=%llu B, minimal %llu B", (unsigned long long)d,
                           (unsigned long long)n, std::string(encoding_name(predicted)).c_str(),
                           (unsigned long long)got, (unsigned long long)best);
        if (!std::getenv("FRAGDB_SHOW_MISSES")) continue;
        std::fprintf(stderr, "miss D=%llu N=%llu log128(gap)=%.3f pred=%s got=%llu best=%llu bca=%llu bb=%llu ub=%llu\n",
                     (unsigned long long)d, (unsigned long long)n, std::log(g) / std::log(128.0),
                     std::string(encoding_name(predicted)).c_str(), (unsigned long long)got, (unsigned long long)best,
                     (unsigned long long)bytes[EncodingKind::BCA], (unsigned long long)bytes[EncodingKind::BB],
                     (unsigned long long)bytes[EncodingKind::UB]);
      }
    }
  }
  Verdict out;
  out.pass = misses == 0 && case1 == points;
  out.detail = fmt("%d grid points: %d exact, %d within one padding byte, %d misses; UA>=BCA at %d/%d", points,
                   exact, padded, misses, case1, points);
  if (misses)
    out.detail += fmt("; %d of the misses are BB vs BCA, all within %.2f of a log128(mean gap) band edge; first miss ",
                      bb_bca_misses, edge_distance) +
                  first_miss;
  return out;
}

// ---------------------------------------------------------------------------
// 4 and 5. Five-way agreement and the memory law on desk-scale datasets.

std::uint64_t memory_formula(const Rqna& q, const Catalog& cat) {
  std::uint64_t bytes = 0;
  if (q.agg) bytes += 4ull * cat.entity_size(key_entity(cat, q.vars[q.group_by[0].var], q.group_by[0].attr));
  std::function<void(const Chain&)> walk = [&](const Chain& c) {
    if (c.leaf.kind != Leaf::Kind::SemiJoin) return;
    bytes += cat.entity_size(key_entity(cat, q.vars[c.leaf.var], c.leaf.attr));
    if (c.leaf.context->chain) walk(*c.leaf.context->chain);
  };
  walk(q.chain);
  return bytes;
}

Database desk_dataset(const std::string& q, int round, std::mt19937_64& rng) {
  const EncodingPolicy policy = round % 5 == 4 ? EncodingPolicy::AllUA : EncodingPolicy::Chosen;
  if (round % 2 == 0) {
    const std::uint32_t scale = 1 + static_cast<std::uint32_t>(rng() % 4);
    return q == "cs" ? testing::random_semmed(rng, scale, policy) : testing::random_pubmed(rng, scale, policy);
  }
  // Zipf-shaped generated data, up to a few thousand relationship rows.
  // Every tenth round is a larger instance, up to 5e4 relationship rows (AS
  // and CS, whose oracle scans grow with the square of the fanout, stay near 1e4).
  const double big = q == "as" || q == "cs" ? 0.1 : 0.3 + 0.05 * static_cast<double>(rng() % 5);
  const double f = round % 10 == 9 ? big : 0.02 + 0.01 * static_cast<double>(rng() % 8);
  Database db;
  if (q == "cs") {
    SemmedShape s;
    s.seed = rng();
    s.concepts = static_cast<std::uint32_t>(s.concepts * f), s.semtypes = static_cast<std::uint32_t>(s.semtypes * f);
    s.predications = static_cast<std::uint32_t>(s.predications * f);
    s.sentences = static_cast<std::uint32_t>(s.sentences * f);
    s.cs_rows = static_cast<std::uint64_t>(s.cs_rows * f), s.pa_rows = static_cast<std::uint64_t>(s.pa_rows * f);
    s.sp_rows = static_cast<std::uint64_t>(s.sp_rows * f);
    db = gen_semmed(s).load();
  } else {
    PubmedShape p;
    p.seed = rng();
    p.docs = static_cast<std::uint32_t>(p.docs * f), p.terms = static_cast<std::uint32_t>(p.terms * f);
    p.authors = static_cast<std::uint32_t>(p.authors * f);
    p.dt_rows = static_cast<std::uint64_t>(p.dt_rows * f), p.da_rows = static_cast<std::uint64_t>(p.da_rows * f);
    db = gen_pubmed(p).load();
  }
  db.build_indices(policy);
  return db;
}

struct DeskTotals {
  int datasets = 0, disagreements = 0, nonempty = 0;
  std::uint64_t max_rows = 0;
  int memory_checked = 0, memory_bad = 0;
  int ad_semijoins = -1, as_semijoins = -1;
  std::string first_problem;
  double seconds = 0;
};

DeskTotals desk_suite() {
  static DeskTotals totals;
  static bool ran = false;
  if (ran) return totals;
  ran = true;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  for (const auto& q : kQueries) {
    for (int round = 0; round < 100; ++round) {
      const Database db = desk_dataset(q, round, rng);
      for (const auto& [name, t] : db.tables())
        if (!t.entity) totals.max_rows = std::max<std::uint64_t>(totals.max_rows, t.rows());
      const Rqna rq = compile_query(testing::query_text(q), db.catalog());
      // Zipf datasets draw a typical key; random ones any key, including absent ones.
      const auto params = round % 2 ? default_params(rq, db, round % 10 == 9 ? 0.3 : 0.3 + 0.006 * round) : testing::random_params(rng, q, db);
      Engines engines(db);
      ResultSet truth;
      try {
        truth = engines.run(Engine::Oracle, rq, params).result;
      } catch (const Error& e) {
        throw Error(e.code(), q + " round " + std::to_string(round) + ": " + e.what());
      }
      totals.nonempty += truth.size() > 0;
      ++totals.datasets;
      for (Engine e : {Engine::Fastr, Engine::Pmc, Engine::Omc, Engine::OmcDense}) {
        const EngineRun r = engines.run(e, rq, params);
        if (auto diff = compare_results(truth, r.result, 1e-9)) {
          if (totals.disagreements++ == 0)
            totals.first_problem = q + " round " + std::to_string(round) + " " + std::string(engine_name(e)) + ": " + *diff;
        }
        if (e == Engine::Fastr) {
          const PhysicalPlan p = plan(rq, db.catalog());
          const std::uint64_t want = memory_formula(rq, db.catalog());
          ++totals.memory_checked;
          if (r.exec.memory.accounted() != want || scratch_bytes(p) != want) ++totals.memory_bad;
          int semijoins = 0;
          for (const auto& n : p.nodes) semijoins += n.kind == NodeKind::FragSemiJoin;
          if (q == "ad") totals.ad_semijoins = std::max(totals.ad_semijoins, semijoins);
          if (q == "as") totals.as_semijoins = std::max(totals.as_semijoins, semijoins);
        }
      }
    }
  }
  totals.seconds = since(t0);
  return totals;
}

Verdict five_way() {
  const DeskTotals t = desk_suite();
  Verdict out;
  out.pass = t.disagreements == 0 && t.datasets >= 600 && t.seconds < 600 && t.max_rows <= 100000;
  out.detail = fmt("%d datasets (100 per shape x 6), %d with nonempty results, max relationship rows %llu, "
                   "%d disagreements, %.1f s (limit 600 s)",
                   t.datasets, t.nonempty, (unsigned long long)t.max_rows, t.disagreements, t.seconds);
  if (t.disagreements) out.detail += "; first: " + t.first_problem;
  return out;
}

Verdict memory_law() {
  const DeskTotals t = desk_suite();
  // Fixed instances: AD has one semijoin over Doc, AS none.
  const Database db = testing::golden_pubmed();
  const Catalog& cat = db.catalog();
  Executor ex(db);
  std::string fixed;
  bool fixed_ok = true;
  for (const std::string q : {"ad", "as", "fad"}) {
    const Rqna rq = compile_query(testing::query_text(q), cat);
    ExecStats st;
    ex.run(plan(rq, cat), default_params(rq, db), {}, &st);
    const std::uint64_t want = memory_formula(rq, cat);
    fixed_ok = fixed_ok && st.memory.accounted() == want;
    fixed += fmt(" %s=%llu/%llu", q.c_str(), (unsigned long long)st.memory.accounted(), (unsigned long long)want);
  }
  const std::uint64_t ad_expected = 4ull * cat.entity_size("Author") + cat.entity_size("Doc");
  const std::uint64_t as_expected = 4ull * cat.entity_size("Author");
  fixed_ok = fixed_ok && memory_formula(compile_query(testing::query_text("ad"), cat), cat) == ad_expected &&
             memory_formula(compile_query(testing::query_text("as"), cat), cat) == as_expected;
  Verdict out;
  out.pass = t.memory_bad == 0 && t.ad_semijoins == 1 && t.as_semijoins == 0 && fixed_ok;
  out.detail = fmt("%d planned runs, %d mismatches; semijoins AD=%d AS=%d; fixed report/formula:", t.memory_checked,
                   t.memory_bad, t.ad_semijoins, t.as_semijoins) +
               fixed;
  return out;
}

// ---------------------------------------------------------------------------
// 6 to 9 share the large generated dataset.

struct Large {
  Database ua, chosen;
  std::unique_ptr<Engines> engines;  // over ua
  Rqna as;
  PhysicalPlan as_plan;
  std::vector<std::uint32_t> keys;  // authors of increasing reach
  std::vector<std::uint64_t> reach;  // decoded elements per key
  std::uint64_t dt_rows = 0;
  double build_seconds = 0;
};

PubmedShape large_shape() {
  PubmedShape p;
  p.docs = 100000, p.terms = 20000, p.authors = 50000;
  p.dt_rows = 1000000, p.da_rows = 300000;
  p.seed = 2026;
  return p;
}

Large& large() {
  static std::unique_ptr<Large> l;
  if (l) return *l;
  l = std::make_unique<Large>();
  const auto t0 = Clock::now();
  const GeneratedData g = gen_pubmed(large_shape());
  l->ua = g.load();
  l->ua.build_indices(EncodingPolicy::AllUA);
  l->chosen = g.load();
  l->chosen.build_indices(EncodingPolicy::Chosen);
  l->dt_rows = l->ua.table("DT").rows();
  l->engines = std::make_unique<Engines>(l->ua);
  l->as = compile_query(testing::query_text("as"), l->ua.catalog());
  l->as_plan = plan(l->as, l->ua.catalog());

  // Seeds at three reach magnitudes. Candidates are authors at evenly spaced
  // ranks of the DA degree order; reach is the instrumented element count.
  const auto& authors = l->ua.table("DA").column("Author").values;
  std::vector<std::uint32_t> degree(l->ua.catalog().entity_size("Author"), 0);
  for (auto a : authors) ++degree[a];
  std::vector<std::uint32_t> order;
  for (std::uint32_t a = 0; a < degree.size(); ++a)
    if (degree[a]) order.push_back(a);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return degree[x] < degree[y]; });
  std::vector<std::pair<std::uint64_t, std::uint32_t>> candidates;
  ExecOptions counted;
  counted.instrumented = true;
  for (std::size_t i = 0; i < 80; ++i) {
    const std::uint32_t a = order[i * (order.size() - 1) / 79];
    ExecStats st;
    l->engines->executor().run(l->as_plan, {key_text(l->ua.catalog(), "Author", a)}, counted, &st);
    candidates.emplace_back(st.elements, a);
    if (st.elements > 6e7) break;
  }
  for (double target : {1e5, 1.5e6, 2e7}) {
    auto best = std::min_element(candidates.begin(), candidates.end(), [&](const auto& x, const auto& y) {
      auto dist = [&](std::uint64_t e) { return std::abs(std::log10(static_cast<double>(e) + 1) - std::log10(target)); };
      return dist(x.first) < dist(y.first);
    });
    l->keys.push_back(best->second);
    l->reach.push_back(best->first);
  }
  l->build_seconds = since(t0);
  return *l;
}

std::vector<std::string> author(std::uint32_t a) { return {key_text(large().ua.catalog(), "Author", a)}; }

// Equal up to the bit pattern of every value.
bool byte_identical(const ResultSet& a, const ResultSet& b) {
  if (a.grouped != b.grouped || a.real != b.real || a.keys != b.keys || a.ints != b.ints || a.cells != b.cells ||
      a.reals.size() != b.reals.size())
    return false;
  return a.reals.empty() || std::memcmp(a.reals.data(), b.reals.data(), a.reals.size() * sizeof(double)) == 0;
}

Verdict thread_determinism() {
  Large& L = large();
  const Executor& ex = L.engines->executor();
  bool values_ok = true;
  std::string detail;
  // Integer aggregates: FAD and AD with typical keys; reals: AS.
  for (const std::string q : {"fad", "ad", "as"}) {
    const Rqna rq = compile_query(testing::query_text(q), L.ua.catalog());
    const PhysicalPlan p = plan(rq, L.ua.catalog());
    const auto params = q == "as" ? author(L.keys[1]) : default_params(rq, L.ua);
    ExecOptions one;
    const ResultSet base = ex.run(p, params, one);
    for (unsigned t : {2u, 4u, 8u}) {
      for (bool over : {false, true}) {
        ExecOptions o;
        o.threads = t;
        o.oversubscribe = over;
        const ResultSet r = ex.run(p, params, o);
        const bool ok = base.real ? !compare_results(base, r, 1e-6) : base == r;
        values_ok = values_ok && ok;
      }
    }
    detail += fmt("%s(%zu groups) ", q.c_str(), base.size());
  }

  // Timing on AS with the largest seed: interleaved best-of-5, up to three rounds.
  const auto params = author(L.keys[2]);
  ExecStats s1, s8, so;
  ExecOptions o1, o8, oo;
  o8.threads = 8;
  oo.threads = 8;
  oo.oversubscribe = true;
  ex.run(L.as_plan, params, o8, &s8);
  ex.run(L.as_plan, params, oo, &so);
  bool time_ok = false;
  double t1 = 0, t8 = 0;
  int rounds = 0;
  while (!time_ok && rounds < 3) {
    ++rounds;
    t1 = t8 = 1e30;
    for (int i = 0; i < 5; ++i) {
      t1 = std::min(t1, best_of(1, [&] { ex.run(L.as_plan, params, o1); }));
      t8 = std::min(t8, best_of(1, [&] { ex.run(L.as_plan, params, o8); }));
    }
    time_ok = t8 <= t1;
  }
  const double t_over = best_of(3, [&] { ex.run(L.as_plan, params, oo); });
  Verdict out;
  out.pass = values_ok && time_ok;
  out.detail = detail + fmt("identical across 1/2/4/8 threads: %s; AS wall 1 thread %.4f s, 8 threads %.4f s "
                            "(%u effective workers on %u hardware threads, %d timing round(s)); "
                            "forced 8 workers: %.4f s",
                            values_ok ? "yes" : "NO", t1, t8, s8.workers, std::thread::hardware_concurrency(), rounds,
                            t_over);
  (void)so;
  return out;
}

Verdict pipelining_ablation() {
  Large& L = large();
  const OmcColumnSet& omc = L.engines->omc();
  const Executor& ex = L.engines->executor();
  std::vector<double> ratios;
  std::string detail = fmt("DT rows %llu; ", (unsigned long long)L.dt_rows);
  bool each_2x = true;
  for (std::size_t i = 0; i < L.keys.size(); ++i) {
    const auto params = author(L.keys[i]);
    const ResultSet a = ex.run(L.as_plan, params);
    const ResultSet b = omc_dense_execute(L.as, L.ua, omc, params);
    const bool same = !compare_results(b, a, 1e-9);
    const double tf = best_of(7, [&] { ex.run(L.as_plan, params); });
    const double to = best_of(5, [&] { omc_dense_execute(L.as, L.ua, omc, params); });
    ratios.push_back(to / tf);
    each_2x = each_2x && to / tf >= 2.0 && same;
    detail += fmt("author %u reach %llu: fastr %.4f s omc-dense %.4f s ratio %.2f%s; ", L.keys[i],
                  (unsigned long long)L.reach[i], tf, to, to / tf, same ? "" : " RESULTS DIFFER");
  }
  const bool increasing_reach = L.reach[0] < L.reach[1] && L.reach[1] < L.reach[2];
  const bool monotone = ratios[0] < ratios[1] && ratios[1] < ratios[2];
  Verdict out;
  out.pass = L.dt_rows >= 1000000 && each_2x && increasing_reach && monotone;
  out.detail = detail + fmt("ratio >= 2 at every seed: %s; monotone: %s", each_2x ? "yes" : "no", monotone ? "yes" : "no");
  return out;
}

Verdict dense_id_ablations() {
  Large& L = large();
  const Executor& ex = L.engines->executor();
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < L.keys.size(); ++i) {
    const auto params = author(L.keys[i]);
    ExecOptions bin, hash;
    bin.lookup = LookupMode::BinarySearch;
    hash.agg = AggMode::HashMap;
    const double direct = best_of(5, [&] { ex.run(L.as_plan, params); });
    const double tb = best_of(5, [&] { ex.run(L.as_plan, params, bin); });
    const double th = best_of(5, [&] { ex.run(L.as_plan, params, hash); });
    const double gain_lookup = (tb - direct) / tb, gain_agg = (th - direct) / th;
    ok = ok && gain_lookup >= 0.05 && gain_agg >= 0.05;
    detail += fmt("reach %llu: direct %.4f s, binary %.4f s (%.1f%% faster), hashmap %.4f s (%.1f%% faster); ",
                  (unsigned long long)L.reach[i], direct, tb, 100 * gain_lookup, th, 100 * gain_agg);
  }
  Verdict out;
  out.pass = ok;
  out.detail = detail + "required 5% each";
  return out;
}

Verdict encoding_transparency() {
  Large& L = large();
  Executor chosen_ex(L.chosen);
  const PhysicalPlan chosen_plan = plan(compile_query(testing::query_text("as"), L.chosen.catalog()), L.chosen.catalog());
  bool identical = true;
  for (auto a : L.keys) {
    const auto params = author(a);
    identical = identical && byte_identical(L.engines->executor().run(L.as_plan, params), chosen_ex.run(chosen_plan, params));
  }
  std::set<std::string> kinds;
  for (const auto& m : L.chosen.catalog().columns()) kinds.insert(std::string(encoding_name(m.encoding)));
  std::string used;
  for (const auto& k : kinds) used += k + " ";
  const auto ua = L.ua.index_bytes(), ch = L.chosen.index_bytes();
  Verdict out;
  out.pass = identical && ch < ua;
  out.detail = fmt("AS at %zu seeds byte-identical: %s; index bytes all-UA %llu, chosen %llu (%.1f%%); chosen kinds: ",
                   L.keys.size(), identical ? "yes" : "NO", (unsigned long long)ua, (unsigned long long)ch,
                   100.0 * static_cast<double>(ch) / static_cast<double>(ua)) +
               used;
  return out;
}

// ---------------------------------------------------------------------------
// 10. Goldens and the emitted AS loop nest.

Verdict goldens() {
  const std::string dir = FRAGDB_GOLDEN_DIR;
  const Catalog pub(parse_schema(read_file(std::string(FRAGDB_QUERY_DIR) + "/pubmed.schema")));
  const Catalog sem(parse_schema(read_file(std::string(FRAGDB_QUERY_DIR) + "/semmed.schema")));
  const Database pdb = testing::golden_pubmed(), sdb = testing::golden_semmed();
  int matched = 0;
  std::string mismatched;
  for (const auto& q : kQueries) {
    const Catalog& c = q == "cs" ? sem : pub;
    const Database& db = q == "cs" ? sdb : pdb;
    const bool rqna = dump(compile_query(testing::query_text(q), c)) == testing::read_golden(dir + "/" + q + ".rqna");
    const bool pl = dump(plan(compile_query(testing::query_text(q), db.catalog()), db.catalog())) ==
                    testing::read_golden(dir + "/" + q + ".plan");
    matched += rqna + pl;
    if (!rqna) mismatched += " " + q + ".rqna";
    if (!pl) mismatched += " " + q + ".plan";
  }
  // Loop nests: one "// join" header per join operator; aggregation updates:
  // statements of the form R[...] op= ... inside the nest.
  auto count_structure = [](const std::string& src) {
    int joins = 0, updates = 0;
    const std::regex update(R"(^\s*R\[[^\]]+\]\s*([+]=|=\s*std::(min|max)))");
    std::istringstream in(src);
    for (std::string line; std::getline(in, line);) {
      joins += line.find("// join ") != std::string::npos;
      updates += std::regex_search(line, update);
    }
    return std::pair{joins, updates};
  };
  const auto [j1, u1] = count_structure(emit_source(plan(compile_query(testing::query_text("as"), pdb.catalog()),
                                                         pdb.catalog()), pdb.catalog()));
  Verdict out;
  out.pass = matched == 12 && j1 == 5 && u1 == 1;
  out.detail = fmt("%d/12 golden dumps match; emit_source(AS): %d join loop nests, %d aggregation update", matched, j1, u1);
  if (!mismatched.empty()) out.detail += "; mismatched:" + mismatched;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, codec_roundtrip},     {2, size_formulas},       {3, region_analysis},     {4, five_way},
      {5, memory_law},          {6, thread_determinism},  {7, pipelining_ablation}, {8, dense_id_ablations},
      {9, encoding_transparency}, {10, goldens}};
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %d: %s  %s [%.1f s]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
