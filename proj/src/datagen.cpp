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


#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "fragdb/datagen.hpp"
#include "fragdb/error.hpp"

namespace fragdb {

std::string GenReport::to_string() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "table=%s rows=%llu fanout1=%.3f fanout2=%.3f", table.c_str(),
                static_cast<unsigned long long>(rows), fanout1, fanout2);
  return buf;
}

Triples gen_relationship(const RelationshipSpec& spec, GenReport* report) {
  const std::uint64_t d1 = spec.fk1.domain, d2 = spec.fk2.domain;
  const std::uint64_t rows = spec.rows;
  if (d1 == 0 || d2 == 0 || rows > d1 * d2)
    fail(Errc::InfeasibleFanout, std::to_string(rows) + " distinct pairs requested from a " + std::to_string(d1) +
                                     " x " + std::to_string(d2) + " key space");
  std::mt19937_64 rng(spec.seed);
  Triples t;
  t.a.reserve(rows);
  t.b.reserve(rows);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(rows * 2);
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    if (!seen.insert(std::uint64_t{a} * d2 + b).second) return false;
    t.a.push_back(a);
    t.b.push_back(b);
    return true;
  };
  if (rows * 2 > d1 * d2) {
    // Dense request: a uniform sample of all pairs.
    std::vector<std::uint64_t> all(d1 * d2);
    std::iota(all.begin(), all.end(), 0ull);
    std::shuffle(all.begin(), all.end(), rng);
    for (std::uint64_t i = 0; i < rows; ++i) add(static_cast<std::uint32_t>(all[i] / d2), static_cast<std::uint32_t>(all[i] % d2));
  } else {
    ZipfSampler z1(spec.fk1.s, d1), z2(spec.fk2.s, d2);
    // Hot keys saturate; past a rejection budget the remainder is drawn uniformly.
    std::uint64_t budget = 20 * rows + 1000;
    while (t.size() < rows && budget > 0) {
      --budget;
      add(z1(rng), z2(rng));
    }
    std::uniform_int_distribution<std::uint64_t> u1(0, d1 - 1), u2(0, d2 - 1);
    while (t.size() < rows) add(static_cast<std::uint32_t>(u1(rng)), static_cast<std::uint32_t>(u2(rng)));
  }
  if (spec.measure) {
    ZipfSampler zm(spec.measure->s, spec.measure->domain);
    t.m.resize(t.size());
    for (auto& v : t.m) v = spec.measure_offset + zm(rng);
  }
  if (report) {
    report->rows = t.size();
    report->fanout1 = static_cast<double>(t.size()) / static_cast<double>(d1);
    report->fanout2 = static_cast<double>(t.size()) / static_cast<double>(d2);
  }
  return t;
}

FragmentBand FragmentBand::parse(std::string_view text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(Errc::Usage, "bad fragment band '" + std::string(text) + "'");
    return v;
  };
  FragmentBand b;
  for (std::string_view sep : {"\xC2\xB1", "+-"}) {
    const auto at = text.find(sep);
    if (at == std::string_view::npos) continue;
    b.center = number(text.substr(0, at));
    b.width = number(text.substr(at + sep.size()));
    if (b.width > b.center) fail(Errc::Usage, "fragment band width exceeds its center");
    return b;
  }
  b.center = number(text);
  return b;
}

Triples gen_unique_fragments(const FragmentBand& band, std::uint64_t domain, std::uint32_t keys, std::uint64_t seed) {
  if (band.center + band.width > domain)
    fail(Errc::InfeasibleFanout, "fragments of up to " + std::to_string(band.center + band.width) +
                                     " distinct values need a domain that large, got " + std::to_string(domain));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> size(band.center - band.width, band.center + band.width);
  Triples t;
  std::vector<std::uint32_t> pool;
  for (std::uint32_t k = 0; k < keys; ++k) {
    const std::uint64_t n = size(rng);
    std::vector<std::uint32_t> vals;
    if (n * 2 > domain) {
      if (pool.size() != domain) {
        pool.resize(domain);
        std::iota(pool.begin(), pool.end(), 0u);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      vals.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
      // Floyd's sampling of n distinct values.
      std::unordered_set<std::uint32_t> chosen;
      for (std::uint64_t j = domain - n; j < domain; ++j) {
        const auto r = static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint64_t>(0, j)(rng));
        if (!chosen.insert(r).second) chosen.insert(static_cast<std::uint32_t>(j));
      }
      vals.assign(chosen.begin(), chosen.end());
    }
    std::sort(vals.begin(), vals.end());
    for (auto v : vals) {
      t.a.push_back(k);
      t.b.push_back(v);
    }
  }
  return t;
}

namespace {

std::string to_csv(const std::vector<std::string>& header, const Triples& t) {
  std::string out;
  out.reserve(t.size() * 20);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  char buf[48];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const int n = t.m.empty() ? std::snprintf(buf, sizeof buf, "%u,%u\n", t.a[i], t.b[i])
                              : std::snprintf(buf, sizeof buf, "%u,%u,%u\n", t.a[i], t.b[i], t.m[i]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

RelationshipSpec rel(std::uint32_t d1, double s1, std::uint32_t d2, double s2, std::uint64_t rows, std::uint64_t seed) {
  RelationshipSpec r;
  r.fk1.domain = d1;
  r.fk1.s = s1;
  r.fk2.domain = d2;
  r.fk2.s = s2;
  r.rows = rows;
  r.seed = seed;
  return r;
}

}  // namespace

GeneratedData gen_pubmed(const PubmedShape& p) {
  GeneratedData g;
  g.schema = "# generated PubMed shape\nentity Doc aka Document size " + std::to_string(p.docs) +
             " (Year int)\nentity Term size " + std::to_string(p.terms) + "\nentity Author size " +
             std::to_string(p.authors) +
             "\nrelationship DT (Doc -> Doc, Term -> Term, Fre int)\nrelationship DA (Doc -> Doc, Author -> Author)\n";
  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<std::uint32_t> year(p.first_year, p.first_year + std::max(1u, p.years) - 1);
  std::string doc = "ID,Year\n";
  for (std::uint32_t d = 0; d < p.docs; ++d) doc += std::to_string(d) + "," + std::to_string(year(rng)) + "\n";
  g.csv["Doc"] = std::move(doc);

  RelationshipSpec dt = rel(p.docs, p.doc_s, p.terms, p.term_s, p.dt_rows, p.seed * 7919 + 1);
  ZipfSpec fre;
  fre.s = p.fre_s;
  fre.domain = p.fre_domain;
  dt.measure = fre;
  GenReport r1{"DT"};
  g.csv["DT"] = to_csv({"Doc", "Term", "Fre"}, gen_relationship(dt, &r1));
  GenReport r2{"DA"};
  g.csv["DA"] = to_csv({"Doc", "Author"},
                       gen_relationship(rel(p.docs, p.doc_s, p.authors, p.author_s, p.da_rows, p.seed * 7919 + 2), &r2));
  g.reports = {r1, r2};
  return g;
}

GeneratedData gen_semmed(const SemmedShape& p) {
  GeneratedData g;
  g.schema = "# generated SemMedDB shape\nentity Concept size " + std::to_string(p.concepts) +
             "\nentity ConceptSemtype size " + std::to_string(p.semtypes) + "\nentity Predication size " +
             std::to_string(p.predications) + "\nentity Sentence size " + std::to_string(p.sentences) +
             "\nrelationship CS (CSID -> ConceptSemtype, CID -> Concept)"
             "\nrelationship PA (PID -> Predication, CSID -> ConceptSemtype)"
             "\nrelationship SP (SID -> Sentence, PID -> Predication)\n";
  GenReport cs{"CS"}, pa{"PA"}, sp{"SP"};
  g.csv["CS"] = to_csv({"CSID", "CID"}, gen_relationship(rel(p.semtypes, p.s, p.concepts, p.s, p.cs_rows, p.seed * 31 + 1), &cs));
  g.csv["PA"] = to_csv({"PID", "CSID"},
                       gen_relationship(rel(p.predications, p.s, p.semtypes, p.s, p.pa_rows, p.seed * 31 + 2), &pa));
  g.csv["SP"] = to_csv({"SID", "PID"},
                       gen_relationship(rel(p.sentences, p.s, p.predications, p.s, p.sp_rows, p.seed * 31 + 3), &sp));
  g.reports = {cs, pa, sp};
  return g;
}

GeneratedData gen_fragment_table(const FragmentBand& band, std::uint64_t domain, std::uint32_t keys,
                                 std::uint64_t seed) {
  GeneratedData g;
  g.schema = "# unique-value fragments\nentity Key size " + std::to_string(keys) + "\nentity Val size " +
             std::to_string(domain) + "\nrelationship UF (Key -> Key, Val -> Val)\n";
  const Triples t = gen_unique_fragments(band, domain, keys, seed);
  g.csv["UF"] = to_csv({"Key", "Val"}, t);
  GenReport r{"UF", t.size(), keys ? double(t.size()) / keys : 0.0, double(t.size()) / double(domain)};
  g.reports = {r};
  return g;
}

Database GeneratedData::load() const {
  Database db = Database::from_schema(schema);
  // Entities first so relationship keys can be checked against them.
  for (const auto& [table, text] : csv)
    if (db.catalog().entity(table)) db.load_csv(table, text);
  for (const auto& [table, text] : csv)
    if (!db.catalog().entity(table)) db.load_csv(table, text);
  return db;
}

void GeneratedData::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / "schema.txt", schema);
  for (const auto& [table, text] : csv) write_file(dir / (table + ".csv"), text);
}

Database GeneratedData::load_dir(const std::filesystem::path& dir) {
  GeneratedData g;
  g.schema = read_file(dir / "schema.txt");
  const Schema s = parse_schema(g.schema);
  auto take = [&](const std::string& name) {
    const auto path = dir / (name + ".csv");
    if (std::filesystem::exists(path)) g.csv[name] = read_file(path);
  };
  for (const auto& e : s.entities) take(e.name);
  for (const auto& r : s.relationships) take(r.name);
  return g.load();
}

}  // namespace fragdb
