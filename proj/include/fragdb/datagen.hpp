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
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fragdb/database.hpp"

// Seeded synthetic data: zipf-distributed columns, deduplicated relationship
// tables, fixed-band unique fragments and whole PubMed/SemMed-shaped datasets.
namespace fragdb {

struct ZipfSpec {
  double s = 1.5;              // exponent, > 0
  std::uint64_t domain = 1;    // values 0..domain-1, value v has rank v+1
  std::uint64_t rows = 0;
  std::optional<double> fanout;  // rows per key; sets rows = fanout * domain when rows is 0
  std::uint64_t seed = 1;

  std::uint64_t row_count() const;
};

// Draws ranks with probability proportional to 1/k^s.
class ZipfSampler {
 public:
  ZipfSampler(double s, std::uint64_t domain);
  std::uint32_t operator()(std::mt19937_64& rng) { return static_cast<std::uint32_t>(dist_(rng)); }
  double pmf(std::uint64_t value) const;
  std::uint64_t domain() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
  double total_ = 0;
  std::discrete_distribution<std::uint64_t> dist_;
};

// A column of zipf values.
std::vector<std::uint32_t> gen_column(const ZipfSpec& spec);

struct Triples {
  std::vector<std::uint32_t> a, b, m;
  std::size_t size() const { return a.size(); }
};

struct RelationshipSpec {
  ZipfSpec fk1;  // domain and exponent of each foreign key
  ZipfSpec fk2;
  std::uint64_t rows = 0;
  std::optional<ZipfSpec> measure;  // values measure_offset + zipf value
  std::uint32_t measure_offset = 1;
  std::uint64_t seed = 1;
};

struct GenReport {
  std::string table;
  std::uint64_t rows = 0;
  double fanout1 = 0;  // rows per fk1 key
  double fanout2 = 0;
  std::string to_string() const;
};

// Rows distinct on (fk1, fk2); InfeasibleFanout when rows > D1 * D2.
Triples gen_relationship(const RelationshipSpec& spec, GenReport* report = nullptr);

// Fragment sizes drawn uniformly from center +- width.
struct FragmentBand {
  std::uint64_t center = 0;
  std::uint64_t width = 0;
  static FragmentBand parse(std::string_view text);  // "100000±1000", "100000+-1000" or "100000"
};

// `keys` fragments of distinct sorted values in [0, domain), one per key.
Triples gen_unique_fragments(const FragmentBand& band, std::uint64_t domain, std::uint32_t keys, std::uint64_t seed);

struct PubmedShape {
  std::uint32_t docs = 10000, terms = 2000, authors = 5000;
  std::uint64_t dt_rows = 100000, da_rows = 30000;
  double doc_s = 0.6, term_s = 0.9, author_s = 0.7;
  std::uint32_t fre_domain = 20;
  double fre_s = 1.5;
  std::uint32_t first_year = 1990, years = 27;
  std::uint64_t seed = 1;
};

struct SemmedShape {
  std::uint32_t concepts = 2000, semtypes = 3000, predications = 20000, sentences = 30000;
  std::uint64_t cs_rows = 4000, pa_rows = 40000, sp_rows = 60000;
  double s = 0.8;
  std::uint64_t seed = 1;
};

// Schema text plus one CSV per table.
struct GeneratedData {
  std::string schema;
  std::map<std::string, std::string> csv;
  std::vector<GenReport> reports;

  Database load() const;  // tables loaded, indices not built
  void write(const std::filesystem::path& dir) const;  // schema.txt and <Table>.csv
  static Database load_dir(const std::filesystem::path& dir);
};

GeneratedData gen_pubmed(const PubmedShape& shape);
GeneratedData gen_semmed(const SemmedShape& shape);
// Single relationship UF(Key, Val) whose fragments follow the band.
GeneratedData gen_fragment_table(const FragmentBand& band, std::uint64_t domain, std::uint32_t keys,
                                 std::uint64_t seed);

}  // namespace fragdb
