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


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "fragdb/datagen.hpp"
#include "fragdb/error.hpp"

namespace fragdb {
namespace {

// Pearson statistic against the zipf pmf; bins with expected count below 5 are
// pooled into one tail bin. Returns (statistic, degrees of freedom).
std::pair<double, double> chi_square(const std::vector<std::uint32_t>& values, const ZipfSampler& z) {
  std::vector<double> observed(z.domain(), 0);
  for (auto v : values) observed.at(v) += 1;
  const double n = static_cast<double>(values.size());
  double stat = 0, tail_obs = 0, tail_exp = 0, bins = 0;
  for (std::uint64_t v = 0; v < z.domain(); ++v) {
    const double e = n * z.pmf(v);
    if (e < 5) {
      tail_obs += observed[v];
      tail_exp += e;
      continue;
    }
    stat += (observed[v] - e) * (observed[v] - e) / e;
    ++bins;
  }
  if (tail_exp > 0) {
    stat += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
    ++bins;
  }
  return {stat, bins - 1};
}

double p_value(std::pair<double, double> chi) {
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(chi.second), chi.first));
}

TEST(Zipf, PmfIsNormalizedAndFollowsThePowerLaw) {
  ZipfSampler z(1.5, 100);
  double total = 0;
  for (std::uint64_t v = 0; v < 100; ++v) total += z.pmf(v);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(z.pmf(0) / z.pmf(3), std::pow(4.0, 1.5), 1e-9);
}

TEST(Zipf, HistogramPassesChiSquare) {
  ZipfSpec spec;
  spec.s = 1.5;
  spec.domain = 100;
  spec.rows = 10000;
  spec.seed = 7;
  const auto values = gen_column(spec);
  ASSERT_EQ(values.size(), 10000u);
  ZipfSampler z(1.5, 100);
  const double p = p_value(chi_square(values, z));
  EXPECT_GT(p, 1e-3);

  // The same statistic rejects a uniform column outright.
  std::vector<std::uint32_t> uniform(10000);
  for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = static_cast<std::uint32_t>(i % 100);
  EXPECT_LT(p_value(chi_square(uniform, z)), 1e-12);
}

TEST(Zipf, ChiSquareRejectionRateIsNominal) {
  ZipfSampler z(1.5, 100);
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    ZipfSpec spec{1.5, 100, 10000, std::nullopt, seed};
    rejected += p_value(chi_square(gen_column(spec), z)) < 0.01;
  }
  // 1% nominal; 4 of 40 would be a 1-in-1000 event for a correct sampler.
  EXPECT_LE(rejected, 3);
}

TEST(Zipf, ZeroRowsGivesAnEmptyColumn) {
  ZipfSpec spec;
  spec.domain = 100;
  EXPECT_TRUE(gen_column(spec).empty());

  RelationshipSpec r;
  r.fk1.domain = 10;
  r.fk2.domain = 10;
  r.rows = 0;
  GenReport rep;
  EXPECT_EQ(gen_relationship(r, &rep).size(), 0u);
  EXPECT_EQ(rep.rows, 0u);
}

TEST(Zipf, FanoutSetsTheRowCount) {
  ZipfSpec spec;
  spec.domain = 50;
  spec.fanout = 4.0;
  EXPECT_EQ(spec.row_count(), 200u);
  EXPECT_EQ(gen_column(spec).size(), 200u);
}

TEST(Relationship, RowsAreDistinctAndInDomain) {
  RelationshipSpec r;
  r.fk1 = {1.1, 30, 0, std::nullopt, 1};
  r.fk2 = {0.8, 40, 0, std::nullopt, 2};
  r.rows = 900;
  r.measure = ZipfSpec{1.5, 20, 0, std::nullopt, 3};
  r.seed = 11;
  GenReport rep;
  const Triples t = gen_relationship(r, &rep);
  ASSERT_EQ(t.size(), 900u);
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_LT(t.a[i], 30u);
    EXPECT_LT(t.b[i], 40u);
    EXPECT_GE(t.m[i], 1u);
    EXPECT_LE(t.m[i], 20u);
    pairs.emplace(t.a[i], t.b[i]);
  }
  EXPECT_EQ(pairs.size(), 900u);
  EXPECT_DOUBLE_EQ(rep.fanout1, 900.0 / 30);
  EXPECT_DOUBLE_EQ(rep.fanout2, 900.0 / 40);
}

TEST(Relationship, FullCrossProductIsFeasibleOneMoreIsNot) {
  RelationshipSpec r;
  r.fk1.domain = 6;
  r.fk2.domain = 7;
  r.rows = 42;
  EXPECT_EQ(gen_relationship(r).size(), 42u);
  r.rows = 43;
  try {
    gen_relationship(r);
    FAIL() << "expected InfeasibleFanout";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InfeasibleFanout);
  }
}

TEST(FragmentBand, Parses) {
  auto b = FragmentBand::parse("100000±1000");
  EXPECT_EQ(b.center, 100000u);
  EXPECT_EQ(b.width, 1000u);
  b = FragmentBand::parse("500+-20");
  EXPECT_EQ(b.center, 500u);
  EXPECT_EQ(b.width, 20u);
  b = FragmentBand::parse("64");
  EXPECT_EQ(b.center, 64u);
  EXPECT_EQ(b.width, 0u);
  EXPECT_THROW(FragmentBand::parse("abc"), Error);
}

TEST(FragmentBand, GeneratedFragmentsStayInTheBand) {
  const auto band = FragmentBand::parse("100000±1000");
  const Triples t = gen_unique_fragments(band, 1u << 24, 6, 5);
  std::map<std::uint32_t, std::vector<std::uint32_t>> frags;
  for (std::size_t i = 0; i < t.size(); ++i) frags[t.a[i]].push_back(t.b[i]);
  ASSERT_EQ(frags.size(), 6u);
  for (const auto& [key, vals] : frags) {
    EXPECT_GE(vals.size(), 99000u);
    EXPECT_LE(vals.size(), 101000u);
    EXPECT_TRUE(std::is_sorted(vals.begin(), vals.end()));
    EXPECT_EQ(std::adjacent_find(vals.begin(), vals.end()), vals.end());
    EXPECT_LT(vals.back(), 1u << 24);
  }
}

TEST(FragmentBand, BandWiderThanTheDomainIsInfeasible) {
  EXPECT_THROW(gen_unique_fragments(FragmentBand::parse("200+-10"), 100, 2, 1), Error);
}

TEST(Datasets, SeededGenerationIsByteIdentical) {
  PubmedShape p;
  p.docs = 500, p.terms = 100, p.authors = 200, p.dt_rows = 3000, p.da_rows = 800;
  p.seed = 42;
  const auto a = gen_pubmed(p);
  const auto b = gen_pubmed(p);
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.schema, b.schema);
  p.seed = 43;
  EXPECT_NE(gen_pubmed(p).csv, a.csv);

  const auto dir = std::filesystem::temp_directory_path() / "fragdb_datagen_test";
  std::filesystem::remove_all(dir);
  a.write(dir / "x");
  b.write(dir / "y");
  for (const auto& [table, text] : a.csv) {
    EXPECT_EQ(read_file(dir / "x" / (table + ".csv")), read_file(dir / "y" / (table + ".csv")));
    EXPECT_EQ(read_file(dir / "x" / (table + ".csv")), text);
  }
  std::filesystem::remove_all(dir);
}

TEST(Datasets, PubmedLoadsWithRequestedRowCounts) {
  PubmedShape p;
  p.docs = 400, p.terms = 80, p.authors = 150, p.dt_rows = 2500, p.da_rows = 600;
  const auto g = gen_pubmed(p);
  Database db = g.load();
  EXPECT_EQ(db.table("DT").rows(), 2500u);
  EXPECT_EQ(db.table("DA").rows(), 600u);
  EXPECT_EQ(db.table("Doc").rows(), 400u);
  db.build_indices();
  EXPECT_GT(db.index_bytes(), 0u);
  ASSERT_EQ(g.reports.size(), 2u);
  EXPECT_EQ(g.reports[0].rows, 2500u);
}

TEST(Datasets, SemmedLoads) {
  SemmedShape s;
  s.concepts = 50, s.semtypes = 60, s.predications = 200, s.sentences = 300;
  s.cs_rows = 80, s.pa_rows = 400, s.sp_rows = 600;
  Database db = gen_semmed(s).load();
  db.build_indices();
  EXPECT_EQ(db.table("SP").rows(), 600u);
}

}  // namespace
}  // namespace fragdb
