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

#include <random>
#include <set>
#include <thread>

#include "fragdb/baselines.hpp"
#include "fragdb/error.hpp"
#include "fragdb/executor.hpp"
#include "support/toy.hpp"

namespace fragdb {
namespace {

using testing::query_text;

const std::vector<std::string> kQueries = {"sd", "fsd", "as", "ad", "fad", "cs"};

ResultSet run(const std::string& q, const Database& db, const std::vector<std::string>& params,
              const ExecOptions& o = {}, ExecStats* stats = nullptr, PlanOptions po = {}) {
  return execute(compile_plan(query_text(q), db.catalog(), po), db, params, o, stats);
}

TEST(Execute, SimilarDocumentsToy) {
  const Database db = testing::toy_db();
  const ResultSet r = run("sd", db, {"0"});
  EXPECT_EQ(r.keys, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(r.ints, (std::vector<std::int64_t>{2, 1}));
}

TEST(Execute, AuthorWithoutDocumentsGivesEmptyResult) {
  const Database db = testing::pubmed_db(2, 2, 2, {2000, 2001}, {{0, 0, 1}, {1, 0, 2}}, {{0, 0}, {1, 0}});
  EXPECT_EQ(run("as", db, {"1"}).size(), 0u);
  EXPECT_EQ(run("as", db, {"0"}).size(), 1u);
}

TEST(Execute, FrequencyYearArithmetic) {
  // Seed doc 0 (2000) and doc 1 (2010) share term 0 with frequencies 2 and 3.
  const Database db = testing::toy_db();
  const ResultSet r = run("fsd", db, {"0"});
  ASSERT_TRUE(r.real);
  ASSERT_EQ(r.keys, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_DOUBLE_EQ(r.reals[1], 6.0 / 11.0);
  EXPECT_DOUBLE_EQ(r.reals[0], 2.0 * 2.0 + 1.0 * 1.0);
}

TEST(Execute, ParameterCountIsChecked) {
  const Database db = testing::toy_db();
  try {
    run("sd", db, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParameterMismatch);
  }
}

TEST(Collect, ScansSeenFlags) {
  DenseAggState<std::int64_t> s{{5, 0, 2}, {1, 0, 1}};
  const ResultSet r = collect(s);
  EXPECT_EQ(r.keys, (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(r.ints, (std::vector<std::int64_t>{5, 2}));
  DenseAggState<double> none{{0, 0}, {0, 0}};
  EXPECT_EQ(collect(none).size(), 0u);
}

// Every execution variant agrees with the oracle on random instances.
TEST(Execute, MatchesOracleAcrossVariants) {
  std::mt19937_64 rng(101);
  const std::vector<ExecOptions> variants = {
      {},
      {.lookup = LookupMode::BinarySearch},
      {.agg = AggMode::HashMap},
      {.lookup = LookupMode::BinarySearch, .agg = AggMode::HashMap},
      {.instrumented = true},
      {.compact_count = true},
      {.threads = 2, .oversubscribe = true},
      {.threads = 4, .oversubscribe = true, .agg = AggMode::HashMap},
      {.threads = 3, .oversubscribe = true, .lookup = LookupMode::BinarySearch, .instrumented = true},
  };
  for (const auto& q : kQueries) {
    int nonempty = 0;
    for (int round = 0; round < 30; ++round) {
      const auto policy = round % 3 == 0 ? EncodingPolicy::AllUA : EncodingPolicy::Chosen;
      const Database db = q == "cs" ? testing::random_semmed(rng, 1 + round % 2, policy)
                                    : testing::random_pubmed(rng, 1 + round % 2, policy);
      const auto params = testing::random_params(rng, q, db);
      const Rqna r = compile_query(query_text(q), db.catalog());
      const ResultSet expected = oracle_execute(r, db, params);
      nonempty += expected.size() > 0;
      const PhysicalPlan p = plan(r, db.catalog());
      const Executor ex(db);
      for (std::size_t v = 0; v < variants.size(); ++v) {
        const ResultSet got = ex.run(p, params, variants[v]);
        const double tol = variants[v].threads > 1 ? 1e-6 : 1e-9;
        const auto diff = compare_results(expected, got, tol);
        EXPECT_FALSE(diff) << q << " round " << round << " variant " << v << ": " << *diff;
      }
    }
    EXPECT_GE(nonempty, 5) << q;
  }
}

TEST(Execute, ThreadCountsGiveIdenticalIntegers) {
  std::mt19937_64 rng(7);
  const Database db = testing::random_pubmed(rng, 6);
  for (const auto& q : {"sd", "ad", "fad"}) {
    const auto params = testing::random_params(rng, q, db);
    const ResultSet one = run(q, db, params);
    for (unsigned t : {2u, 4u, 8u}) EXPECT_EQ(run(q, db, params, {.threads = t, .oversubscribe = true}), one) << q << " threads " << t;
  }
  const ResultSet one = run("as", db, {"1"});
  for (unsigned t : {2u, 4u, 8u}) EXPECT_FALSE(compare_results(one, run("as", db, {"1"}, {.threads = t, .oversubscribe = true}), 1e-6));
}

TEST(Execute, IntersectionThetaVariantsAgree) {
  std::mt19937_64 rng(9);
  for (int round = 0; round < 20; ++round) {
    Database db = testing::random_pubmed(rng, 2);
    db.build_indices(EncodingPolicy::Chosen, {{"DT.Term.Doc", EncodingKind::BB}});
    const auto params = testing::random_params(rng, "ad", db);
    const PhysicalPlan bitmap = compile_plan(query_text("ad"), db.catalog());
    const PhysicalPlan decoded = compile_plan(query_text("ad"), db.catalog(), {.force_decode_intersection = true});
    ASSERT_EQ(bitmap.nodes[0].theta, 0);
    ASSERT_EQ(decoded.nodes[0].theta, 1);
    for (auto lookup : {LookupMode::Direct, LookupMode::BinarySearch})
      EXPECT_EQ(execute(bitmap, db, params, {.lookup = lookup}), execute(decoded, db, params, {.lookup = lookup}));
  }
}

TEST(Execute, EncodingTransparency) {
  for (const auto& q : kQueries) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      std::mt19937_64 a(seed), b(seed);
      const Database chosen = q == "cs" ? testing::random_semmed(a, 2) : testing::random_pubmed(a, 2);
      const Database ua = q == "cs" ? testing::random_semmed(b, 2, EncodingPolicy::AllUA)
                                    : testing::random_pubmed(b, 2, EncodingPolicy::AllUA);
      const auto params = testing::random_params(a, q, chosen);
      EXPECT_EQ(run(q, chosen, params), run(q, ua, params)) << q << " seed " << seed;
    }
  }
}

TEST(Execute, MemoryReportMatchesScratchBytes) {
  std::mt19937_64 rng(5);
  for (const auto& q : kQueries) {
    const Database db = q == "cs" ? testing::random_semmed(rng, 2) : testing::random_pubmed(rng, 2);
    const auto params = testing::random_params(rng, q, db);
    const PhysicalPlan p = compile_plan(query_text(q), db.catalog());
    for (unsigned t : {1u, 4u}) {
      ExecStats st;
      execute(p, db, params, {.threads = t, .oversubscribe = true}, &st);
      EXPECT_EQ(st.memory.accounted(), scratch_bytes(p)) << q;
    }
    if (p.nodes.back().agg.fn == AggFn::Count) {
      ExecStats st;
      execute(p, db, params, {.compact_count = true}, &st);
      EXPECT_EQ(st.memory.physical_bytes, scratch_bytes(p)) << q;
    }
  }
}

// The semijoin expands each distinct key once, however often it arrives.
TEST(Execute, SemijoinExpandsDistinctKeysOnce) {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 10; ++round) {
    const Database db = testing::random_semmed(rng, 3);
    const std::uint32_t concept_id = std::uniform_int_distribution<std::uint32_t>(0, 2)(rng);
    // Sentences reached from the concept, computed on the raw tables.
    const Table& cs = db.table("CS");
    const Table& pa = db.table("PA");
    const Table& sp = db.table("SP");
    std::set<std::uint32_t> semtypes, preds, sentences;
    for (std::size_t i = 0; i < cs.rows(); ++i)
      if (cs.column("CID").values[i] == concept_id) semtypes.insert(cs.column("CSID").values[i]);
    for (std::size_t i = 0; i < pa.rows(); ++i)
      if (semtypes.count(pa.column("CSID").values[i])) preds.insert(pa.column("PID").values[i]);
    for (std::size_t i = 0; i < sp.rows(); ++i)
      if (preds.count(sp.column("PID").values[i])) sentences.insert(sp.column("SID").values[i]);
    for (unsigned t : {1u, 4u}) {
      ExecStats st;
      run("cs", db, {std::to_string(concept_id)}, {.threads = t, .oversubscribe = true, .instrumented = true}, &st);
      EXPECT_EQ(st.semijoin_probes, sentences.size()) << "threads " << t;
    }
  }
}

TEST(Execute, WorkersAreCappedUnlessOversubscribed) {
  const Database db = testing::toy_db();
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  ExecStats capped, forced;
  run("sd", db, {"0"}, {.threads = 64}, &capped);
  run("sd", db, {"0"}, {.threads = 64, .oversubscribe = true}, &forced);
  EXPECT_EQ(capped.workers, std::min(64u, hw));
  EXPECT_EQ(forced.workers, 64u);
}

TEST(Execute, InstrumentationCountsFragments) {
  const Database db = testing::toy_db(EncodingPolicy::AllUA);
  ExecStats st;
  run("sd", db, {"0"}, {.instrumented = true}, &st);
  // I_DT.Doc(0) -> Term [0,1]; I_DT.Term(0) -> Doc [0,1]; I_DT.Term(1) -> Doc [0].
  EXPECT_EQ(st.fragments, 3u);
  EXPECT_EQ(st.elements, 5u);
  ExecStats plain;
  run("sd", db, {"0"}, {}, &plain);
  EXPECT_EQ(plain.fragments, 0u);
}

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

TEST(EmitSource, AuthorSimilarityHasFiveJoinNests) {
  std::mt19937_64 rng(1);
  const Database db = testing::random_pubmed(rng, 2);
  const std::string src = emit_source(compile_plan(query_text("as"), db.catalog()), db.catalog());
  EXPECT_EQ(occurrences(src, "// join "), 5u) << src;
  EXPECT_EQ(occurrences(src, "for (size_t"), 4u) << src;  // the Doc row is read in place
  EXPECT_EQ(occurrences(src, "entity row read in place"), 1u);
  EXPECT_EQ(occurrences(src, "R[v_da2_Author] +="), 1u) << src;
  EXPECT_EQ(occurrences(src, "decode"), 7u) << src;  // one per decoded attribute
  EXPECT_LT(src.find("double R["), src.find("// operators"));
  EXPECT_EQ(src, emit_source(compile_plan(query_text("as"), db.catalog()), db.catalog()));
}

TEST(EmitSource, SelectionOnlyIsOneLoop) {
  const Database db = testing::toy_db();
  const std::string src =
      emit_source(compile_plan("SELECT dt.Term FROM DT dt WHERE dt.Doc = ?", db.catalog()), db.catalog());
  EXPECT_EQ(occurrences(src, "for (size_t"), 1u) << src;
  EXPECT_EQ(occurrences(src, "R["), 0u) << src;
  EXPECT_EQ(occurrences(src, "out.row("), 1u);
}

TEST(EmitSource, DiscoveryIntersectsThenTestsAndSets) {
  Database db = testing::toy_db();
  db.build_indices(EncodingPolicy::Chosen, {{"DT.Term.Doc", EncodingKind::BB}});
  const std::string src = emit_source(compile_plan(query_text("ad"), db.catalog()), db.catalog());
  const auto intersect = src.find("intersectBB(");
  const auto test = src.find("if (!B_da_Doc[");
  const auto update = src.find("R[v_da_Author] += 1;");
  ASSERT_NE(intersect, std::string::npos) << src;
  ASSERT_NE(test, std::string::npos) << src;
  ASSERT_NE(update, std::string::npos) << src;
  EXPECT_LT(intersect, test);
  EXPECT_LT(test, update);
  EXPECT_NE(src.find("B_da_Doc[v_intersect_da_Doc] = true;"), std::string::npos) << src;
}

}  // namespace
}  // namespace fragdb
