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

#include <cstdlib>
#include <set>

#include "fragdb/error.hpp"
#include "fragdb/planner.hpp"
#include "support/toy.hpp"

namespace fragdb {
namespace {

using testing::query_text;

const Database& db_for(const std::string& q) {
  static const Database p = testing::golden_pubmed(), s = testing::golden_semmed();
  return q == "cs" ? s : p;
}

PhysicalPlan plan_of(const std::string& q, const Database& db, PlanOptions o = {}) {
  return plan(compile_query(query_text(q), db.catalog()), db.catalog(), o);
}

std::vector<NodeKind> kinds(const PhysicalPlan& p) {
  std::vector<NodeKind> out;
  for (const auto& n : p.nodes) out.push_back(n.kind);
  return out;
}

const std::vector<std::string> kQueries = {"sd", "fsd", "as", "ad", "fad", "cs"};

TEST(Plan, AuthorSimilarityIsFiveFragmentJoins) {
  const PhysicalPlan p = plan_of("as", db_for("as"));
  using K = NodeKind;
  ASSERT_EQ(kinds(p), (std::vector<K>{K::Seed, K::FragJoin, K::FragJoin, K::FragJoin, K::FragJoin,
                                      K::FragJoin, K::DenseAgg}));
  const std::vector<std::string> indices = {"DA.Author", "DT.Doc", "DT.Term", "Doc.ID", "DA.Doc"};
  for (std::size_t i = 0; i < indices.size(); ++i)
    EXPECT_EQ(p.nodes[i + 1].table + "." + p.nodes[i + 1].key, indices[i]);
  EXPECT_TRUE(p.nodes[4].singleton);
  EXPECT_EQ(p.nodes[0].entity, "Author");
  EXPECT_EQ(p.nodes.back().group_entity, "Author");
  EXPECT_EQ(scratch_bytes(p), 4u * 9);
}

TEST(Plan, AuthorsDiscoveryIntersectsThenSemijoins) {
  const PhysicalPlan p = plan_of("ad", db_for("ad"));
  using K = NodeKind;
  ASSERT_EQ(kinds(p), (std::vector<K>{K::MergeIntersect, K::FragSemiJoin, K::DenseAgg}));
  EXPECT_EQ(p.nodes[0].inputs.size(), 2u);
  EXPECT_EQ(p.nodes[1].in_slot, p.nodes[0].out_slot);
  EXPECT_EQ(p.nodes[1].dedup_domain, 40u);
  EXPECT_EQ(scratch_bytes(p), 4u * 9 + 40);
}

TEST(Plan, SelectionOnlyHasNoAggregationOrScratch) {
  const Database& db = db_for("sd");
  const PhysicalPlan p = plan(compile_query("SELECT dt.Term FROM DT dt WHERE dt.Doc = ?", db.catalog()), db.catalog());
  using K = NodeKind;
  EXPECT_EQ(kinds(p), (std::vector<K>{K::Seed, K::FragJoin, K::Output}));
  EXPECT_FALSE(p.aggregates());
  EXPECT_EQ(scratch_bytes(p), 0u);
}

TEST(Plan, ThetaFollowsEncodings) {
  const Database bb = testing::golden_pubmed({{"DT.Term.Doc", EncodingKind::BB}});
  EXPECT_EQ(plan_of("ad", bb).nodes[0].theta, 0);
  EXPECT_EQ(plan_of("ad", bb, {.force_decode_intersection = true}).nodes[0].theta, 1);
  const Database ua = testing::golden_pubmed({}, EncodingPolicy::AllUA);
  EXPECT_EQ(plan_of("ad", ua).nodes[0].theta, 1);
}

TEST(Plan, EncodingsComeFromMetadata) {
  const Database ua = testing::golden_pubmed({}, EncodingPolicy::AllUA);
  for (const auto& n : plan_of("as", ua).nodes)
    for (const auto& r : n.reads) EXPECT_EQ(r.kind, EncodingKind::UA) << n.table << "." << r.attr;
  const Database huf = testing::golden_pubmed({{"DT.Doc.Fre", EncodingKind::HUF}});
  bool found = false;
  for (const auto& n : plan_of("as", huf).nodes)
    for (const auto& r : n.reads)
      if (n.table == "DT" && n.key == "Doc" && r.attr == "Fre") found = r.kind == EncodingKind::HUF;
  EXPECT_TRUE(found);
}

TEST(Plan, MissingIndexIsReported) {
  Database db = Database::from_schema(testing::kPubmedSchema);
  const Rqna q = compile_query(query_text("as"), db.catalog());
  try {
    plan(q, db.catalog());
    FAIL() << "planned without indices";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingIndex);
  }
}

// Every operator reads a slot bound by an earlier node, and slots are bound once.
TEST(Plan, SlotsAreBoundBeforeUse) {
  for (const auto& q : kQueries) {
    const PhysicalPlan p = plan_of(q, db_for(q));
    std::set<std::size_t> bound;
    auto bind = [&](std::size_t s) { EXPECT_TRUE(bound.insert(s).second) << q << " rebinds s" << s; };
    for (const auto& n : p.nodes) {
      switch (n.kind) {
        case NodeKind::Seed:
        case NodeKind::MergeIntersect:
          bind(n.out_slot);
          break;
        case NodeKind::FragJoin:
        case NodeKind::FragSemiJoin:
          EXPECT_TRUE(bound.count(n.in_slot)) << q;
          for (const auto& r : n.reads) bind(r.slot);
          break;
        case NodeKind::DenseAgg: {
          EXPECT_TRUE(bound.count(n.group_slot)) << q;
          std::vector<AttrRef> deps;
          if (n.agg.arg) n.agg.arg->collect(deps);
          for (const auto& d : deps) EXPECT_TRUE(bound.count(d.var)) << q;
          break;
        }
        case NodeKind::Output:
          for (auto s : n.out_slots) EXPECT_TRUE(bound.count(s)) << q;
          break;
      }
    }
    EXPECT_EQ(p.aggregates(), p.nodes.back().kind == NodeKind::DenseAgg);
  }
}

TEST(Plan, Deterministic) {
  for (const auto& q : kQueries) EXPECT_EQ(dump(plan_of(q, db_for(q))), dump(plan_of(q, db_for(q)))) << q;
}

TEST(Golden, PlanDumps) {
  const char* update = std::getenv("FRAGDB_UPDATE_GOLDEN");
  for (const auto& q : kQueries) {
    const std::string got = dump(plan_of(q, db_for(q)));
    const std::string path = std::string(FRAGDB_GOLDEN_DIR) + "/" + q + ".plan";
    if (update) {
      testing::write_golden(path, got);
      continue;
    }
    EXPECT_EQ(testing::read_golden(path), got) << q;
  }
}

}  // namespace
}  // namespace fragdb
