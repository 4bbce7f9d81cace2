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
#include <fstream>
#include <random>

#include "fragdb/baselines.hpp"
#include "fragdb/error.hpp"
#include "fragdb/normalize.hpp"
#include "fragdb/sql.hpp"
#include "support/toy.hpp"

namespace fragdb {
namespace {

using testing::query_text;

Catalog pubmed() { return Catalog(parse_schema(read_file(std::string(FRAGDB_QUERY_DIR) + "/pubmed.schema"))); }
Catalog semmed() { return Catalog(parse_schema(read_file(std::string(FRAGDB_QUERY_DIR) + "/semmed.schema"))); }

const Catalog& catalog_for(const std::string& q) {
  static const Catalog p = pubmed(), s = semmed();
  return q == "cs" ? s : p;
}

const std::vector<std::string> kQueries = {"sd", "fsd", "as", "ad", "fad", "cs"};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Internal;
}

// Verbatim from the introduction, with the author constant inline.
constexpr const char* kIntroAs =
    "SELECT da2.Author,SUM(dt1.Fre\xC3\x97" "dt2.Fre)/(2017-d.Year)\n"
    "FROM (((DA da1 JOIN DT dt1 ON da1.Doc=dt1.Doc)\n"
    "JOIN DT dt2 ON dt1.Term = dt2.Term)\n"
    "JOIN Doc d ON dt2.Doc=d.ID)\n"
    "JOIN DA da2 ON dt2.Doc=da2.Doc\n"
    "WHERE da1.Author = 7\n"
    "GROUP BY da2.Author\n";

TEST(ParseSql, IntroAuthorSimilarityIsFourJoins) {
  const auto st = sql::parse_sql(kIntroAs);
  EXPECT_EQ(st.select.from.size(), 5u);
  EXPECT_EQ(st.select.on.size(), 4u);
  ASSERT_EQ(st.select.where.size(), 1u);
  EXPECT_EQ(sql::format_expr(st.select.where[0].lhs), "da1.Author");
  EXPECT_EQ(st.select.where[0].rhs.ival, 7);
  ASSERT_EQ(st.select.group_by.size(), 1u);
  EXPECT_EQ(st.select.group_by[0].name, "Author");
  EXPECT_EQ(st.param_count, 0u);

  const Algebra a = translate(st, pubmed());
  ASSERT_EQ(a.root.group_by.size(), 1u);
  EXPECT_EQ(format_attr(a.vars, a.root.group_by[0]), "da2.Author");
  ASSERT_TRUE(a.root.agg);
  EXPECT_EQ(format_agg(a.vars, *a.root.agg), "SUM((dt1.Fre * dt2.Fre) / (2017 - d.Year))");
}

TEST(ParseSql, GroupByIdOnRelationshipIsTheForeignKey) {
  const Algebra a = translate_sql(query_text("as"), pubmed());
  EXPECT_EQ(format_attr(a.vars, a.root.group_by.at(0)), "da2.Author");
  // Same tree as the introduction's listing once the constant is abstracted.
  Rqna intro = normalize(translate_sql(kIntroAs, pubmed()), pubmed());
  const Rqna file = normalize(a, pubmed());
  EXPECT_EQ(intro.chain.leaf.value.literal, "7");
  intro.chain.leaf.value = file.chain.leaf.value;
  intro.param_count = file.param_count;
  EXPECT_EQ(intro, file);
}

TEST(ParseSql, AuthorsDiscoveryIsInOverIntersection) {
  std::string text = "SELECT da.Author, COUNT(*) FROM DA da WHERE da.Doc IN ";
  for (int i = 0; i < 3; ++i) text += std::string(i ? " INTERSECT " : "") + "(SELECT dt.Doc FROM DT dt WHERE dt.Term = ?)";
  text += " GROUP BY da.Author";
  const auto st = sql::parse_sql(text);
  ASSERT_EQ(st.select.where.size(), 1u);
  EXPECT_EQ(st.select.where[0].kind, sql::Predicate::Kind::In);
  EXPECT_EQ(st.select.where[0].set.terms.size(), 3u);
  EXPECT_EQ(st.param_count, 3u);

  const Rqna r = compile_query(text, pubmed());
  ASSERT_EQ(r.chain.leaf.kind, Leaf::Kind::SemiJoin);
  EXPECT_EQ(r.chain.leaf.context->terms.size(), 3u);
  // Reused alias dt is made unique per subquery.
  EXPECT_EQ(r.vars[r.chain.leaf.context->terms[2].var].name, "dt_3");
}

TEST(ParseSql, ParenthesizedIntersectionForms) {
  const std::string a =
      "SELECT da.Author, COUNT(*) FROM DA da WHERE da.Doc IN ((SELECT dt.Doc FROM DT dt WHERE dt.Term = 1) "
      "INTERSECT (SELECT dt.Doc FROM DT dt WHERE dt.Term = 2)) GROUP BY da.Author";
  const std::string b =
      "SELECT da.Author, COUNT(*) FROM DA da WHERE da.Doc IN (SELECT dt.Doc FROM DT dt WHERE dt.Term = 1 "
      "INTERSECT SELECT dt.Doc FROM DT dt WHERE dt.Term = 2) GROUP BY da.Author";
  EXPECT_EQ(dump(compile_query(a, pubmed())), dump(compile_query(b, pubmed())));
}

TEST(ParseSql, RejectsOutsideTheSubset) {
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT * FROM DT"); }), Errc::UnsupportedFeature);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM DT dt WHERE dt.Term = 1 OR dt.Term = 2"); }),
            Errc::UnsupportedFeature);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT a.Doc FROM DT a LEFT JOIN DT b ON a.Term = b.Term"); }),
            Errc::UnsupportedFeature);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM DT dt WHERE dt.Term > 3"); }), Errc::UnsupportedFeature);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM DT dt ORDER BY dt.Doc"); }), Errc::UnsupportedFeature);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM (SELECT 1) x"); }), Errc::UnsupportedFeature);
}

TEST(ParseSql, SyntaxErrorsCarryPosition) {
  try {
    sql::parse_sql("SELECT dt.Doc\nFROM DT dt WHERE = 3");
    FAIL() << "expected SyntaxError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SyntaxError);
    EXPECT_NE(std::string(e.what()).find("2:18"), std::string::npos) << e.what();
  }
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM DT dt WHERE dt.Term = 'open"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { sql::parse_sql("SELECT dt.Doc FROM DT dt GROUP dt.Doc"); }), Errc::SyntaxError);
}

TEST(Translate, ResolutionErrors) {
  const Catalog c = pubmed();
  EXPECT_EQ(code_of([&] { translate_sql("SELECT x.Doc FROM Nope x WHERE x.Doc = 1", c); }), Errc::UnknownTable);
  EXPECT_EQ(code_of([&] { translate_sql("SELECT dt.Nope FROM DT dt WHERE dt.Doc = 1", c); }),
            Errc::UnknownAttribute);
  EXPECT_EQ(code_of([&] { translate_sql("SELECT Doc FROM DT a, DA b WHERE a.Doc = b.Doc AND a.Term = 1", c); }),
            Errc::AmbiguousAttribute);
  EXPECT_EQ(code_of([&] { translate_sql("SELECT a.Doc FROM DT a, DT A WHERE a.Term = 1", c); }), Errc::SyntaxError);
}

TEST(Translate, ScaledCountBecomesSum) {
  const Algebra a = translate_sql(
      "SELECT dt2.Doc, COUNT(*) / (abs(d1.Year - d2.Year) + 1) FROM Doc d1 JOIN DT dt1 ON d1.ID = dt1.Doc "
      "JOIN DT dt2 ON dt1.Term = dt2.Term JOIN Doc d2 ON d2.ID = dt2.Doc WHERE d1.ID = ? GROUP BY dt2.Doc",
      pubmed());
  ASSERT_TRUE(a.root.agg);
  EXPECT_EQ(format_agg(a.vars, *a.root.agg), "SUM(1 / (abs(d1.Year - d2.Year) + 1))");
  EXPECT_TRUE(a.root.agg->real());
}

TEST(Normalize, SimilarDocumentsShape) {
  const Rqna r = compile_query(query_text("sd"), pubmed());
  ASSERT_TRUE(r.agg);
  EXPECT_EQ(r.agg->fn, AggFn::Count);
  EXPECT_EQ(format_attr(r.vars, r.group_by.at(0)), "dt2.Doc");
  EXPECT_EQ(r.chain.leaf.kind, Leaf::Kind::Select);
  EXPECT_EQ(format_attr(r.vars, {r.chain.leaf.var, r.chain.leaf.attr}), "dt1.Doc");
  ASSERT_EQ(r.chain.joins.size(), 1u);
  EXPECT_EQ(format_attr(r.vars, {r.chain.joins[0].var, r.chain.joins[0].attr}), "dt2.Term");
  EXPECT_EQ(format_attr(r.vars, r.chain.joins[0].source), "dt1.Term");
}

TEST(Normalize, AuthorSimilarityShape) {
  const Rqna r = compile_query(query_text("as"), pubmed());
  std::vector<std::string> order;
  order.push_back(r.vars[r.chain.leaf.var].name);
  for (const auto& j : r.chain.joins) order.push_back(r.vars[j.var].name);
  EXPECT_EQ(order, (std::vector<std::string>{"da1", "dt1", "dt2", "d", "da2"}));
  // Projections sit on the leaves.
  EXPECT_EQ(r.projections[r.chain.joins[2].var], (std::vector<std::string>{"ID", "Year"}));
}

TEST(Normalize, IdempotentOnAllQueries) {
  for (const auto& q : kQueries) {
    const Catalog& c = catalog_for(q);
    const Rqna once = compile_query(query_text(q), c);
    const Rqna twice = normalize(to_algebra(once), c);
    EXPECT_EQ(once, twice) << q;
    EXPECT_EQ(dump(once), dump(twice)) << q;
  }
}

TEST(Normalize, RejectsNonChains) {
  const Catalog c = pubmed();
  EXPECT_EQ(code_of([&] { compile_query("SELECT a.Doc FROM DT a, DT b WHERE a.Term = 1", c); }),
            Errc::NotNormalizable);
  EXPECT_EQ(code_of([&] { compile_query("SELECT a.Doc FROM DT a JOIN DT b ON a.Term = b.Term", c); }),
            Errc::NotNormalizable);
  EXPECT_EQ(code_of([&] {
              compile_query("SELECT a.Doc FROM DT a JOIN DT b ON a.Term = b.Term AND a.Doc = b.Doc WHERE a.Term = 1", c);
            }),
            Errc::NotNormalizable);
  EXPECT_EQ(code_of([&] { compile_query("SELECT a.Doc FROM DT a WHERE a.Term = 1 AND a.Doc = 2", c); }),
            Errc::NotNormalizable);
}

std::vector<ViolationKind> kinds(const std::string& text) {
  const Catalog c = pubmed();
  std::vector<ViolationKind> out;
  for (const auto& v : verify(normalize(translate_sql(text, c), c), c)) out.push_back(v.kind);
  return out;
}

TEST(Verify, PaperQueriesAreRelationshipQueries) {
  for (const auto& q : kQueries) {
    const Catalog& c = catalog_for(q);
    EXPECT_TRUE(verify(normalize(translate_sql(query_text(q), c), c), c).empty()) << q;
  }
}

TEST(Verify, Violations) {
  EXPECT_EQ(kinds("SELECT dt2.Doc, COUNT(*) FROM DT dt1 JOIN DT dt2 ON dt1.Fre = dt2.Fre WHERE dt1.Doc = 1 "
                  "GROUP BY dt2.Doc"),
            std::vector<ViolationKind>{ViolationKind::NonKeyJoin});
  EXPECT_EQ(kinds("SELECT dt2.Doc, dt2.Term, COUNT(*) FROM DT dt1 JOIN DT dt2 ON dt1.Term = dt2.Term "
                  "WHERE dt1.Doc = 1 GROUP BY dt2.Doc, dt2.Term"),
            std::vector<ViolationKind>{ViolationKind::MultiKeyGroupBy});
  EXPECT_EQ(kinds("SELECT dt2.Fre, COUNT(*) FROM DT dt1 JOIN DT dt2 ON dt1.Term = dt2.Term WHERE dt1.Doc = 1 "
                  "GROUP BY dt2.Fre"),
            std::vector<ViolationKind>{ViolationKind::NonKeyGroupBy});
  EXPECT_EQ(kinds("SELECT dt2.Doc, AVG(dt2.Fre) FROM DT dt1 JOIN DT dt2 ON dt1.Term = dt2.Term WHERE dt1.Doc = 1 "
                  "GROUP BY dt2.Doc"),
            std::vector<ViolationKind>{ViolationKind::NonAssociativeAggregate});
  EXPECT_EQ(kinds("SELECT dt2.Doc, COUNT(*) FROM DT dt1 JOIN DT dt2 ON dt1.Term = dt2.Doc WHERE dt1.Doc = 1 "
                  "GROUP BY dt2.Doc"),
            std::vector<ViolationKind>{ViolationKind::KeyDomainMismatch});
  EXPECT_EQ(kinds("SELECT dt.Doc FROM DT dt WHERE dt.Fre = 3"),
            std::vector<ViolationKind>{ViolationKind::NonKeySelection});
  EXPECT_EQ(code_of([] { compile_query("SELECT dt.Doc FROM DT dt WHERE dt.Fre = 3", pubmed()); }),
            Errc::NotNormalizable);
}

TEST(Golden, RqnaDumps) {
  const char* update = std::getenv("FRAGDB_UPDATE_GOLDEN");
  for (const auto& q : kQueries) {
    const std::string got = dump(compile_query(query_text(q), catalog_for(q)));
    const std::string path = std::string(FRAGDB_GOLDEN_DIR) + "/" + q + ".rqna";
    if (update) {
      testing::write_golden(path, got);
      continue;
    }
    EXPECT_EQ(testing::read_golden(path), got) << q;
  }
}

// Normalization preserves semantics: the raw algebra and its RQNA agree.
TEST(Normalize, PreservesSemanticsOnRandomData) {
  std::mt19937_64 rng(41);
  for (const auto& q : kQueries) {
    for (int round = 0; round < 25; ++round) {
      const Database db = q == "cs" ? testing::random_semmed(rng) : testing::random_pubmed(rng);
      const Algebra a = translate_sql(query_text(q), db.catalog());
      const Rqna r = normalize(a, db.catalog());
      const auto params = testing::random_params(rng, q, db);
      const ResultSet raw = oracle_execute_algebra(a, db, params);
      const ResultSet norm = oracle_execute(r, db, params);
      const auto diff = compare_results(raw, norm, 1e-12);
      EXPECT_FALSE(diff) << q << " round " << round << ": " << *diff;
    }
  }
}

TEST(Oracle, SimilarDocumentsToy) {
  const Database db = testing::toy_db();
  const Rqna r = compile_query(query_text("sd"), db.catalog());
  const ResultSet res = oracle_execute(r, db, std::vector<std::string>{"0"});
  EXPECT_EQ(res.keys, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(res.ints, (std::vector<std::int64_t>{2, 1}));
}

TEST(Oracle, AuthorSimilaritySinglePath) {
  // One author, one document from 2007, one term with frequency 3.
  const Database db = testing::pubmed_db(1, 1, 1, {2007}, {{0, 0, 3}}, {{0, 0}});
  const Rqna r = compile_query(query_text("as"), db.catalog());
  const ResultSet res = oracle_execute(r, db, std::vector<std::string>{"0"});
  ASSERT_EQ(res.keys, (std::vector<std::uint32_t>{0}));
  ASSERT_TRUE(res.real);
  EXPECT_DOUBLE_EQ(res.reals[0], 9.0 / 10.0);
}

TEST(Oracle, EmptyTablesGiveEmptyResult) {
  const Database db = testing::pubmed_db(2, 2, 2, {2000, 2001}, {}, {});
  for (const auto& q : {"sd", "fsd", "as", "ad", "fad"}) {
    const Rqna r = compile_query(query_text(q), db.catalog());
    std::vector<std::string> params(r.param_count, "0");
    EXPECT_EQ(oracle_execute(r, db, params).size(), 0u) << q;
  }
}

TEST(Oracle, ScaleGuard) {
  std::mt19937_64 rng(3);
  const Database db = testing::random_pubmed(rng, 4);
  const Rqna r = compile_query(query_text("as"), db.catalog());
  EXPECT_EQ(code_of([&] { oracle_execute(r, db, std::vector<std::string>{"0"}, OracleLimits{10}); }),
            Errc::ScaleExceeded);
}

}  // namespace
}  // namespace fragdb
