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
#include <string>
#include <string_view>
#include <vector>

// Parser for the relationship-query subset of SQL:
//   SELECT key [, aggexpr] FROM t a [JOIN t b ON a.x = b.y]* | t a, t b ...
//   WHERE eq [AND eq]* [AND col IN (subquery) [INTERSECT (subquery)]*]
//   GROUP BY key
// Constants are integers, quoted strings or positional `?` parameters.
namespace fragdb::sql {

struct ColumnRef {
  std::string qualifier;  // empty when unqualified
  std::string name;
  std::size_t pos = 0;
  bool operator==(const ColumnRef&) const = default;
};

enum class ExprKind : std::uint8_t {
  Int, Real, String, Param, Column, Star, Neg, Abs, Add, Sub, Mul, Div, Call
};

struct Expr {
  ExprKind kind = ExprKind::Int;
  std::int64_t ival = 0;
  double rval = 0.0;
  std::string text;       // string literal, or upper-cased function name for Call
  std::size_t param = 0;  // 0-based position for Param
  ColumnRef column;
  std::vector<Expr> args;
  std::size_t pos = 0;
  bool operator==(const Expr&) const = default;
};

struct TableRef {
  std::string table;
  std::string alias;  // defaults to the table name
  std::size_t pos = 0;
  bool operator==(const TableRef&) const = default;
};

struct Select;

// One or more parenthesized subqueries joined by INTERSECT.
struct SetExpr {
  std::vector<Select> terms;
  bool operator==(const SetExpr&) const;
};

struct Predicate {
  enum class Kind : std::uint8_t { Eq, In } kind = Kind::Eq;
  Expr lhs;
  Expr rhs;        // Eq only
  SetExpr set;     // In only
  std::size_t pos = 0;
  bool operator==(const Predicate&) const = default;
};

struct Select {
  std::vector<Expr> items;
  std::vector<TableRef> from;
  std::vector<Predicate> on;     // equalities from JOIN ... ON
  std::vector<Predicate> where;  // conjuncts
  std::vector<ColumnRef> group_by;
  std::size_t pos = 0;
  bool operator==(const Select&) const = default;
};

struct Statement {
  Select select;
  std::size_t param_count = 0;
};

// SyntaxError carries "line:column"; UnsupportedFeature for recognized SQL
// outside the subset (OR, outer joins, SELECT *, ORDER BY, ...).
Statement parse_sql(std::string_view text);

std::string format_expr(const Expr& e);

}  // namespace fragdb::sql
