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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragdb/catalog.hpp"
#include "fragdb/sql.hpp"

// Name-resolved relational algebra: tuple variables bound to canonical tables,
// conjunctive predicates and IN over intersections of subquery blocks.
namespace fragdb {

struct VarDef {
  std::string name;   // unique across the whole query
  std::string table;  // canonical table name
  bool entity = false;
  bool operator==(const VarDef&) const = default;
};

struct AttrRef {
  std::size_t var = 0;
  std::string attr;  // canonical attribute name
  bool operator==(const AttrRef&) const = default;
  auto operator<=>(const AttrRef&) const = default;
};

// A constant: literal text or a positional parameter.
struct Value {
  std::optional<std::size_t> param;
  std::string literal;
  bool operator==(const Value&) const = default;
  std::string to_string() const { return param ? "?" + std::to_string(*param) : literal; }
};

enum class ScalarOp : std::uint8_t { Const, Attr, Neg, Abs, Add, Sub, Mul, Div };

// Per-row arithmetic. Division yields a real; everything else stays integral
// unless a real constant is involved.
struct Scalar {
  ScalarOp op = ScalarOp::Const;
  bool real_const = false;
  std::int64_t ival = 0;
  double rval = 0.0;
  AttrRef attr;
  std::vector<Scalar> kids;

  bool is_real() const;
  void collect(std::vector<AttrRef>& out) const;
  double eval_real(const std::function<std::uint32_t(const AttrRef&)>& get) const;
  std::int64_t eval_int(const std::function<std::uint32_t(const AttrRef&)>& get) const;
  bool operator==(const Scalar&) const = default;

  static Scalar constant(std::int64_t v) {
    Scalar s;
    s.ival = v;
    return s;
  }
};

enum class AggFn : std::uint8_t { Count, Sum, Min, Max, Avg, Median };
std::string_view agg_name(AggFn fn);

// COUNT(*) has no argument. A scaled aggregate such as SUM(x)/e is folded into
// SUM(x/e), the per-row reading of the scoring expressions.
struct AggSpec {
  AggFn fn = AggFn::Count;
  std::optional<Scalar> arg;
  bool real() const { return arg && arg->is_real(); }
  bool operator==(const AggSpec&) const = default;
};

struct Block;

struct Pred {
  enum class Kind : std::uint8_t { EqAttr, EqConst, In } kind = Kind::EqAttr;
  AttrRef lhs;
  AttrRef rhs;              // EqAttr
  Value value;              // EqConst
  std::vector<Block> set;   // In: intersection of these blocks' single outputs
  bool operator==(const Pred&) const;
};

struct Block {
  std::vector<std::size_t> vars;  // FROM order
  std::vector<Pred> preds;        // conjunction
  std::vector<AttrRef> outputs;   // non-aggregate select items (or the group key)
  std::vector<AttrRef> group_by;
  std::optional<AggSpec> agg;
  bool operator==(const Block&) const = default;
};

struct Algebra {
  std::vector<VarDef> vars;
  Block root;
  std::size_t param_count = 0;
  bool operator==(const Algebra&) const = default;
};

// Resolves tables, aliases and columns against the catalog.
Algebra translate(const sql::Statement& statement, const Catalog& catalog);
Algebra translate_sql(std::string_view text, const Catalog& catalog);

// Key attributes: entity ID and relationship foreign keys.
bool is_key_attribute(const Catalog& catalog, const VarDef& var, const std::string& attr);
// Entity referenced by a key attribute.
std::string key_entity(const Catalog& catalog, const VarDef& var, const std::string& attr);
// Canonical attributes of a table in storage order.
std::vector<std::string> table_attributes(const Catalog& catalog, const std::string& table);

// Dense key for a constant; nullopt when the key does not exist (matches nothing).
std::optional<std::uint32_t> bind_key(const Catalog& catalog, const std::string& entity,
                                      const Value& value, std::span<const std::string> params);

std::string format_attr(const std::vector<VarDef>& vars, const AttrRef& ref);
std::string format_scalar(const std::vector<VarDef>& vars, const Scalar& s);
std::string format_agg(const std::vector<VarDef>& vars, const AggSpec& agg);
using AttrNamer = std::function<std::string(const AttrRef&)>;
std::string format_scalar(const Scalar& s, const AttrNamer& name);
std::string format_agg(const AggSpec& agg, const AttrNamer& name);

}  // namespace fragdb
