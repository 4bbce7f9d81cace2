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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fragdb/algebra.hpp"
#include "fragdb/catalog.hpp"

// Relationship Query Normalized Algebra: an optional top aggregation over a
// left-deep chain whose leaf is a key selection or a semijoin with a context.
namespace fragdb {

struct Context;

struct Leaf {
  enum class Kind : std::uint8_t { Select, SemiJoin } kind = Kind::Select;
  std::size_t var = 0;
  std::string attr;  // selected key, or the semijoined key
  Value value;       // Select only
  std::shared_ptr<const Context> context;  // SemiJoin only
  bool operator==(const Leaf& o) const;
};

// var.attr = source, where source belongs to an earlier variable.
struct JoinStep {
  std::size_t var = 0;
  std::string attr;
  AttrRef source;
  bool operator==(const JoinStep&) const = default;
};

struct Chain {
  Leaf leaf;
  std::vector<JoinStep> joins;
  bool operator==(const Chain&) const = default;
};

// pi_key sigma_{key=c}(T) inside an intersection.
struct IntersectTerm {
  std::size_t var = 0;
  std::string key;
  Value value;
  std::string project;
  bool operator==(const IntersectTerm&) const = default;
};

// Either a projected chain (one subquery) or an intersection of selections.
struct Context {
  std::optional<Chain> chain;
  AttrRef project;  // with chain
  std::vector<IntersectTerm> terms;
  bool operator==(const Context&) const = default;
};

struct Rqna {
  std::vector<VarDef> vars;
  std::vector<std::vector<std::string>> projections;  // per variable, storage order
  Chain chain;
  std::vector<AttrRef> group_by;
  std::optional<AggSpec> agg;
  std::vector<AttrRef> outputs;
  std::size_t param_count = 0;
  bool operator==(const Rqna&) const = default;
};

// Picks the leaf, orders joins left-deep and pushes projections to the leaves.
// NotNormalizable when the join graph is not a tree or the leaf is ambiguous.
Rqna normalize(const Algebra& algebra, const Catalog& catalog);
Algebra to_algebra(const Rqna& rqna);

enum class ViolationKind : std::uint8_t {
  NonKeyJoin, KeyDomainMismatch, NonKeySelection, MultiKeyGroupBy, NonKeyGroupBy, NonAssociativeAggregate
};
std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

std::vector<Violation> verify(const Rqna& rqna, const Catalog& catalog);
// Throws NotNormalizable listing every violation.
void require_relationship_query(const Rqna& rqna, const Catalog& catalog);

// Stable text form used by golden tests.
std::string dump(const Rqna& rqna);

// parse + translate + normalize + verify.
Rqna compile_query(std::string_view sql_text, const Catalog& catalog);

}  // namespace fragdb
