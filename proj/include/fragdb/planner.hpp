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
#include <vector>

#include "fragdb/algebra.hpp"
#include "fragdb/catalog.hpp"
#include "fragdb/codecs.hpp"
#include "fragdb/normalize.hpp"

// Physical plans: a left-deep list of fragment operators, each nested inside
// the previous one. Values flow through numbered scalar slots.
namespace fragdb {

enum class NodeKind : std::uint8_t { Seed, FragJoin, FragSemiJoin, MergeIntersect, DenseAgg, Output };
std::string_view node_kind_name(NodeKind kind);

struct SlotRead {
  std::string attr;
  std::size_t slot = 0;
  EncodingKind kind = EncodingKind::UA;
};

struct IntersectInput {
  std::string table;
  std::string key;
  std::string attr;
  std::string entity;  // of the selected key, for binding
  Value value;
  EncodingKind kind = EncodingKind::UA;
};

struct PlanNode {
  NodeKind kind = NodeKind::Seed;
  std::string var;  // tuple variable served

  // Seed: slot <- bound constant.
  std::string entity;
  Value value;
  std::size_t out_slot = 0;  // also MergeIntersect output

  // FragJoin / FragSemiJoin: fragment of slot `in_slot` in I_{table.key}.
  std::size_t in_slot = 0;
  std::string table;
  std::string key;
  bool singleton = false;  // entity index: at most one row, no loop emitted
  std::vector<SlotRead> reads;
  std::uint32_t dedup_domain = 0;  // FragSemiJoin: |B'|

  // MergeIntersect: theta 0 intersects encoded bitmaps, 1 decodes and merges.
  int theta = 1;
  std::vector<IntersectInput> inputs;

  // DenseAgg: group slot over a key domain; scalar refers to slots (AttrRef.var
  // is a slot id).
  std::size_t group_slot = 0;
  std::uint32_t group_domain = 0;
  std::string group_entity;
  AggSpec agg;

  // Output: projected slots of ungrouped queries.
  std::vector<std::size_t> out_slots;
};

struct PhysicalPlan {
  std::vector<PlanNode> nodes;
  std::vector<std::string> slot_names;
  std::size_t param_count = 0;

  bool aggregates() const { return !nodes.empty() && nodes.back().kind == NodeKind::DenseAgg; }
};

struct PlanOptions {
  bool force_decode_intersection = false;  // theta = 1 even when all inputs are BB
};

// Requires a verified RQNA and built-index metadata; MissingIndex otherwise.
PhysicalPlan plan(const Rqna& rqna, const Catalog& catalog, PlanOptions options = {});

// 4 * |group domain| + sum of semijoin dedup domains.
std::uint64_t scratch_bytes(const PhysicalPlan& plan);

std::string dump(const PhysicalPlan& plan);

}  // namespace fragdb
