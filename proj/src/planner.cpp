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


#include "fragdb/planner.hpp"

#include <algorithm>
#include <map>

#include "fragdb/error.hpp"

namespace fragdb {

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Seed: return "seed";
    case NodeKind::FragJoin: return "fragjoin";
    case NodeKind::FragSemiJoin: return "fragsemijoin";
    case NodeKind::MergeIntersect: return "mergeintersect";
    case NodeKind::DenseAgg: return "denseagg";
    case NodeKind::Output: return "output";
  }
  return "?";
}

namespace {

class Planner {
 public:
  Planner(const Rqna& q, const Catalog& c, PlanOptions o) : q_(q), catalog_(c), options_(o) {}

  PhysicalPlan run() {
    p_.param_count = q_.param_count;
    chain(q_.chain);
    if (q_.agg) {
      if (q_.group_by.size() != 1) fail(Errc::NotNormalizable, "plans group by exactly one key");
      PlanNode n;
      n.kind = NodeKind::DenseAgg;
      const AttrRef& g = q_.group_by[0];
      n.var = q_.vars[g.var].name;
      n.group_slot = slot(g);
      n.group_entity = key_entity(catalog_, q_.vars[g.var], g.attr);
      n.group_domain = catalog_.entity_size(n.group_entity);
      n.agg = *q_.agg;
      if (n.agg.fn == AggFn::Avg || n.agg.fn == AggFn::Median)
        fail(Errc::NotNormalizable, std::string(agg_name(n.agg.fn)) + " is not associative");
      if (n.agg.arg) remap(*n.agg.arg);
      p_.nodes.push_back(std::move(n));
    } else {
      PlanNode n;
      n.kind = NodeKind::Output;
      for (const auto& o : q_.outputs) n.out_slots.push_back(slot(o));
      p_.nodes.push_back(std::move(n));
    }
    return std::move(p_);
  }

 private:
  std::size_t fresh(const AttrRef& a) {
    const std::size_t s = p_.slot_names.size();
    p_.slot_names.push_back(format_attr(q_.vars, a));
    slots_[a] = s;
    return s;
  }
  std::size_t slot(const AttrRef& a) const {
    auto it = slots_.find(a);
    if (it == slots_.end()) fail(Errc::Internal, format_attr(q_.vars, a) + " has no slot");
    return it->second;
  }

  void remap(Scalar& s) const {
    if (s.op == ScalarOp::Attr) {
      const std::size_t sl = slot(s.attr);
      s.attr = {sl, p_.slot_names[sl]};
    }
    for (auto& k : s.kids) remap(k);
  }

  EncodingKind encoding(const std::string& table, const std::string& key, const std::string& attr) const {
    const ColumnMeta* m = catalog_.column(table, key, attr);
    if (!m) fail(Errc::MissingIndex, "index I_" + table + "." + key + " has no metadata for " + attr);
    return m->encoding;
  }

  void require_index(const std::string& table, const std::string& key) const {
    if (!catalog_.has_index(table, key)) fail(Errc::MissingIndex, "index I_" + table + "." + key + " is not built");
  }

  // Fragment operator over var's index keyed by `key`, the key value already in `in`.
  void fragment(NodeKind kind, std::size_t var, const std::string& key, std::size_t in) {
    const VarDef& v = q_.vars[var];
    slots_[{var, key}] = in;
    std::vector<std::string> reads;
    for (const auto& a : q_.projections[var])
      if (a != key) reads.push_back(a);
    // An entity row exists for every valid key, so an entity join with nothing
    // to read is a pure renaming.
    if (kind == NodeKind::FragJoin && v.entity && reads.empty()) return;
    require_index(v.table, key);
    PlanNode n;
    n.kind = kind;
    n.var = v.name;
    n.in_slot = in;
    n.table = v.table;
    n.key = key;
    n.singleton = v.entity;
    for (const auto& a : reads) n.reads.push_back({a, fresh({var, a}), encoding(v.table, key, a)});
    if (kind == NodeKind::FragSemiJoin)
      n.dedup_domain = catalog_.entity_size(key_entity(catalog_, v, key));
    p_.nodes.push_back(std::move(n));
  }

  void chain(const Chain& c) {
    const Leaf& l = c.leaf;
    const VarDef& v = q_.vars[l.var];
    if (l.kind == Leaf::Kind::Select) {
      PlanNode seed;
      seed.kind = NodeKind::Seed;
      seed.var = v.name;
      seed.entity = key_entity(catalog_, v, l.attr);
      seed.value = l.value;
      seed.out_slot = fresh({l.var, l.attr});
      p_.nodes.push_back(std::move(seed));
      fragment(NodeKind::FragJoin, l.var, l.attr, slot({l.var, l.attr}));
    } else {
      const Context& ctx = *l.context;
      std::size_t in;
      if (ctx.chain) {
        chain(*ctx.chain);
        in = slot(ctx.project);
      } else {
        in = intersect(ctx, {l.var, l.attr});
      }
      fragment(NodeKind::FragSemiJoin, l.var, l.attr, in);
    }
    for (const auto& j : c.joins) fragment(NodeKind::FragJoin, j.var, j.attr, slot(j.source));
  }

  std::size_t intersect(const Context& ctx, const AttrRef& target) {
    PlanNode n;
    n.kind = NodeKind::MergeIntersect;
    n.var = q_.vars[target.var].name;
    bool all_bb = true;
    for (const auto& t : ctx.terms) {
      const VarDef& v = q_.vars[t.var];
      if (v.entity || t.project == t.key || !is_key_attribute(catalog_, v, t.project))
        fail(Errc::UnsupportedFeature, "intersected selections must project the other foreign key of a relationship");
      require_index(v.table, t.key);
      IntersectInput in{v.table, t.key, t.project, key_entity(catalog_, v, t.key), t.value,
                        encoding(v.table, t.key, t.project)};
      all_bb = all_bb && in.kind == EncodingKind::BB;
      n.inputs.push_back(std::move(in));
    }
    n.theta = all_bb && !options_.force_decode_intersection ? 0 : 1;
    const std::size_t s = p_.slot_names.size();
    p_.slot_names.push_back("intersect(" + q_.vars[target.var].name + "." + target.attr + ")");
    n.out_slot = s;
    p_.nodes.push_back(std::move(n));
    return s;
  }

  const Rqna& q_;
  const Catalog& catalog_;
  PlanOptions options_;
  PhysicalPlan p_;
  std::map<AttrRef, std::size_t> slots_;
};

}  // namespace

PhysicalPlan plan(const Rqna& rqna, const Catalog& catalog, PlanOptions options) {
  return Planner(rqna, catalog, options).run();
}

std::uint64_t scratch_bytes(const PhysicalPlan& plan) {
  std::uint64_t total = 0;
  for (const auto& n : plan.nodes) {
    if (n.kind == NodeKind::DenseAgg) total += 4ull * n.group_domain;
    if (n.kind == NodeKind::FragSemiJoin) total += n.dedup_domain;
  }
  return total;
}

std::string dump(const PhysicalPlan& plan) {
  auto s = [&](std::size_t slot) { return "s" + std::to_string(slot) + "=" + plan.slot_names[slot]; };
  std::string out = "plan params=" + std::to_string(plan.param_count) + " slots=" +
                    std::to_string(plan.slot_names.size()) + "\n";
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    const PlanNode& n = plan.nodes[i];
    out += "  " + std::to_string(i) + " " + std::string(node_kind_name(n.kind));
    switch (n.kind) {
      case NodeKind::Seed:
        out += " " + s(n.out_slot) + " <- " + n.value.to_string() + " [" + n.entity + "]";
        break;
      case NodeKind::FragJoin:
      case NodeKind::FragSemiJoin:
        out += " I_" + n.table + "." + n.key + "(s" + std::to_string(n.in_slot) + ")";
        if (n.kind == NodeKind::FragSemiJoin) out += " dedup=" + std::to_string(n.dedup_domain);
        if (n.singleton) out += " fused";
        out += " ->";
        for (const auto& r : n.reads) out += " " + s(r.slot) + ":" + std::string(encoding_name(r.kind));
        break;
      case NodeKind::MergeIntersect:
        out += " theta=" + std::to_string(n.theta) + " " + s(n.out_slot);
        for (const auto& in : n.inputs)
          out += " [I_" + in.table + "." + in.key + " = " + in.value.to_string() + " -> " + in.attr + ":" +
                 std::string(encoding_name(in.kind)) + "]";
        break;
      case NodeKind::DenseAgg:
        out += " " + s(n.group_slot) + " |" + n.group_entity + "|=" + std::to_string(n.group_domain) + " " +
               format_agg(n.agg, [&](const AttrRef& a) { return "s" + std::to_string(a.var); });
        break;
      case NodeKind::Output:
        for (auto o : n.out_slots) out += " " + s(o);
        break;
    }
    out += "\n";
  }
  out += "scratch_bytes=" + std::to_string(scratch_bytes(plan)) + "\n";
  return out;
}

}  // namespace fragdb
