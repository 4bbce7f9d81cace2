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


#include "fragdb/normalize.hpp"

#include <algorithm>
#include <set>

#include "fragdb/error.hpp"

namespace fragdb {

bool Leaf::operator==(const Leaf& o) const {
  if (kind != o.kind || var != o.var || attr != o.attr || value != o.value) return false;
  if (!context || !o.context) return context == o.context;
  return *context == *o.context;
}

namespace {

class Normalizer {
 public:
  Normalizer(const Algebra& a, const Catalog& c) : alg_(a), catalog_(c) {}

  Rqna run() {
    Rqna r;
    r.vars = alg_.vars;
    r.param_count = alg_.param_count;
    r.chain = chain(alg_.root);
    r.group_by = alg_.root.group_by;
    r.agg = alg_.root.agg;
    r.outputs = alg_.root.outputs;

    std::vector<std::set<std::string>> need(r.vars.size());
    collect(r.chain, need);
    for (const auto& a : r.outputs) need[a.var].insert(a.attr);
    for (const auto& a : r.group_by) need[a.var].insert(a.attr);
    if (r.agg && r.agg->arg) {
      std::vector<AttrRef> refs;
      r.agg->arg->collect(refs);
      for (const auto& a : refs) need[a.var].insert(a.attr);
    }
    r.projections.resize(r.vars.size());
    for (std::size_t v = 0; v < r.vars.size(); ++v)
      for (const auto& a : table_attributes(catalog_, r.vars[v].table))
        if (need[v].count(a)) r.projections[v].push_back(a);
    return r;
  }

 private:
  std::string name(const AttrRef& a) const { return format_attr(alg_.vars, a); }

  Chain chain(const Block& b) {
    const Pred* leaf = nullptr;
    std::vector<const Pred*> edges;
    for (const auto& p : b.preds) {
      if (p.kind == Pred::Kind::EqAttr) {
        if (p.lhs.var == p.rhs.var)
          fail(Errc::NotNormalizable, "predicate " + name(p.lhs) + " = " + name(p.rhs) + " compares one tuple variable with itself");
        edges.push_back(&p);
        continue;
      }
      if (leaf)
        fail(Errc::NotNormalizable, "more than one selection or IN predicate in one block; a relationship query starts from one context selection");
      leaf = &p;
    }
    if (!leaf)
      fail(Errc::NotNormalizable, "no key selection or IN predicate; the always-true selection is not supported");

    Chain c;
    c.leaf.var = leaf->lhs.var;
    c.leaf.attr = leaf->lhs.attr;
    if (leaf->kind == Pred::Kind::EqConst) {
      c.leaf.kind = Leaf::Kind::Select;
      c.leaf.value = leaf->value;
    } else {
      c.leaf.kind = Leaf::Kind::SemiJoin;
      c.leaf.context = std::make_shared<const Context>(context(leaf->set));
    }

    std::vector<bool> placed_var(alg_.vars.size(), false);
    std::vector<bool> used(edges.size(), false);
    placed_var[c.leaf.var] = true;
    std::vector<std::size_t> pending;
    for (auto v : b.vars)
      if (v != c.leaf.var) pending.push_back(v);

    while (!pending.empty()) {
      bool progressed = false;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const std::size_t v = pending[i];
        std::vector<std::size_t> links;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          const Pred& p = *edges[e];
          if ((p.lhs.var == v && placed_var[p.rhs.var]) || (p.rhs.var == v && placed_var[p.lhs.var]))
            links.push_back(e);
        }
        if (links.empty()) continue;
        if (links.size() > 1)
          fail(Errc::NotNormalizable, "tuple variable " + alg_.vars[v].name +
                                          " joins the chain through more than one condition (cyclic join)");
        const Pred& p = *edges[links[0]];
        used[links[0]] = true;
        JoinStep step;
        step.var = v;
        if (p.lhs.var == v) {
          step.attr = p.lhs.attr;
          step.source = p.rhs;
        } else {
          step.attr = p.rhs.attr;
          step.source = p.lhs;
        }
        c.joins.push_back(std::move(step));
        placed_var[v] = true;
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
        progressed = true;
        break;
      }
      if (!progressed)
        fail(Errc::NotNormalizable, "tuple variable " + alg_.vars[pending.front()].name +
                                        " is not connected to the chain (cross product)");
    }
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (!used[e])
        fail(Errc::NotNormalizable, "join condition " + name(edges[e]->lhs) + " = " + name(edges[e]->rhs) +
                                        " closes a cycle");
    return c;
  }

  Context context(const std::vector<Block>& set) {
    Context ctx;
    if (set.size() == 1) {
      ctx.chain = chain(set[0]);
      ctx.project = set[0].outputs.at(0);
      return ctx;
    }
    for (const auto& b : set) {
      const bool simple = b.vars.size() == 1 && b.preds.size() == 1 &&
                          b.preds[0].kind == Pred::Kind::EqConst && b.outputs.size() == 1 &&
                          b.outputs[0].var == b.vars[0];
      if (!simple)
        fail(Errc::NotNormalizable, "intersected subqueries must each be a single-table key selection");
      ctx.terms.push_back({b.vars[0], b.preds[0].lhs.attr, b.preds[0].value, b.outputs[0].attr});
    }
    return ctx;
  }

  static void collect(const Chain& c, std::vector<std::set<std::string>>& need) {
    need[c.leaf.var].insert(c.leaf.attr);
    if (c.leaf.context) {
      const Context& ctx = *c.leaf.context;
      if (ctx.chain) {
        collect(*ctx.chain, need);
        need[ctx.project.var].insert(ctx.project.attr);
      }
      for (const auto& t : ctx.terms) {
        need[t.var].insert(t.key);
        need[t.var].insert(t.project);
      }
    }
    for (const auto& j : c.joins) {
      need[j.var].insert(j.attr);
      need[j.source.var].insert(j.source.attr);
    }
  }

  const Algebra& alg_;
  const Catalog& catalog_;
};

Block chain_block(const Chain& c) {
  Block b;
  b.vars.push_back(c.leaf.var);
  Pred leaf;
  leaf.lhs = {c.leaf.var, c.leaf.attr};
  if (c.leaf.kind == Leaf::Kind::Select) {
    leaf.kind = Pred::Kind::EqConst;
    leaf.value = c.leaf.value;
  } else {
    leaf.kind = Pred::Kind::In;
    const Context& ctx = *c.leaf.context;
    if (ctx.chain) {
      Block sub = chain_block(*ctx.chain);
      sub.outputs.push_back(ctx.project);
      leaf.set.push_back(std::move(sub));
    }
    for (const auto& t : ctx.terms) {
      Block sub;
      sub.vars.push_back(t.var);
      Pred sel;
      sel.kind = Pred::Kind::EqConst;
      sel.lhs = {t.var, t.key};
      sel.value = t.value;
      sub.preds.push_back(std::move(sel));
      sub.outputs.push_back({t.var, t.project});
      leaf.set.push_back(std::move(sub));
    }
  }
  b.preds.push_back(std::move(leaf));
  for (const auto& j : c.joins) {
    b.vars.push_back(j.var);
    Pred p;
    p.kind = Pred::Kind::EqAttr;
    p.lhs = {j.var, j.attr};
    p.rhs = j.source;
    b.preds.push_back(std::move(p));
  }
  return b;
}

}  // namespace

Rqna normalize(const Algebra& algebra, const Catalog& catalog) { return Normalizer(algebra, catalog).run(); }

Algebra to_algebra(const Rqna& r) {
  Algebra a;
  a.vars = r.vars;
  a.param_count = r.param_count;
  a.root = chain_block(r.chain);
  a.root.outputs = r.outputs;
  a.root.group_by = r.group_by;
  a.root.agg = r.agg;
  return a;
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::NonKeyJoin: return "NonKeyJoin";
    case ViolationKind::KeyDomainMismatch: return "KeyDomainMismatch";
    case ViolationKind::NonKeySelection: return "NonKeySelection";
    case ViolationKind::MultiKeyGroupBy: return "MultiKeyGroupBy";
    case ViolationKind::NonKeyGroupBy: return "NonKeyGroupBy";
    case ViolationKind::NonAssociativeAggregate: return "NonAssociativeAggregate";
  }
  return "?";
}

namespace {

class Verifier {
 public:
  Verifier(const Rqna& r, const Catalog& c) : r_(r), catalog_(c) {}

  std::vector<Violation> run() {
    chain(r_.chain);
    if (r_.group_by.size() > 1)
      add(ViolationKind::MultiKeyGroupBy, "GROUP BY lists " + std::to_string(r_.group_by.size()) + " attributes");
    for (const auto& g : r_.group_by)
      if (!key(g)) add(ViolationKind::NonKeyGroupBy, "group-by attribute " + name(g) + " is not a key");
    if (r_.agg && (r_.agg->fn == AggFn::Avg || r_.agg->fn == AggFn::Median))
      add(ViolationKind::NonAssociativeAggregate, std::string(agg_name(r_.agg->fn)) + " is not associative");
    return std::move(out_);
  }

 private:
  std::string name(const AttrRef& a) const { return format_attr(r_.vars, a); }
  bool key(const AttrRef& a) const { return is_key_attribute(catalog_, r_.vars[a.var], a.attr); }
  std::string entity(const AttrRef& a) const { return key_entity(catalog_, r_.vars[a.var], a.attr); }
  void add(ViolationKind k, std::string d) { out_.push_back({k, std::move(d)}); }

  void equality(const AttrRef& a, const AttrRef& b) {
    if (!key(a) || !key(b)) {
      add(ViolationKind::NonKeyJoin, name(a) + " = " + name(b) + " is not a key-to-key equality");
    } else if (entity(a) != entity(b)) {
      add(ViolationKind::KeyDomainMismatch, name(a) + " references " + entity(a) + " but " + name(b) +
                                                " references " + entity(b));
    }
  }

  void chain(const Chain& c) {
    const AttrRef leaf{c.leaf.var, c.leaf.attr};
    if (c.leaf.kind == Leaf::Kind::Select) {
      if (!key(leaf)) add(ViolationKind::NonKeySelection, "selection on " + name(leaf) + " is not on a key");
    } else {
      const Context& ctx = *c.leaf.context;
      if (ctx.chain) {
        chain(*ctx.chain);
        equality(leaf, ctx.project);
      }
      for (const auto& t : ctx.terms) {
        const AttrRef k{t.var, t.key};
        const AttrRef p{t.var, t.project};
        if (!key(k)) add(ViolationKind::NonKeySelection, "selection on " + name(k) + " is not on a key");
        equality(leaf, p);
      }
    }
    for (const auto& j : c.joins) equality({j.var, j.attr}, j.source);
  }

  const Rqna& r_;
  const Catalog& catalog_;
  std::vector<Violation> out_;
};

void dump_table(const Rqna& r, std::size_t v, int indent, std::string& out) {
  out.append(static_cast<std::size_t>(indent), ' ');
  out += "table " + r.vars[v].table + " -> " + r.vars[v].name + " [";
  for (std::size_t i = 0; i < r.projections[v].size(); ++i) out += (i ? ", " : "") + r.projections[v][i];
  out += "]\n";
}

void dump_chain(const Rqna& r, const Chain& c, std::size_t joins, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (joins > 0) {
    const JoinStep& j = c.joins[joins - 1];
    out += pad + "join " + format_attr(r.vars, {j.var, j.attr}) + " = " + format_attr(r.vars, j.source) + "\n";
    dump_chain(r, c, joins - 1, indent + 2, out);
    dump_table(r, j.var, indent + 2, out);
    return;
  }
  const Leaf& l = c.leaf;
  const std::string attr = format_attr(r.vars, {l.var, l.attr});
  if (l.kind == Leaf::Kind::Select) {
    out += pad + "select " + attr + " = " + l.value.to_string() + "\n";
    dump_table(r, l.var, indent + 2, out);
    return;
  }
  out += pad + "semijoin " + attr + "\n";
  dump_table(r, l.var, indent + 2, out);
  const Context& ctx = *l.context;
  if (ctx.chain) {
    out += pad + "  context " + format_attr(r.vars, ctx.project) + "\n";
    dump_chain(r, *ctx.chain, ctx.chain->joins.size(), indent + 4, out);
    return;
  }
  out += pad + "  intersect\n";
  for (const auto& t : ctx.terms) {
    out += pad + "    select " + format_attr(r.vars, {t.var, t.key}) + " = " + t.value.to_string() + " -> " +
           format_attr(r.vars, {t.var, t.project}) + "\n";
    dump_table(r, t.var, indent + 6, out);
  }
}

}  // namespace

std::vector<Violation> verify(const Rqna& rqna, const Catalog& catalog) { return Verifier(rqna, catalog).run(); }

void require_relationship_query(const Rqna& rqna, const Catalog& catalog) {
  const auto v = verify(rqna, catalog);
  if (v.empty()) return;
  std::string msg = "not a relationship query:";
  for (const auto& x : v) msg += " " + std::string(violation_name(x.kind)) + " (" + x.detail + ");";
  fail(Errc::NotNormalizable, msg);
}

std::string dump(const Rqna& r) {
  std::string out = "rqna params=" + std::to_string(r.param_count) + "\n";
  if (r.agg) {
    out += "gamma ";
    for (std::size_t i = 0; i < r.group_by.size(); ++i) out += (i ? ", " : "") + format_attr(r.vars, r.group_by[i]);
    out += "; " + format_agg(r.vars, *r.agg) + "\n";
  } else {
    out += "project ";
    for (std::size_t i = 0; i < r.outputs.size(); ++i) out += (i ? ", " : "") + format_attr(r.vars, r.outputs[i]);
    out += "\n";
  }
  dump_chain(r, r.chain, r.chain.joins.size(), 2, out);
  return out;
}

Rqna compile_query(std::string_view sql_text, const Catalog& catalog) {
  Rqna r = normalize(translate_sql(sql_text, catalog), catalog);
  require_relationship_query(r, catalog);
  return r;
}

}  // namespace fragdb
