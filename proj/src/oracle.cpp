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


#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "fragdb/baselines.hpp"
#include "fragdb/error.hpp"

namespace fragdb {

namespace {

// Constant for an arbitrary attribute: keys go through bind_key, measures are
// integers or dictionary strings.
std::optional<std::uint32_t> bind_value(const Catalog& catalog, const VarDef& var, const std::string& attr,
                                        const Value& value, std::span<const std::string> params) {
  if (is_key_attribute(catalog, var, attr))
    return bind_key(catalog, key_entity(catalog, var, attr), value, params);
  std::string text = value.literal;
  if (value.param) {
    if (*value.param >= params.size()) fail(Errc::ParameterMismatch, "unbound parameter");
    text = params[*value.param];
  }
  if (const auto* d = catalog.find_value_dictionary(var.table, attr)) return d->find(text);
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) return std::nullopt;
  return v;
}

class MapAggregator {
 public:
  MapAggregator(const std::optional<AggSpec>& agg, std::size_t width) : agg_(agg), width_(width) {
    if (agg_ && (agg_->fn == AggFn::Avg || agg_->fn == AggFn::Median))
      fail(Errc::UnsupportedFeature, std::string(agg_name(agg_->fn)) + " is not evaluated");
  }

  template <class Get>
  void add(std::uint32_t key, const Get& get) {
    const AggSpec& a = *agg_;
    if (a.fn == AggFn::Count) {
      ++ints_[key];
      return;
    }
    if (a.real()) {
      const double x = a.arg->eval_real(get);
      auto [it, fresh] = reals_.try_emplace(key, x);
      if (!fresh) it->second = combine(it->second, x);
    } else {
      const std::int64_t x = a.arg->eval_int(get);
      auto [it, fresh] = ints_.try_emplace(key, x);
      if (!fresh) it->second = combine(it->second, x);
    }
  }

  void add_row(std::vector<std::uint32_t> cells) { rows_.insert(rows_.end(), cells.begin(), cells.end()); }

  ResultSet finish() {
    ResultSet r;
    if (!agg_) {
      r.grouped = false;
      r.width = width_;
      r.cells = std::move(rows_);
      r.canonicalize();
      return r;
    }
    r.real = agg_->real() && agg_->fn != AggFn::Count;
    if (r.real) {
      for (const auto& [k, v] : reals_) {
        r.keys.push_back(k);
        r.reals.push_back(v);
      }
    } else {
      for (const auto& [k, v] : ints_) {
        r.keys.push_back(k);
        r.ints.push_back(v);
      }
    }
    return r;
  }

 private:
  template <class T>
  T combine(T acc, T x) const {
    switch (agg_->fn) {
      case AggFn::Min: return std::min(acc, x);
      case AggFn::Max: return std::max(acc, x);
      default: return acc + x;
    }
  }

  const std::optional<AggSpec>& agg_;
  std::size_t width_;
  std::map<std::uint32_t, std::int64_t> ints_;
  std::map<std::uint32_t, double> reals_;
  std::vector<std::uint32_t> rows_;
};

class Stepper {
 public:
  explicit Stepper(std::uint64_t limit) : limit_(limit) {}
  void step(std::uint64_t n = 1) {
    steps_ += n;
    if (steps_ > limit_)
      fail(Errc::ScaleExceeded, "oracle scanned more than " + std::to_string(limit_) + " rows");
  }

 private:
  std::uint64_t limit_;
  std::uint64_t steps_ = 0;
};

class RqnaOracle {
 public:
  RqnaOracle(const Rqna& q, const Database& db, std::span<const std::string> params, OracleLimits limits)
      : q_(q), db_(db), params_(params), stepper_(limits.max_steps), row_(q.vars.size(), 0) {}

  ResultSet run() {
    MapAggregator agg(q_.agg, q_.outputs.size());
    auto get = [&](const AttrRef& a) { return value(a); };
    chain(q_.chain, [&] {
      if (q_.agg) {
        agg.add(value(q_.group_by.at(0)), get);
      } else {
        std::vector<std::uint32_t> cells;
        for (const auto& o : q_.outputs) cells.push_back(value(o));
        agg.add_row(std::move(cells));
      }
    });
    return agg.finish();
  }

 private:
  const std::vector<std::uint32_t>& column(std::size_t var, const std::string& attr) const {
    return db_.table(q_.vars[var].table).column(attr).values;
  }
  std::uint32_t value(const AttrRef& a) const { return column(a.var, a.attr)[row_[a.var]]; }

  template <class Emit>
  void chain(const Chain& c, const Emit& emit) {
    const Leaf& l = c.leaf;
    const auto& col = column(l.var, l.attr);
    if (l.kind == Leaf::Kind::Select) {
      auto v = bind_value(db_.catalog(), q_.vars[l.var], l.attr, l.value, params_);
      if (!v) return;
      for (std::size_t r = 0; r < col.size(); ++r) {
        stepper_.step();
        if (col[r] != *v) continue;
        row_[l.var] = r;
        joins(c, 0, emit);
      }
      return;
    }
    const std::set<std::uint32_t> keys = context(*l.context);
    for (std::size_t r = 0; r < col.size(); ++r) {
      stepper_.step();
      if (!keys.count(col[r])) continue;
      row_[l.var] = r;
      joins(c, 0, emit);
    }
  }

  template <class Emit>
  void joins(const Chain& c, std::size_t k, const Emit& emit) {
    if (k == c.joins.size()) {
      emit();
      return;
    }
    const JoinStep& j = c.joins[k];
    const std::uint32_t v = value(j.source);
    const auto& col = column(j.var, j.attr);
    for (std::size_t r = 0; r < col.size(); ++r) {
      stepper_.step();
      if (col[r] != v) continue;
      row_[j.var] = r;
      joins(c, k + 1, emit);
    }
  }

  std::set<std::uint32_t> context(const Context& ctx) {
    std::set<std::uint32_t> out;
    if (ctx.chain) {
      // Bindings of the outer chain are restored afterwards by reassignment.
      chain(*ctx.chain, [&] { out.insert(value(ctx.project)); });
      return out;
    }
    bool first = true;
    for (const auto& t : ctx.terms) {
      std::set<std::uint32_t> s;
      auto v = bind_value(db_.catalog(), q_.vars[t.var], t.key, t.value, params_);
      if (v) {
        const auto& key = column(t.var, t.key);
        const auto& proj = column(t.var, t.project);
        for (std::size_t r = 0; r < key.size(); ++r) {
          stepper_.step();
          if (key[r] == *v) s.insert(proj[r]);
        }
      }
      if (first) {
        out = std::move(s);
        first = false;
      } else {
        std::set<std::uint32_t> both;
        std::set_intersection(out.begin(), out.end(), s.begin(), s.end(), std::inserter(both, both.end()));
        out = std::move(both);
      }
    }
    return out;
  }

  const Rqna& q_;
  const Database& db_;
  std::span<const std::string> params_;
  Stepper stepper_;
  std::vector<std::size_t> row_;
};

class AlgebraOracle {
 public:
  AlgebraOracle(const Algebra& a, const Database& db, std::span<const std::string> params, OracleLimits limits)
      : a_(a), db_(db), params_(params), stepper_(limits.max_steps), row_(a.vars.size(), 0) {}

  ResultSet run() {
    const Block& b = a_.root;
    if (b.agg && b.group_by.size() != 1)
      fail(Errc::UnsupportedFeature, "oracle groups by exactly one attribute");
    MapAggregator agg(b.agg, b.outputs.size());
    auto get = [&](const AttrRef& r) { return value(r); };
    block(b, [&] {
      if (b.agg) {
        agg.add(value(b.group_by[0]), get);
      } else {
        std::vector<std::uint32_t> cells;
        for (const auto& o : b.outputs) cells.push_back(value(o));
        agg.add_row(std::move(cells));
      }
    });
    return agg.finish();
  }

 private:
  struct Check {
    const Pred* pred;
    std::optional<std::uint32_t> constant;  // EqConst
    bool never = false;                      // EqConst on a missing key
    std::set<std::uint32_t> members;         // In
  };

  const std::vector<std::uint32_t>& column(std::size_t var, const std::string& attr) const {
    return db_.table(a_.vars[var].table).column(attr).values;
  }
  std::uint32_t value(const AttrRef& r) const { return column(r.var, r.attr)[row_[r.var]]; }

  template <class Emit>
  void block(const Block& b, const Emit& emit) {
    std::vector<std::vector<Check>> at(b.vars.size());
    auto level = [&](std::size_t var) {
      return static_cast<std::size_t>(std::find(b.vars.begin(), b.vars.end(), var) - b.vars.begin());
    };
    for (const auto& p : b.preds) {
      Check c{&p, std::nullopt, false, {}};
      std::size_t lv = level(p.lhs.var);
      if (p.kind == Pred::Kind::EqAttr) {
        lv = std::max(lv, level(p.rhs.var));
      } else if (p.kind == Pred::Kind::EqConst) {
        c.constant = bind_value(db_.catalog(), a_.vars[p.lhs.var], p.lhs.attr, p.value, params_);
        c.never = !c.constant;
      } else {
        c.members = set(p.set);
      }
      at[lv].push_back(std::move(c));
    }
    loop(b, at, 0, emit);
  }

  template <class Emit>
  void loop(const Block& b, const std::vector<std::vector<Check>>& at, std::size_t lv, const Emit& emit) {
    if (lv == b.vars.size()) {
      emit();
      return;
    }
    const std::size_t var = b.vars[lv];
    const std::size_t rows = db_.table(a_.vars[var].table).rows();
    for (std::size_t r = 0; r < rows; ++r) {
      stepper_.step();
      row_[var] = r;
      bool ok = true;
      for (const auto& c : at[lv]) {
        const Pred& p = *c.pred;
        if (p.kind == Pred::Kind::EqAttr) {
          ok = value(p.lhs) == value(p.rhs);
        } else if (p.kind == Pred::Kind::EqConst) {
          ok = !c.never && value(p.lhs) == *c.constant;
        } else {
          ok = c.members.count(value(p.lhs)) != 0;
        }
        if (!ok) break;
      }
      if (ok) loop(b, at, lv + 1, emit);
    }
  }

  std::set<std::uint32_t> set(const std::vector<Block>& terms) {
    std::set<std::uint32_t> out;
    bool first = true;
    for (const auto& t : terms) {
      std::set<std::uint32_t> s;
      const std::vector<std::size_t> saved = row_;
      block(t, [&] { s.insert(value(t.outputs.at(0))); });
      row_ = saved;
      if (first) {
        out = std::move(s);
        first = false;
      } else {
        std::set<std::uint32_t> both;
        std::set_intersection(out.begin(), out.end(), s.begin(), s.end(), std::inserter(both, both.end()));
        out = std::move(both);
      }
    }
    return out;
  }

  const Algebra& a_;
  const Database& db_;
  std::span<const std::string> params_;
  Stepper stepper_;
  std::vector<std::size_t> row_;
};

}  // namespace

ResultSet oracle_execute(const Rqna& q, const Database& db, std::span<const std::string> params,
                         OracleLimits limits) {
  if (q.agg && q.group_by.size() != 1) fail(Errc::UnsupportedFeature, "oracle groups by exactly one attribute");
  return RqnaOracle(q, db, params, limits).run();
}

ResultSet oracle_execute_algebra(const Algebra& a, const Database& db, std::span<const std::string> params,
                                 OracleLimits limits) {
  return AlgebraOracle(a, db, params, limits).run();
}

}  // namespace fragdb
