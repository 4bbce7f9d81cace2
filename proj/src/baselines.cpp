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
#include <chrono>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "fragdb/baselines.hpp"
#include "fragdb/error.hpp"
#include "scalar_program.hpp"

namespace fragdb {

std::pair<std::uint32_t, std::uint32_t> SortedCopy::find_binary(std::uint32_t v) const {
  auto it = std::lower_bound(runs.begin(), runs.end(), v, [](const auto& run, std::uint32_t x) { return run.first < x; });
  if (it == runs.end() || it->first != v) return {0, 0};
  const std::uint32_t end = it + 1 == runs.end() ? rows : (it + 1)->second;
  return {it->second, end};
}

const std::vector<std::uint32_t>& SortedCopy::column(const std::string& attr) const {
  auto it = columns.find(attr);
  if (it == columns.end()) fail(Errc::UnknownAttribute, table + " copy on " + key + " has no column " + attr);
  return it->second;
}

std::uint64_t SortedCopy::bytes() const {
  std::uint64_t total = runs.size() * 8 + (dense_start.size() + dense_end.size()) * 4;
  for (const auto& [name, col] : columns) total += col.size() * 4;
  return total;
}

SortedCopy make_sorted_copy(const Table& table, const std::string& key, const std::string& tiebreak,
                            std::uint32_t key_domain) {
  SortedCopy c;
  c.table = table.name;
  c.key = key;
  c.rows = static_cast<std::uint32_t>(table.rows());
  const auto& k = table.column(key).values;
  const std::vector<std::uint32_t>* t = tiebreak.empty() ? nullptr : &table.column(tiebreak).values;
  std::vector<std::uint32_t> order(c.rows);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (k[a] != k[b]) return k[a] < k[b];
    return t && (*t)[a] < (*t)[b];
  });
  for (std::uint32_t i = 0; i < c.rows; ++i) {
    const std::uint32_t v = k[order[i]];
    if (c.runs.empty() || c.runs.back().first != v) c.runs.emplace_back(v, i);
  }
  for (const auto& col : table.columns) {
    if (col.name == key) continue;
    auto& out = c.columns[col.name];
    out.reserve(c.rows);
    for (auto r : order) out.push_back(col.values[r]);
  }
  std::uint32_t domain = key_domain;
  if (!c.runs.empty()) domain = std::max(domain, c.runs.back().first + 1);
  c.dense_start.assign(domain, 0);
  c.dense_end.assign(domain, 0);
  for (std::size_t j = 0; j < c.runs.size(); ++j) {
    const auto [v, start] = c.runs[j];
    c.dense_start[v] = start;
    c.dense_end[v] = j + 1 == c.runs.size() ? c.rows : c.runs[j + 1].second;
  }
  return c;
}

OmcColumnSet OmcColumnSet::build(const Database& db) {
  OmcColumnSet s;
  const Catalog& cat = db.catalog();
  for (const auto& [name, table] : db.tables()) {
    if (const auto* r = cat.relationship(name)) {
      s.copies_[name + "." + r->fk1.name] =
          make_sorted_copy(table, r->fk1.name, r->fk2.name, cat.entity_size(r->fk1.entity));
      s.copies_[name + "." + r->fk2.name] =
          make_sorted_copy(table, r->fk2.name, r->fk1.name, cat.entity_size(r->fk2.entity));
    } else if (cat.entity(name)) {
      s.copies_[name + ".ID"] = make_sorted_copy(table, "ID", "", cat.entity_size(name));
    }
  }
  return s;
}

const SortedCopy& OmcColumnSet::copy(const std::string& table, const std::string& key) const {
  auto it = copies_.find(table + "." + key);
  if (it == copies_.end()) fail(Errc::MissingIndex, "no sorted copy of " + table + " on " + key);
  return it->second;
}

std::uint64_t OmcColumnSet::bytes() const {
  std::uint64_t total = 0;
  for (const auto& [name, c] : copies_) total += c.bytes();
  return total;
}

namespace {

enum class Strategy { Pmc, Omc, OmcDense };

// Intermediate result: one column per (var, attribute), all of equal length.
struct Materialized {
  std::vector<AttrRef> attrs;
  std::vector<std::vector<std::uint32_t>> cols;
  std::size_t rows = 0;

  std::size_t find(const AttrRef& a) const {
    for (std::size_t i = 0; i < attrs.size(); ++i)
      if (attrs[i] == a) return i;
    fail(Errc::Internal, "attribute not materialized");
  }
};

template <Strategy S>
class Baseline {
 public:
  Baseline(const Rqna& q, const Database& db, const OmcColumnSet* omc, std::span<const std::string> params)
      : q_(q), db_(db), omc_(omc), params_(params) {}

  ResultSet run(BaselineStats& stats) {
    Materialized m = chain(q_.chain);
    stats.materialized_cells = cells_;
    return q_.agg ? aggregate(m) : project(m);
  }

 private:
  const Table& table(std::size_t var) const { return db_.table(q_.vars[var].table); }

  std::optional<std::uint32_t> bind(std::size_t var, const std::string& attr, const Value& v) const {
    return bind_key(db_.catalog(), key_entity(db_.catalog(), q_.vars[var], attr), v, params_);
  }

  // Appends the projections of `var` for the given source rows.
  void append_var(Materialized& out, std::size_t var, const std::vector<std::uint32_t>& rows,
                  const SortedCopy* copy, std::uint32_t key_value) {
    for (const auto& attr : q_.projections[var]) {
      out.attrs.push_back({var, attr});
      std::vector<std::uint32_t> col;
      col.reserve(rows.size());
      if (copy && attr == copy->key) {
        col.assign(rows.size(), key_value);
      } else {
        const auto& src = copy ? copy->column(attr) : table(var).column(attr).values;
        for (auto r : rows) col.push_back(src[r]);
      }
      cells_ += col.size();
      out.cols.push_back(std::move(col));
    }
    out.rows = rows.size();
  }

  const SortedCopy& copy(std::size_t var, const std::string& key) const {
    return omc_->copy(q_.vars[var].table, key);
  }

  std::pair<std::uint32_t, std::uint32_t> range(const SortedCopy& c, std::uint32_t v) const {
    if constexpr (S == Strategy::OmcDense) {
      return c.find_dense(v);
    } else {
      return c.find_binary(v);
    }
  }

  Materialized select(std::size_t var, const std::string& attr, std::uint32_t v) {
    Materialized m;
    std::vector<std::uint32_t> rows;
    if constexpr (S == Strategy::Pmc) {
      const auto& col = table(var).column(attr).values;
      for (std::uint32_t r = 0; r < col.size(); ++r)
        if (col[r] == v) rows.push_back(r);
      append_var(m, var, rows, nullptr, 0);
    } else {
      const SortedCopy& c = copy(var, attr);
      const auto [b, e] = range(c, v);
      for (auto r = b; r < e; ++r) rows.push_back(r);
      append_var(m, var, rows, &c, v);
    }
    return m;
  }

  // Rows of `var` whose `attr` lies in `keys` (sorted, distinct).
  Materialized semijoin(std::size_t var, const std::string& attr, const std::vector<std::uint32_t>& keys) {
    Materialized m;
    if constexpr (S == Strategy::Pmc) {
      const std::unordered_set<std::uint32_t> in(keys.begin(), keys.end());
      const auto& col = table(var).column(attr).values;
      std::vector<std::uint32_t> rows;
      for (std::uint32_t r = 0; r < col.size(); ++r)
        if (in.count(col[r])) rows.push_back(r);
      append_var(m, var, rows, nullptr, 0);
    } else {
      // Per key the copy contributes a run; the key column is rebuilt alongside.
      const SortedCopy& c = copy(var, attr);
      std::vector<std::uint32_t> rows, key_col;
      for (auto v : keys) {
        const auto [b, e] = range(c, v);
        for (auto r = b; r < e; ++r) {
          rows.push_back(r);
          key_col.push_back(v);
        }
      }
      append_var(m, var, rows, &c, 0);
      m.cols[m.find({var, attr})] = std::move(key_col);
    }
    return m;
  }

  // Extends every row of `in` with the matching rows of `var` (var.attr = source).
  Materialized join(const Materialized& in, std::size_t var, const std::string& attr, const AttrRef& source) {
    const auto& src = in.cols[in.find(source)];
    std::vector<std::uint32_t> left, right, key_col;
    const SortedCopy* c = nullptr;
    if constexpr (S == Strategy::Pmc) {
      // Scan the whole join column once, keeping row ids of wanted values.
      const std::unordered_set<std::uint32_t> wanted(src.begin(), src.end());
      const auto& col = table(var).column(attr).values;
      std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> rows_of;
      for (std::uint32_t r = 0; r < col.size(); ++r)
        if (wanted.count(col[r])) rows_of[col[r]].push_back(r);
      for (std::uint32_t i = 0; i < in.rows; ++i) {
        auto it = rows_of.find(src[i]);
        if (it == rows_of.end()) continue;
        for (auto r : it->second) {
          left.push_back(i);
          right.push_back(r);
        }
      }
    } else {
      c = &copy(var, attr);
      for (std::uint32_t i = 0; i < in.rows; ++i) {
        const auto [b, e] = range(*c, src[i]);
        for (auto r = b; r < e; ++r) {
          left.push_back(i);
          right.push_back(r);
          key_col.push_back(src[i]);
        }
      }
    }
    Materialized out;
    out.attrs = in.attrs;
    for (const auto& col : in.cols) {
      std::vector<std::uint32_t> g;
      g.reserve(left.size());
      for (auto i : left) g.push_back(col[i]);
      cells_ += g.size();
      out.cols.push_back(std::move(g));
    }
    Materialized add;
    append_var(add, var, right, c, 0);
    if (c) add.cols[add.find({var, attr})] = std::move(key_col);
    for (std::size_t j = 0; j < add.attrs.size(); ++j) {
      out.attrs.push_back(add.attrs[j]);
      out.cols.push_back(std::move(add.cols[j]));
    }
    out.rows = left.size();
    return out;
  }

  Materialized chain(const Chain& c) {
    const Leaf& l = c.leaf;
    Materialized m;
    if (l.kind == Leaf::Kind::Select) {
      auto v = bind(l.var, l.attr, l.value);
      if (v) {
        m = select(l.var, l.attr, *v);
      } else {
        append_var(m, l.var, {}, nullptr, 0);
      }
    } else {
      m = semijoin(l.var, l.attr, context(*l.context));
    }
    for (const auto& j : c.joins) m = join(m, j.var, j.attr, j.source);
    return m;
  }

  // Distinct sorted keys produced by a semijoin context.
  std::vector<std::uint32_t> context(const Context& ctx) {
    if (ctx.chain) {
      const Materialized m = chain(*ctx.chain);
      return distinct(m.cols[m.find(ctx.project)], key_domain(ctx.project));
    }
    std::vector<std::uint32_t> acc;
    for (std::size_t t = 0; t < ctx.terms.size(); ++t) {
      const IntersectTerm& term = ctx.terms[t];
      std::vector<std::uint32_t> list;
      if (auto v = bind(term.var, term.key, term.value)) {
        if constexpr (S == Strategy::Pmc) {
          const auto& key = table(term.var).column(term.key).values;
          const auto& proj = table(term.var).column(term.project).values;
          for (std::uint32_t r = 0; r < key.size(); ++r)
            if (key[r] == *v) list.push_back(proj[r]);
        } else {
          const SortedCopy& c = copy(term.var, term.key);
          const auto [b, e] = range(c, *v);
          const auto& proj = c.column(term.project);
          list.assign(proj.begin() + b, proj.begin() + e);  // sorted by the tiebreak
        }
      }
      cells_ += list.size();
      if (t == 0) {
        acc = std::move(list);
        continue;
      }
      std::vector<std::uint32_t> both;
      if constexpr (S == Strategy::Pmc) {
        for (auto x : acc)
          for (auto y : list)
            if (x == y) {
              both.push_back(x);
              break;
            }
      } else {
        std::set_intersection(acc.begin(), acc.end(), list.begin(), list.end(), std::back_inserter(both));
      }
      acc = std::move(both);
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    return acc;
  }

  std::uint32_t key_domain(const AttrRef& a) const {
    return db_.catalog().entity_size(key_entity(db_.catalog(), q_.vars[a.var], a.attr));
  }

  std::vector<std::uint32_t> distinct(const std::vector<std::uint32_t>& col, std::uint32_t domain) const {
    std::vector<std::uint32_t> out;
    if constexpr (S == Strategy::OmcDense) {
      std::vector<std::uint8_t> seen(domain, 0);
      for (auto v : col) seen[v] = 1;
      for (std::uint32_t v = 0; v < domain; ++v)
        if (seen[v]) out.push_back(v);
    } else {
      std::unordered_set<std::uint32_t> s(col.begin(), col.end());
      out.assign(s.begin(), s.end());
      std::sort(out.begin(), out.end());
    }
    return out;
  }

  ResultSet aggregate(const Materialized& m) {
    const AggSpec& agg = *q_.agg;
    if (agg.fn == AggFn::Avg || agg.fn == AggFn::Median)
      fail(Errc::UnsupportedFeature, std::string(agg_name(agg.fn)) + " is not evaluated");
    return agg.real() ? aggregate_as<double>(m) : aggregate_as<std::int64_t>(m);
  }

  template <class Acc>
  ResultSet aggregate_as(const Materialized& m) {
    const AggSpec& agg = *q_.agg;
    const auto& g = m.cols[m.find(q_.group_by.at(0))];
    std::vector<const std::vector<std::uint32_t>*> deps;
    ScalarProgram prog;
    if (agg.arg) {
      prog = ScalarProgram(*agg.arg, [&](const AttrRef& a) {
        deps.push_back(&m.cols[m.find(a)]);
        return deps.size() - 1;
      });
    }
    std::vector<std::uint32_t> vals(deps.size());
    auto value = [&](std::size_t i) -> Acc {
      if (!agg.arg) return 1;
      for (std::size_t d = 0; d < deps.size(); ++d) vals[d] = (*deps[d])[i];
      return prog.eval<Acc>(vals.data());
    };
    auto combine = [&](Acc& into, Acc x) {
      if (agg.fn == AggFn::Min) into = std::min(into, x);
      else if (agg.fn == AggFn::Max) into = std::max(into, x);
      else into += x;
    };
    ResultSet r;
    r.real = std::is_floating_point_v<Acc>;
    auto push = [&](std::uint32_t k, Acc v) {
      r.keys.push_back(k);
      if constexpr (std::is_floating_point_v<Acc>) {
        r.reals.push_back(v);
      } else {
        r.ints.push_back(v);
      }
    };
    if constexpr (S == Strategy::OmcDense) {
      const std::uint32_t domain = key_domain(q_.group_by[0]);
      std::vector<Acc> acc(domain, Acc{});
      std::vector<std::uint8_t> seen(domain, 0);
      for (std::size_t i = 0; i < m.rows; ++i) {
        const Acc x = value(i);
        if (seen[g[i]]) {
          combine(acc[g[i]], x);
        } else {
          acc[g[i]] = x;
          seen[g[i]] = 1;
        }
      }
      for (std::uint32_t k = 0; k < domain; ++k)
        if (seen[k]) push(k, acc[k]);
    } else {
      std::unordered_map<std::uint32_t, Acc> acc;
      for (std::size_t i = 0; i < m.rows; ++i) {
        const Acc x = value(i);
        auto [it, fresh] = acc.try_emplace(g[i], x);
        if (!fresh) combine(it->second, x);
      }
      std::vector<std::pair<std::uint32_t, Acc>> sorted(acc.begin(), acc.end());
      std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [k, v] : sorted) push(k, v);
    }
    return r;
  }

  ResultSet project(const Materialized& m) const {
    ResultSet r;
    r.grouped = false;
    r.width = q_.outputs.size();
    std::vector<const std::vector<std::uint32_t>*> cols;
    for (const auto& o : q_.outputs) cols.push_back(&m.cols[m.find(o)]);
    r.cells.reserve(m.rows * r.width);
    for (std::size_t i = 0; i < m.rows; ++i)
      for (const auto* c : cols) r.cells.push_back((*c)[i]);
    r.canonicalize();
    return r;
  }

  const Rqna& q_;
  const Database& db_;
  const OmcColumnSet* omc_;
  std::span<const std::string> params_;
  std::uint64_t cells_ = 0;
};

template <Strategy S>
ResultSet run_baseline(const Rqna& q, const Database& db, const OmcColumnSet* omc, std::span<const std::string> params,
                       BaselineStats* stats) {
  if (params.size() != q.param_count)
    fail(Errc::ParameterMismatch, "query takes " + std::to_string(q.param_count) + " parameters, got " +
                                      std::to_string(params.size()));
  const auto t0 = std::chrono::steady_clock::now();
  BaselineStats local;
  ResultSet r = Baseline<S>(q, db, omc, params).run(local);
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = local;
  return r;
}

}  // namespace

ResultSet pmc_execute(const Rqna& q, const Database& db, std::span<const std::string> params, BaselineStats* stats) {
  return run_baseline<Strategy::Pmc>(q, db, nullptr, params, stats);
}

ResultSet omc_execute(const Rqna& q, const Database& db, const OmcColumnSet& omc, std::span<const std::string> params,
                      BaselineStats* stats) {
  return run_baseline<Strategy::Omc>(q, db, &omc, params, stats);
}

ResultSet omc_dense_execute(const Rqna& q, const Database& db, const OmcColumnSet& omc,
                            std::span<const std::string> params, BaselineStats* stats) {
  return run_baseline<Strategy::OmcDense>(q, db, &omc, params, stats);
}

}  // namespace fragdb
