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


#include "fragdb/executor.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <type_traits>
#include <unordered_map>

#include "fragdb/error.hpp"
#include "scalar_program.hpp"

namespace fragdb {

SparseLookup SparseLookup::build(const FragmentIndex& index) {
  SparseLookup s;
  s.width = index.attribute_count();
  for (std::uint32_t c = 0; c < index.key_domain(); ++c) {
    const std::size_t n = index.cardinality(c);
    if (n == 0) continue;
    s.keys.push_back(c);
    s.counts.push_back(static_cast<std::uint32_t>(n));
    for (std::size_t a = 0; a < s.width; ++a) s.begins.push_back(index.offset(a, c));
  }
  // Closing row: empty fragments take no bytes, so the next present key's
  // offsets (or the array ends) bound each fragment.
  for (std::size_t a = 0; a < s.width; ++a) s.begins.push_back(index.attribute(a).bytes.size());
  return s;
}

std::uint64_t SparseLookup::bytes() const {
  return keys.size() * 4 + counts.size() * 4 + begins.size() * 8;
}

const SparseLookup& Executor::sparse(const FragmentIndex& index) const {
  std::lock_guard lock(mu_);
  auto& slot = sparse_[&index];
  if (!slot) slot = std::make_unique<SparseLookup>(SparseLookup::build(index));
  return *slot;
}

namespace {

struct Input {
  const FragmentIndex* index = nullptr;
  const SparseLookup* sparse = nullptr;
  std::size_t attr = 0;
  std::uint32_t key = 0;
  bool bound = false;
};

struct Step {
  NodeKind kind = NodeKind::Seed;
  const FragmentIndex* index = nullptr;
  const SparseLookup* sparse = nullptr;
  std::vector<std::size_t> attrs;  // index attribute positions of reads
  std::vector<std::size_t> slots;  // destination slots of reads
  std::size_t in_slot = 0;
  std::size_t out_slot = 0;
  bool singleton = false;
  bool scalar_here = false;  // evaluate the aggregate scalar per element of this step
  std::size_t capacity = 1;
  std::uint32_t seed = 0;
  bool seed_bound = false;
  int theta = 1;
  std::vector<Input> inputs;
  std::size_t dedup = 0;        // which dedup array (semijoin)
  std::ptrdiff_t group_read = -1;  // read position carrying the group key (last loop only)
};

enum class AccKind { Int, Real, Compact };

struct Shared {
  std::vector<Step> steps;
  mutable std::vector<std::vector<std::uint8_t>> dedup;
  std::size_t slot_count = 0;
  ScalarProgram scalar;
  bool has_scalar = false;
  AggFn fn = AggFn::Count;
  std::size_t group_slot = 0;
  std::uint32_t group_domain = 0;
  std::vector<std::size_t> out_slots;
  bool aggregates = false;
  std::size_t last_loop = 0;  // step feeding the aggregation
  bool empty = false;         // a constant matched no key
};

template <class Acc>
struct Ctx {
  std::vector<std::uint32_t> slots;
  std::vector<std::vector<std::vector<std::uint32_t>>> bufs;  // step, read
  std::vector<std::size_t> counts;                            // step: decoded length
  std::vector<std::vector<std::vector<std::uint32_t>>> ibufs;  // intersect inputs
  Acc s{};
  std::unordered_map<std::uint32_t, Acc> map;
  std::vector<std::uint32_t> rows;
  std::uint64_t fragments = 0, elements = 0, probes = 0;

  explicit Ctx(const Shared& sh) : slots(sh.slot_count, 0), bufs(sh.steps.size()), counts(sh.steps.size(), 0),
                                   ibufs(sh.steps.size()) {
    for (std::size_t k = 0; k < sh.steps.size(); ++k) {
      const Step& st = sh.steps[k];
      bufs[k].assign(st.kind == NodeKind::MergeIntersect ? 1 : st.attrs.size(),
                     std::vector<std::uint32_t>(st.capacity));
      if (st.kind == NodeKind::MergeIntersect)
        for (const auto& in : st.inputs) ibufs[k].emplace_back(std::max<std::uint64_t>(1, in.index->max_fragment_size()));
    }
  }
};

template <LookupMode L, AggMode A, bool Conc, bool Instr, class Acc>
class Runner {
 public:
  Runner(const Shared& sh, std::vector<Acc>& acc, std::vector<std::uint8_t>& seen, bool compact)
      : sh_(sh), acc_(acc.data()), seen_(seen.data()), compact_(compact) {}

  void descend(std::size_t k, Ctx<Acc>& c) const {
    const Step& st = sh_.steps[k];
    switch (st.kind) {
      case NodeKind::Seed:
        c.slots[st.out_slot] = st.seed;
        descend(k + 1, c);
        return;
      case NodeKind::FragSemiJoin:
        if (!first_visit(st, c.slots[st.in_slot])) return;
        if constexpr (Instr) ++c.probes;
        [[fallthrough]];
      case NodeKind::FragJoin: {
        const std::size_t n = fetch(st, c.slots[st.in_slot], c.bufs[k], c);
        if (st.singleton) {
          if (n == 0) return;
          bind(k, 0, c, c.bufs[k]);
          descend(k + 1, c);
          return;
        }
        loop(k, 0, n, c, c.bufs[k]);
        return;
      }
      case NodeKind::MergeIntersect: {
        const std::size_t n = intersect(st, c.ibufs[k], c.bufs[k][0], c);
        for (std::size_t i = 0; i < n; ++i) {
          c.slots[st.out_slot] = c.bufs[k][0][i];
          descend(k + 1, c);
        }
        return;
      }
      case NodeKind::DenseAgg:
        update(c.slots[sh_.group_slot], c.s, c);
        return;
      case NodeKind::Output:
        for (auto s : sh_.out_slots) c.rows.push_back(c.slots[s]);
        return;
    }
  }

  // Elements [begin, end) of step k whose fragment sits in bufs.
  void loop(std::size_t k, std::size_t begin, std::size_t end, Ctx<Acc>& c,
            const std::vector<std::vector<std::uint32_t>>& bufs) const {
    const Step& st = sh_.steps[k];
    if (sh_.aggregates && k == sh_.last_loop && st.group_read >= 0 && !st.scalar_here) {
      // Innermost loop: the scalar is already a loop invariant.
      const std::uint32_t* g = bufs[st.group_read].data();
      const Acc s = c.s;
      for (std::size_t i = begin; i < end; ++i) update(g[i], s, c);
      return;
    }
    for (std::size_t i = begin; i < end; ++i) {
      bind(k, i, c, bufs);
      descend(k + 1, c);
    }
  }

  // Runs every step before `stop` (no loops precede it); returns false if a
  // constant or an empty fragment ends the pipeline early.
  bool prefix(std::size_t stop, Ctx<Acc>& c, std::size_t& n) const {
    for (std::size_t k = 0; k <= stop; ++k) {
      const Step& st = sh_.steps[k];
      switch (st.kind) {
        case NodeKind::Seed:
          c.slots[st.out_slot] = st.seed;
          break;
        case NodeKind::FragSemiJoin:
          if (!first_visit(st, c.slots[st.in_slot])) return false;
          if constexpr (Instr) ++c.probes;
          [[fallthrough]];
        case NodeKind::FragJoin:
          n = fetch(st, c.slots[st.in_slot], c.bufs[k], c);
          if (n == 0) return false;
          if (k < stop) bind(k, 0, c, c.bufs[k]);
          break;
        case NodeKind::MergeIntersect:
          n = intersect(st, c.ibufs[k], c.bufs[k][0], c);
          if (n == 0) return false;
          break;
        default:
          fail(Errc::Internal, "plan has no loop");
      }
    }
    return true;
  }

  void bind(std::size_t k, std::size_t i, Ctx<Acc>& c, const std::vector<std::vector<std::uint32_t>>& bufs) const {
    const Step& st = sh_.steps[k];
    if (st.kind == NodeKind::MergeIntersect) {
      c.slots[st.out_slot] = bufs[0][i];
    } else {
      for (std::size_t r = 0; r < st.slots.size(); ++r) c.slots[st.slots[r]] = bufs[r][i];
    }
    if (st.scalar_here) c.s = eval(c);
  }

  Acc eval(const Ctx<Acc>& c) const {
    if constexpr (std::is_same_v<Acc, double>) {
      return sh_.scalar.eval<double>(c.slots.data());
    } else if constexpr (std::is_same_v<Acc, std::int64_t>) {
      return sh_.scalar.eval<std::int64_t>(c.slots.data());
    } else {
      return 1;
    }
  }

 private:
  bool first_visit(const Step& st, std::uint32_t key) const {
    std::uint8_t* seen = sh_.dedup[st.dedup].data();
    if constexpr (Conc) {
      return std::atomic_ref<std::uint8_t>(seen[key]).exchange(1, std::memory_order_relaxed) == 0;
    } else {
      if (seen[key]) return false;
      seen[key] = 1;
      return true;
    }
  }

  // Locates the fragments of `key`; returns cardinality and byte spans per attribute.
  std::size_t locate(const FragmentIndex& index, const SparseLookup* sparse, std::uint32_t key,
                     std::size_t& row) const {
    if constexpr (L == LookupMode::Direct) {
      return index.cardinality(key);
    } else {
      auto it = std::lower_bound(sparse->keys.begin(), sparse->keys.end(), key);
      if (it == sparse->keys.end() || *it != key) return 0;
      row = static_cast<std::size_t>(it - sparse->keys.begin());
      return sparse->counts[row];
    }
  }

  std::span<const std::uint8_t> bytes(const FragmentIndex& index, const SparseLookup* sparse, std::size_t a,
                                      std::uint32_t key, std::size_t row) const {
    if constexpr (L == LookupMode::Direct) {
      return index.fragment(a, key);
    } else {
      const std::uint64_t b = sparse->begins[row * sparse->width + a];
      const std::uint64_t e = sparse->begins[(row + 1) * sparse->width + a];
      return {index.attribute(a).bytes.data() + b, static_cast<std::size_t>(e - b)};
    }
  }

  std::size_t fetch(const Step& st, std::uint32_t key, std::vector<std::vector<std::uint32_t>>& out,
                    Ctx<Acc>& c) const {
    std::size_t row = 0;
    const std::size_t n = locate(*st.index, st.sparse, key, row);
    if (n == 0) return 0;
    for (std::size_t r = 0; r < st.attrs.size(); ++r)
      st.index->attribute(st.attrs[r]).codec.decode(bytes(*st.index, st.sparse, st.attrs[r], key, row), n,
                                                    out[r].data());
    if constexpr (Instr) {
      c.fragments += st.attrs.size();
      c.elements += n * st.attrs.size();
    }
    return n;
  }

  std::size_t intersect(const Step& st, std::vector<std::vector<std::uint32_t>>& ins, std::vector<std::uint32_t>& out,
                        Ctx<Acc>& c) const {
    for (const auto& in : st.inputs)
      if (!in.bound) return 0;
    if (st.theta == 0) {
      std::vector<std::span<const std::uint8_t>> spans;
      for (const auto& in : st.inputs) {
        std::size_t row = 0;
        if (locate(*in.index, in.sparse, in.key, row) == 0) return 0;
        spans.push_back(bytes(*in.index, in.sparse, in.attr, in.key, row));
      }
      const std::size_t n = intersect_bb_decode(spans, out.data());
      if constexpr (Instr) {
        c.fragments += spans.size();
        c.elements += n;
      }
      return n;
    }
    std::vector<std::size_t> len(st.inputs.size());
    for (std::size_t j = 0; j < st.inputs.size(); ++j) {
      const Input& in = st.inputs[j];
      std::size_t row = 0;
      len[j] = locate(*in.index, in.sparse, in.key, row);
      if (len[j] == 0) return 0;
      in.index->attribute(in.attr).codec.decode(bytes(*in.index, in.sparse, in.attr, in.key, row), len[j],
                                                ins[j].data());
      if constexpr (Instr) {
        ++c.fragments;
        c.elements += len[j];
      }
    }
    // Drive from the shortest list, galloping through the others.
    const std::size_t d = static_cast<std::size_t>(std::min_element(len.begin(), len.end()) - len.begin());
    std::vector<std::size_t> pos(ins.size(), 0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < len[d]; ++i) {
      const std::uint32_t v = ins[d][i];
      bool all = true;
      for (std::size_t j = 0; j < ins.size() && all; ++j) {
        if (j == d) continue;
        const std::uint32_t* a = ins[j].data();
        std::size_t lo = pos[j], step = 1, hi = lo;
        while (hi < len[j] && a[hi] < v) {
          lo = hi + 1;
          hi += step;
          step <<= 1;
        }
        pos[j] = static_cast<std::size_t>(std::lower_bound(a + lo, a + std::min(hi + 1, len[j]), v) - a);
        if (pos[j] == len[j]) return n;
        all = a[pos[j]] == v;
      }
      if (all) out[n++] = v;
    }
    return n;
  }

  void update(std::uint32_t g, Acc s, Ctx<Acc>& c) const {
    if constexpr (A == AggMode::HashMap) {
      auto [it, fresh] = c.map.try_emplace(g, s);
      if (!fresh) combine(it->second, s);
    } else if constexpr (Conc) {
      std::atomic_ref<Acc> ref(acc_[g]);
      if (sh_.fn == AggFn::Count || sh_.fn == AggFn::Sum) {
        if constexpr (std::is_integral_v<Acc>) {
          ref.fetch_add(s, std::memory_order_relaxed);
        } else {
          Acc cur = ref.load(std::memory_order_relaxed);
          while (!ref.compare_exchange_weak(cur, cur + s, std::memory_order_relaxed)) {
          }
        }
      } else {
        Acc cur = ref.load(std::memory_order_relaxed);
        while (better(s, cur) && !ref.compare_exchange_weak(cur, s, std::memory_order_relaxed)) {
        }
      }
      if (!compact_) std::atomic_ref<std::uint8_t>(seen_[g]).store(1, std::memory_order_relaxed);
    } else {
      combine(acc_[g], s);
      if (!compact_) seen_[g] = 1;
    }
  }

  bool better(Acc s, Acc cur) const { return sh_.fn == AggFn::Min ? s < cur : s > cur; }

  void combine(Acc& into, Acc s) const {
    switch (sh_.fn) {
      case AggFn::Min: if (s < into) into = s; break;
      case AggFn::Max: if (s > into) into = s; break;
      default: into += s; break;
    }
  }

  const Shared& sh_;
  Acc* acc_;
  std::uint8_t* seen_;
  bool compact_;
};

// Builds the shared state: index pointers, bound constants, buffer sizes and
// the level at which the aggregate scalar becomes computable.
Shared prepare(const PhysicalPlan& plan, const Executor& ex, const std::vector<std::string>& params,
               LookupMode lookup) {
  const Database& db = ex.database();
  const Catalog& cat = db.catalog();
  Shared sh;
  sh.slot_count = plan.slot_names.size();
  sh.aggregates = plan.aggregates();
  std::vector<std::ptrdiff_t> bound_at(sh.slot_count, -1);
  auto index_of = [&](const std::string& table, const std::string& key) {
    const FragmentIndex* ix = db.find_index(table, key);
    if (!ix) fail(Errc::MissingIndex, "index I_" + table + "." + key + " is not built");
    return ix;
  };
  for (std::size_t k = 0; k < plan.nodes.size(); ++k) {
    const PlanNode& n = plan.nodes[k];
    Step st;
    st.kind = n.kind;
    switch (n.kind) {
      case NodeKind::Seed: {
        auto v = bind_key(cat, n.entity, n.value, params);
        st.out_slot = n.out_slot;
        st.seed = v.value_or(0);
        if (!v) sh.empty = true;
        bound_at[n.out_slot] = static_cast<std::ptrdiff_t>(k);
        break;
      }
      case NodeKind::FragJoin:
      case NodeKind::FragSemiJoin: {
        st.index = index_of(n.table, n.key);
        if (lookup == LookupMode::BinarySearch) st.sparse = &ex.sparse(*st.index);
        st.in_slot = n.in_slot;
        st.singleton = n.singleton && st.index->singleton();
        for (const auto& r : n.reads) {
          const std::size_t a = st.index->require_attribute(r.attr);
          if (st.index->attribute(a).codec.kind() != r.kind)
            fail(Errc::Internal, "plan encoding of " + n.table + "." + r.attr + " is stale");
          st.attrs.push_back(a);
          st.slots.push_back(r.slot);
          bound_at[r.slot] = static_cast<std::ptrdiff_t>(k);
        }
        st.capacity = std::max<std::uint64_t>(1, st.index->max_fragment_size());
        if (n.kind == NodeKind::FragSemiJoin) {
          st.dedup = sh.dedup.size();
          sh.dedup.emplace_back(n.dedup_domain, 0);
        }
        break;
      }
      case NodeKind::MergeIntersect: {
        st.theta = n.theta;
        st.out_slot = n.out_slot;
        for (const auto& in : n.inputs) {
          Input i;
          i.index = index_of(in.table, in.key);
          if (lookup == LookupMode::BinarySearch) i.sparse = &ex.sparse(*i.index);
          i.attr = i.index->require_attribute(in.attr);
          auto v = bind_key(cat, in.entity, in.value, params);
          i.bound = v.has_value();
          i.key = v.value_or(0);
          st.capacity = std::max<std::uint64_t>(st.capacity, i.index->max_fragment_size());
          st.inputs.push_back(i);
        }
        bound_at[n.out_slot] = static_cast<std::ptrdiff_t>(k);
        break;
      }
      case NodeKind::DenseAgg:
        sh.fn = n.agg.fn;
        sh.group_slot = n.group_slot;
        sh.group_domain = n.group_domain;
        if (n.agg.arg) {
          sh.scalar = ScalarProgram(*n.agg.arg);
          sh.has_scalar = true;
        }
        break;
      case NodeKind::Output:
        sh.out_slots = n.out_slots;
        break;
    }
    sh.steps.push_back(std::move(st));
  }
  if (sh.aggregates) {
    sh.last_loop = sh.steps.size() - 2;
    if (sh.has_scalar) {
      std::vector<AttrRef> deps;
      plan.nodes.back().agg.arg->collect(deps);
      std::ptrdiff_t at = -1;
      for (const auto& d : deps) at = std::max(at, bound_at[d.var]);
      if (at >= 0) sh.steps[static_cast<std::size_t>(at)].scalar_here = true;
    }
    Step& last = sh.steps[sh.last_loop];
    for (std::size_t r = 0; r < last.slots.size(); ++r)
      if (last.slots[r] == sh.group_slot) last.group_read = static_cast<std::ptrdiff_t>(r);
  }
  return sh;
}

// First step that iterates over more than one element: the unit of parallel work.
std::size_t first_loop(const Shared& sh) {
  for (std::size_t k = 0; k < sh.steps.size(); ++k) {
    const Step& st = sh.steps[k];
    if (st.kind == NodeKind::MergeIntersect) return k;
    if ((st.kind == NodeKind::FragJoin || st.kind == NodeKind::FragSemiJoin) && !st.singleton) return k;
  }
  fail(Errc::Internal, "plan has no loop");
}

template <LookupMode L, AggMode A, bool Conc, bool Instr, class Acc>
ResultSet run_with(const Shared& sh, const ExecOptions& o, ExecStats& stats) {
  constexpr bool compact = std::is_same_v<Acc, std::uint32_t>;
  std::vector<Acc> acc;
  std::vector<std::uint8_t> seen;
  Acc init{};
  if (sh.fn == AggFn::Min) init = std::numeric_limits<Acc>::has_infinity ? std::numeric_limits<Acc>::infinity()
                                                                         : std::numeric_limits<Acc>::max();
  if (sh.fn == AggFn::Max) init = std::numeric_limits<Acc>::has_infinity ? -std::numeric_limits<Acc>::infinity()
                                                                         : std::numeric_limits<Acc>::lowest();
  if (sh.aggregates && A == AggMode::DenseArray) {
    acc.assign(sh.group_domain, init);
    if (!compact) seen.assign(sh.group_domain, 0);
  }
  stats.memory.acc_bytes = 4ull * acc.size();
  stats.memory.physical_bytes = acc.size() * sizeof(Acc) + seen.size();
  for (const auto& d : sh.dedup) {
    stats.memory.dedup_bytes += d.size();
    stats.memory.physical_bytes += d.size();
  }

  Runner<L, A, Conc, Instr, Acc> run(sh, acc, seen, compact);
  std::vector<std::unique_ptr<Ctx<Acc>>> ctxs;
  ctxs.push_back(std::make_unique<Ctx<Acc>>(sh));
  Ctx<Acc>& root = *ctxs[0];
  if (sh.has_scalar) {
    bool constant = true;
    for (const auto& st : sh.steps) constant = constant && !st.scalar_here;
    if (constant) root.s = run.eval(root);
  } else {
    root.s = 1;
  }

  if (!sh.empty) {
    if constexpr (!Conc) {
      run.descend(0, root);
    } else {
      const std::size_t k = first_loop(sh);
      std::size_t n = 0;
      if (run.prefix(k, root, n)) {
        std::atomic<std::size_t> cursor{0};
        const auto& bufs = root.bufs[k];
        auto work = [&](Ctx<Acc>& c) {
          for (std::size_t i; (i = cursor.fetch_add(1, std::memory_order_relaxed)) < n;) run.loop(k, i, i + 1, c, bufs);
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < o.threads; ++t) {
          ctxs.push_back(std::make_unique<Ctx<Acc>>(sh));
          Ctx<Acc>& c = *ctxs.back();
          c.slots = root.slots;
          c.s = root.s;
        }
        for (unsigned t = 1; t < o.threads; ++t) pool.emplace_back([&, t] { work(*ctxs[t]); });
        work(root);
        for (auto& th : pool) th.join();
      }
    }
  }

  for (const auto& c : ctxs) {
    stats.fragments += c->fragments;
    stats.elements += c->elements;
    stats.semijoin_probes += c->probes;
  }

  ResultSet r;
  if (!sh.aggregates) {
    r.grouped = false;
    r.width = sh.out_slots.size();
    for (const auto& c : ctxs) r.cells.insert(r.cells.end(), c->rows.begin(), c->rows.end());
    r.canonicalize();
    return r;
  }
  r.real = std::is_floating_point_v<Acc>;
  auto push = [&](std::uint32_t g, Acc v) {
    r.keys.push_back(g);
    if constexpr (std::is_floating_point_v<Acc>) {
      r.reals.push_back(v);
    } else {
      r.ints.push_back(static_cast<std::int64_t>(v));
    }
  };
  if constexpr (A == AggMode::HashMap) {
    std::unordered_map<std::uint32_t, Acc> merged = std::move(root.map);
    for (std::size_t t = 1; t < ctxs.size(); ++t)
      for (const auto& [g, v] : ctxs[t]->map) {
        auto [it, fresh] = merged.try_emplace(g, v);
        if (fresh) continue;
        if (sh.fn == AggFn::Min) it->second = std::min(it->second, v);
        else if (sh.fn == AggFn::Max) it->second = std::max(it->second, v);
        else it->second += v;
      }
    std::vector<std::pair<std::uint32_t, Acc>> sorted(merged.begin(), merged.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [g, v] : sorted) push(g, v);
  } else if constexpr (compact) {
    for (std::uint32_t g = 0; g < acc.size(); ++g)
      if (acc[g]) push(g, acc[g]);
  } else {
    for (std::uint32_t g = 0; g < acc.size(); ++g)
      if (seen[g]) push(g, acc[g]);
  }
  return r;
}

template <LookupMode L, AggMode A, bool Conc, bool Instr>
ResultSet pick_acc(const Shared& sh, AccKind kind, const ExecOptions& o, ExecStats& stats) {
  switch (kind) {
    case AccKind::Real: return run_with<L, A, Conc, Instr, double>(sh, o, stats);
    case AccKind::Compact: return run_with<L, A, Conc, Instr, std::uint32_t>(sh, o, stats);
    case AccKind::Int: break;
  }
  return run_with<L, A, Conc, Instr, std::int64_t>(sh, o, stats);
}

template <LookupMode L, AggMode A>
ResultSet pick_mode(const Shared& sh, AccKind kind, const ExecOptions& o, ExecStats& stats) {
  const bool conc = o.threads > 1;  // effective worker count by now
  if (conc) {
    return o.instrumented ? pick_acc<L, A, true, true>(sh, kind, o, stats)
                          : pick_acc<L, A, true, false>(sh, kind, o, stats);
  }
  return o.instrumented ? pick_acc<L, A, false, true>(sh, kind, o, stats)
                        : pick_acc<L, A, false, false>(sh, kind, o, stats);
}

}  // namespace

ResultSet Executor::run(const PhysicalPlan& plan, const std::vector<std::string>& params, const ExecOptions& options,
                        ExecStats* stats) const {
  if (params.size() != plan.param_count)
    fail(Errc::ParameterMismatch, "query takes " + std::to_string(plan.param_count) + " parameters, got " +
                                      std::to_string(params.size()));
  if (options.threads == 0) fail(Errc::Usage, "thread count must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  ExecOptions o = options;
  if (!o.oversubscribe) o.threads = std::min(o.threads, std::max(1u, std::thread::hardware_concurrency()));
  const Shared sh = prepare(plan, *this, params, options.lookup);
  AccKind kind = AccKind::Int;
  if (sh.aggregates && plan.nodes.back().agg.real()) kind = AccKind::Real;
  if (sh.aggregates && options.compact_count && sh.fn == AggFn::Count && options.agg == AggMode::DenseArray)
    kind = AccKind::Compact;
  ExecStats local;
  local.workers = o.threads;
  ResultSet r;
  const bool direct = options.lookup == LookupMode::Direct;
  const bool dense = options.agg == AggMode::DenseArray;
  if (direct && dense) r = pick_mode<LookupMode::Direct, AggMode::DenseArray>(sh, kind, o, local);
  else if (direct) r = pick_mode<LookupMode::Direct, AggMode::HashMap>(sh, kind, o, local);
  else if (dense) r = pick_mode<LookupMode::BinarySearch, AggMode::DenseArray>(sh, kind, o, local);
  else r = pick_mode<LookupMode::BinarySearch, AggMode::HashMap>(sh, kind, o, local);
  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (stats) *stats = local;
  return r;
}

ResultSet execute(const PhysicalPlan& plan, const Database& db, const std::vector<std::string>& params,
                  const ExecOptions& options, ExecStats* stats) {
  return Executor(db).run(plan, params, options, stats);
}

PhysicalPlan compile_plan(std::string_view sql, const Catalog& catalog, PlanOptions options) {
  return plan(compile_query(sql, catalog), catalog, options);
}

}  // namespace fragdb
