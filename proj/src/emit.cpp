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


#include <cctype>
#include <map>
#include <sstream>

#include "fragdb/executor.hpp"

namespace fragdb {

namespace {

std::string ident(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) out += ch;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

class Emitter {
 public:
  Emitter(const PhysicalPlan& p, const Catalog& c) : p_(p), catalog_(c) {}

  std::string run() {
    out_ << "// generated from a " << p_.nodes.size() << "-operator plan; P[] holds the bound parameters\n";
    out_ << "void run_query(const Indices& I, const uint32_t* P, Result& out) {\n";
    buffers();
    out_ << "  // operators\n";
    depth_ = 1;
    for (std::size_t k = 0; k < p_.nodes.size(); ++k) node(k);
    while (depth_ > 1) close();
    if (p_.aggregates()) {
      const PlanNode& g = p_.nodes.back();
      out_ << "  for (uint32_t g = 0; g < " << g.group_domain << "; ++g)\n";
      out_ << "    if (" << (compact_ ? "R[g]" : "R_seen[g]") << ") out.push(g, R[g]);\n";
    }
    out_ << "}\n";
    return out_.str();
  }

 private:
  std::string var(std::size_t slot) const { return "v_" + ident(p_.slot_names[slot]); }
  std::string buf(std::size_t slot) const { return "A_" + ident(p_.slot_names[slot]); }
  std::string index_name(const std::string& table, const std::string& key) const { return "I_" + table + "_" + key; }
  std::string pad() const { return std::string(2 * depth_, ' '); }

  // Phase 1: decode buffers sized by the largest fragment, result and dedup arrays.
  void buffers() {
    out_ << "  // buffers\n";
    for (const auto& n : p_.nodes) {
      if (n.kind == NodeKind::FragJoin || n.kind == NodeKind::FragSemiJoin) {
        for (const auto& r : n.reads)
          out_ << "  uint32_t " << buf(r.slot) << "[" << (n.singleton ? "1" : "MAX_" + index_name(n.table, n.key))
               << "];\n";
      } else if (n.kind == NodeKind::MergeIntersect) {
        for (std::size_t j = 0; j < n.inputs.size(); ++j) {
          if (n.theta == 0) continue;
          out_ << "  uint32_t " << buf(n.out_slot) << "_" << j << "[MAX_"
               << index_name(n.inputs[j].table, n.inputs[j].key) << "];\n";
        }
        out_ << "  uint32_t " << buf(n.out_slot) << "[MAX_" << index_name(n.inputs[0].table, n.inputs[0].key)
             << "];\n";
      }
    }
    for (const auto& n : p_.nodes) {
      if (n.kind == NodeKind::FragSemiJoin)
        out_ << "  bool B_" << ident(n.var) << "_" << n.key << "[" << n.dedup_domain << "] = {};  // |"
             << key_entity_of(n) << "|\n";
    }
    if (p_.aggregates()) {
      const PlanNode& g = p_.nodes.back();
      compact_ = g.agg.fn == AggFn::Count;
      const char* type = g.agg.real() ? "double" : (compact_ ? "uint32_t" : "int64_t");
      out_ << "  " << type << " R[" << g.group_domain << "] = {};  // |" << g.group_entity << "|\n";
      if (!compact_) out_ << "  bool R_seen[" << g.group_domain << "] = {};\n";
    }
  }

  std::string key_entity_of(const PlanNode& n) const {
    const VarDef v{n.var, n.table, catalog_.entity(n.table) != nullptr};
    return key_entity(catalog_, v, n.key);
  }

  void open(const std::string& head) {
    out_ << pad() << head << " {\n";
    ++depth_;
  }
  void close() {
    --depth_;
    out_ << pad() << "}\n";
  }

  std::string decode_call(EncodingKind kind, const std::string& index, const std::string& attr,
                          const std::string& key, const std::string& dest, const std::string& n) const {
    return "decode" + std::string(encoding_name(kind)) + "(fragment(I." + index + ", " + attr + ", " + key + "), " +
           dest + ", " + n + ");";
  }

  void node(std::size_t k) {
    const PlanNode& n = p_.nodes[k];
    switch (n.kind) {
      case NodeKind::Seed:
        out_ << pad() << "// select " << n.var << " = " << n.value.to_string() << "\n";
        out_ << pad() << "const uint32_t " << var(n.out_slot) << " = " << constant(n.value) << ";\n";
        break;
      case NodeKind::FragJoin:
      case NodeKind::FragSemiJoin: {
        const std::string ix = index_name(n.table, n.key);
        const std::string key = var(n.in_slot);
        const bool semi = n.kind == NodeKind::FragSemiJoin;
        out_ << pad() << "// " << (semi ? "semijoin " : "join ") << n.var << " via I_" << n.table << "." << n.key
             << (n.singleton ? ", entity row read in place" : "") << "\n";
        if (semi) {
          const std::string b = "B_" + ident(n.var) + "_" + n.key + "[" + key + "]";
          open("if (!" + b + ")");
          out_ << pad() << b << " = true;\n";
        }
        if (n.singleton) {
          for (const auto& r : n.reads) {
            out_ << pad() << decode_call(r.kind, ix, r.attr, key, buf(r.slot), "1") << "\n";
            out_ << pad() << "const uint32_t " << var(r.slot) << " = " << buf(r.slot) << "[0];\n";
          }
          break;
        }
        const std::string cnt = "n" + std::to_string(k);
        out_ << pad() << "const size_t " << cnt << " = count(I." << ix << ", " << key << ");\n";
        for (const auto& r : n.reads) out_ << pad() << decode_call(r.kind, ix, r.attr, key, buf(r.slot), cnt) << "\n";
        const std::string i = "i" + std::to_string(k);
        open("for (size_t " + i + " = 0; " + i + " < " + cnt + "; ++" + i + ")");
        for (const auto& r : n.reads)
          out_ << pad() << "const uint32_t " << var(r.slot) << " = " << buf(r.slot) << "[" << i << "];\n";
        break;
      }
      case NodeKind::MergeIntersect: {
        const std::string cnt = "n" + std::to_string(k);
        out_ << pad() << "// intersect " << n.inputs.size() << " fragments"
             << (n.theta == 0 ? " on their encoded bitmaps" : " after decoding") << "\n";
        std::string list;
        for (std::size_t j = 0; j < n.inputs.size(); ++j) {
          const IntersectInput& in = n.inputs[j];
          const std::string ix = index_name(in.table, in.key);
          const std::string frag = "fragment(I." + ix + ", " + in.attr + ", " + constant(in.value) + ")";
          if (n.theta == 0) {
            list += (j ? ", " : "") + frag;
          } else {
            const std::string m = "m" + std::to_string(k) + "_" + std::to_string(j);
            out_ << pad() << "const size_t " << m << " = count(I." << ix << ", " << constant(in.value) << ");\n";
            out_ << pad()
                 << decode_call(in.kind, ix, in.attr, constant(in.value), buf(n.out_slot) + "_" + std::to_string(j), m)
                 << "\n";
            list += std::string(j ? ", " : "") + "{" + buf(n.out_slot) + "_" + std::to_string(j) + ", " + m + "}";
          }
        }
        out_ << pad() << "const size_t " << cnt << " = " << (n.theta == 0 ? "intersectBB" : "mergeIntersect") << "({"
             << list << "}, " << buf(n.out_slot) << ");\n";
        const std::string i = "i" + std::to_string(k);
        open("for (size_t " + i + " = 0; " + i + " < " + cnt + "; ++" + i + ")");
        out_ << pad() << "const uint32_t " << var(n.out_slot) << " = " << buf(n.out_slot) << "[" << i << "];\n";
        break;
      }
      case NodeKind::DenseAgg: {
        const std::string g = var(n.group_slot);
        const bool real = n.agg.real();
        const std::string s = n.agg.arg ? format_scalar(*n.agg.arg,
                                                        [&](const AttrRef& a) {
                                                          return real ? "double(" + var(a.var) + ")"
                                                                      : "int64_t(" + var(a.var) + ")";
                                                        })
                                        : "1";
        switch (n.agg.fn) {
          case AggFn::Min:
            out_ << pad() << "R[" << g << "] = R_seen[" << g << "] ? std::min(R[" << g << "], " << s << ") : " << s
                 << ";\n";
            break;
          case AggFn::Max:
            out_ << pad() << "R[" << g << "] = R_seen[" << g << "] ? std::max(R[" << g << "], " << s << ") : " << s
                 << ";\n";
            break;
          default:
            out_ << pad() << "R[" << g << "] += " << s << ";\n";
            break;
        }
        if (!compact_) out_ << pad() << "R_seen[" << g << "] = true;\n";
        break;
      }
      case NodeKind::Output: {
        out_ << pad() << "out.row(";
        for (std::size_t i = 0; i < n.out_slots.size(); ++i) out_ << (i ? ", " : "") << var(n.out_slots[i]);
        out_ << ");\n";
        break;
      }
    }
  }

  std::string constant(const Value& v) const { return v.param ? "P[" + std::to_string(*v.param) + "]" : v.literal; }

  const PhysicalPlan& p_;
  const Catalog& catalog_;
  std::ostringstream out_;
  int depth_ = 1;
  bool compact_ = false;
};

}  // namespace

std::string emit_source(const PhysicalPlan& plan, const Catalog& catalog) { return Emitter(plan, catalog).run(); }

}  // namespace fragdb
