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


#include "fragdb/report.hpp"

#include <algorithm>
#include <cstdio>

#include "fragdb/huffman.hpp"
#include "fragdb/index.hpp"
#include "fragdb/size_model.hpp"

namespace fragdb {

EncodingKind ColumnReport::smallest() const {
  const CodecSize* best = nullptr;
  for (const auto& s : sizes)
    if (!best || s.bytes < best->bytes) best = &s;
  return best ? best->kind : EncodingKind::UA;
}

std::uint64_t ColumnReport::bytes_of(EncodingKind kind) const {
  for (const auto& s : sizes)
    if (s.kind == kind) return s.bytes;
  return 0;
}

std::vector<ColumnReport> codec_report(const Database& db) {
  const Catalog& cat = db.catalog();
  std::vector<ColumnReport> out;
  for (const ColumnMeta& m : cat.columns()) {
    ColumnReport r;
    r.table = m.table;
    r.key = m.key;
    r.attribute = m.attribute;
    r.role = m.role;
    r.chosen = choose_encoding(m.stats, m.role);
    const Table& t = db.table(m.table);
    const FragmentIndex& live = db.index(m.table, m.key);
    const bool bitmap_ok = m.role == ColumnRole::ForeignKey && m.stats.unique_in_fragments;
    for (EncodingKind kind : {EncodingKind::UA, EncodingKind::BCA, EncodingKind::BB, EncodingKind::HUF,
                              EncodingKind::UB}) {
      if (is_bitmap(kind) && !bitmap_ok) continue;
      IndexInput in;
      in.table = m.table;
      in.key = m.key;
      in.keys = t.column(m.key).values;
      in.key_domain = live.key_domain();
      in.singleton = live.singleton();
      in.attributes.push_back({m.attribute, m.role, t.column(m.attribute).values, m.stats.domain_size, kind});
      if (!in.singleton) in.sort_attribute = 0;
      const FragmentIndex idx = FragmentIndex::build(in);
      std::uint64_t bytes = idx.attribute(0).bytes.size();
      if (const HuffmanBook* book = idx.attribute(0).codec.book()) bytes += book->storage_bytes();
      r.sizes.push_back({kind, bytes, column_cost(kind, m.stats)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_codec_report(const std::vector<ColumnReport>& report) {
  std::string out = "column                         kind        bytes      model_bytes  mark\n";
  char buf[256];
  for (const auto& r : report) {
    const std::string name = r.table + "." + r.key + "." + r.attribute;
    const EncodingKind smallest = r.smallest();
    for (const auto& s : r.sizes) {
      std::string mark;
      if (s.kind == r.chosen) mark += " chosen";
      if (s.kind == smallest) mark += " smallest";
      std::snprintf(buf, sizeof buf, "%-30s %-4s %12llu %16.0f %s\n", name.c_str(),
                    std::string(encoding_name(s.kind)).c_str(), static_cast<unsigned long long>(s.bytes),
                    s.model_bits / 8, mark.c_str());
      out += buf;
    }
  }
  return out;
}

}  // namespace fragdb
