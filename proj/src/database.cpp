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

#include "fragdb/database.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "fragdb/csv.hpp"
#include "fragdb/error.hpp"
#include "fragdb/size_model.hpp"

namespace fragdb {
namespace {

constexpr std::string_view kTablesMagic = "FRAGTBL1";
constexpr std::string_view kIndicesMagic = "FRAGIDX1";

std::uint32_t parse_uint(std::string_view field, const std::string& where) {
  if (field.empty()) fail(Errc::TypeMismatch, where + ": NULL values are not supported");
  if (field.front() == '-') fail(Errc::TypeMismatch, where + ": negative value '" + std::string(field) + "'");
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || p != field.data() + field.size() || v > 0xffffffffull)
    fail(Errc::TypeMismatch, where + ": '" + std::string(field) + "' is not a 32-bit unsigned integer");
  return static_cast<std::uint32_t>(v);
}

std::string where(const std::string& table, std::size_t line, const std::string& column) {
  return table + " line " + std::to_string(line) + " column " + column;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

std::uint64_t get_u64(std::string_view in, std::size_t& pos) {
  if (pos + 8 > in.size()) fail(Errc::CorruptMetadata, "table snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[pos + i])} << (8 * i);
  pos += 8;
  return v;
}

std::string get_str(std::string_view in, std::size_t& pos) {
  const std::uint64_t n = get_u64(in, pos);
  if (pos + n > in.size()) fail(Errc::CorruptMetadata, "table snapshot truncated");
  std::string s(in.substr(pos, n));
  pos += n;
  return s;
}

}  // namespace

const Column* Table::find(std::string_view column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

const Column& Table::column(std::string_view column) const {
  const Column* c = find(column);
  if (!c) fail(Errc::UnknownAttribute, name + " has no column " + std::string(column));
  return *c;
}

Database::Database(Catalog catalog) : catalog_(std::move(catalog)) { ensure_declared_entities(); }

Database Database::from_schema(std::string_view schema_text) {
  return Database(Catalog(parse_schema(schema_text)));
}

void Database::ensure_declared_entities() {
  for (const auto& e : catalog_.schema().entities) {
    if (!e.declared_size || !e.attributes.empty() || tables_.count(e.name)) continue;
    Table t{e.name, true, {{"ID", {}}}};
    t.columns[0].values.resize(*e.declared_size);
    for (std::uint32_t i = 0; i < *e.declared_size; ++i) t.columns[0].values[i] = i;
    tables_[e.name] = std::move(t);
    catalog_.set_row_count(e.name, *e.declared_size);
  }
}

std::uint64_t Database::load_csv(std::string_view table_name, std::string_view csv_text) {
  const auto canonical = catalog_.resolve_table(table_name);
  if (!canonical) fail(Errc::UnknownTable, "unknown table " + std::string(table_name));
  const std::string name = *canonical;
  const EntityDef* ent = catalog_.entity(name);
  const RelationshipDef* rel = catalog_.relationship(name);
  if (ent && ent->declared_size && ent->attributes.empty()) {
    tables_.erase(name);
  } else if (tables_.count(name)) {
    fail(Errc::AlreadyLoaded, name + " is already loaded; incremental loads are not supported");
  }

  // Expected columns in storage order.
  std::vector<std::string> expected;
  if (ent) {
    expected.push_back("ID");
    for (const auto& a : ent->attributes) expected.push_back(a.name);
  } else {
    expected = {rel->fk1.name, rel->fk2.name};
    for (const auto& m : rel->measures) expected.push_back(m.name);
  }
  std::vector<std::size_t> source;  // storage column -> csv field
  bool have_header = false;
  std::size_t width = 0;

  Table table{name, ent != nullptr, {}};
  for (const auto& c : expected) table.columns.push_back({c, {}});
  std::vector<std::vector<std::uint32_t>> raw(expected.size());
  std::vector<std::string> entity_keys;  // dictionary-keyed entities keep raw IDs

  std::uint32_t h1 = 0, h2 = 0;
  const Dictionary* d1 = nullptr;
  const Dictionary* d2 = nullptr;
  if (rel) {
    h1 = catalog_.entity_size(rel->fk1.entity);
    h2 = catalog_.entity_size(rel->fk2.entity);
    const auto* e1 = catalog_.entity(rel->fk1.entity);
    const auto* e2 = catalog_.entity(rel->fk2.entity);
    if (!e1->declared_size) d1 = catalog_.find_key_dictionary(e1->name);
    if (!e2->declared_size) d2 = catalog_.find_key_dictionary(e2->name);
  }

  auto value_kind = [&](std::size_t col) {
    if (ent) return ent->attributes[col - 1].kind;
    return rel->measures[col - 2].kind;
  };

  for_each_csv_record(csv_text, [&](std::span<const std::string_view> fields, std::size_t line) {
    if (!have_header) {
      have_header = true;
      width = fields.size();
      for (const auto& c : expected) {
        auto it = std::find_if(fields.begin(), fields.end(), [&](std::string_view f) {
          return f.size() == c.size() && std::equal(f.begin(), f.end(), c.begin(), [](char a, char b) {
                   return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
                 });
        });
        if (it == fields.end()) fail(Errc::SyntaxError, name + " header lacks column " + c);
        source.push_back(static_cast<std::size_t>(it - fields.begin()));
      }
      if (width != expected.size())
        fail(Errc::SyntaxError, name + " header has " + std::to_string(width) + " columns, expected " +
                                    std::to_string(expected.size()));
      return;
    }
    if (fields.size() != width)
      fail(Errc::RaggedRow, name + " line " + std::to_string(line) + " has " +
                                std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    for (std::size_t col = 0; col < expected.size(); ++col) {
      const std::string_view f = fields[source[col]];
      std::uint32_t v;
      if (ent && col == 0) {
        if (ent->declared_size) {
          v = parse_uint(f, where(name, line, "ID"));
          if (v >= *ent->declared_size)
            fail(Errc::KeyOutOfDomain, where(name, line, "ID") + ": " + std::to_string(v) +
                                           " outside declared size " + std::to_string(*ent->declared_size));
        } else {
          if (f.empty()) fail(Errc::TypeMismatch, where(name, line, "ID") + ": NULL key");
          entity_keys.emplace_back(f);
          v = 0;
        }
      } else if (rel && col < 2) {
        const Dictionary* d = col == 0 ? d1 : d2;
        const std::uint32_t h = col == 0 ? h1 : h2;
        if (d) {
          auto id = d->find(f);
          if (!id) fail(Errc::FkOutOfDomain, where(name, line, expected[col]) + ": unknown key '" + std::string(f) + "'");
          v = *id;
        } else {
          v = parse_uint(f, where(name, line, expected[col]));
          if (v >= h)
            fail(Errc::FkOutOfDomain, where(name, line, expected[col]) + ": " + std::to_string(v) +
                                          " outside [0," + std::to_string(h) + ")");
        }
      } else if (value_kind(col) == ValueKind::String) {
        v = catalog_.value_dictionary(name, expected[col]).intern(f);
      } else {
        v = parse_uint(f, where(name, line, expected[col]));
      }
      raw[col].push_back(v);
    }
  });
  if (!have_header) fail(Errc::SyntaxError, name + " csv has no header row");
  const std::size_t rows = raw[0].size();

  if (ent) {
    std::uint32_t h;
    if (ent->declared_size) {
      h = *ent->declared_size;
      if (rows != h)
        fail(Errc::IncompleteEntity, name + " declares " + std::to_string(h) + " entities but csv has " +
                                         std::to_string(rows) + " rows");
      // Place row i at entity i.
      std::vector<std::uint32_t> pos(h, 0xffffffffu);
      for (std::size_t r = 0; r < rows; ++r) {
        if (pos[raw[0][r]] != 0xffffffffu)
          fail(Errc::DuplicateKey, name + " repeats ID " + std::to_string(raw[0][r]));
        pos[raw[0][r]] = static_cast<std::uint32_t>(r);
      }
      for (std::size_t col = 0; col < expected.size(); ++col) {
        auto& out = table.columns[col].values;
        out.resize(h);
        for (std::uint32_t i = 0; i < h; ++i) out[i] = col == 0 ? i : raw[col][pos[i]];
      }
    } else {
      Dictionary& dict = catalog_.key_dictionary(name);
      if (dict.size() != 0) fail(Errc::AlreadyLoaded, name + " already has a key dictionary");
      for (std::size_t r = 0; r < rows; ++r) {
        if (dict.find(entity_keys[r])) fail(Errc::DuplicateKey, name + " repeats ID '" + entity_keys[r] + "'");
        raw[0][r] = dict.intern(entity_keys[r]);
      }
      h = static_cast<std::uint32_t>(rows);
      for (std::size_t col = 0; col < expected.size(); ++col) table.columns[col].values = std::move(raw[col]);
    }
    catalog_.set_entity_size(name, h);
    for (std::size_t col = 1; col < expected.size(); ++col) {
      std::uint64_t d = 1;
      if (ent->attributes[col - 1].kind == ValueKind::String) {
        const auto* dict = catalog_.find_value_dictionary(name, expected[col]);
        d = std::max<std::uint64_t>(1, dict ? dict->size() : 0);
      } else {
        for (auto v : table.columns[col].values) d = std::max<std::uint64_t>(d, std::uint64_t{v} + 1);
      }
      catalog_.set_measure_domain(name, expected[col], d);
    }
  } else {
    std::vector<std::uint64_t> pairs(rows);
    for (std::size_t r = 0; r < rows; ++r) pairs[r] = (std::uint64_t{raw[0][r]} << 32) | raw[1][r];
    std::sort(pairs.begin(), pairs.end());
    auto dup = std::adjacent_find(pairs.begin(), pairs.end());
    if (dup != pairs.end())
      fail(Errc::DuplicateKeyPair, name + " repeats (" + rel->fk1.name + "," + rel->fk2.name + ") = (" +
                                       std::to_string(*dup >> 32) + "," + std::to_string(*dup & 0xffffffffu) + ")");
    for (std::size_t col = 0; col < expected.size(); ++col) table.columns[col].values = std::move(raw[col]);
    for (std::size_t col = 2; col < expected.size(); ++col) {
      std::uint64_t d = 1;
      if (rel->measures[col - 2].kind == ValueKind::String) {
        const auto* dict = catalog_.find_value_dictionary(name, expected[col]);
        d = std::max<std::uint64_t>(1, dict ? dict->size() : 0);
      } else {
        for (auto v : table.columns[col].values) d = std::max<std::uint64_t>(d, std::uint64_t{v} + 1);
      }
      catalog_.set_measure_domain(name, expected[col], d);
    }
  }
  catalog_.set_row_count(name, rows);
  tables_[name] = std::move(table);
  return rows;
}

const Table& Database::table(const std::string& canonical) const {
  auto it = tables_.find(canonical);
  if (it == tables_.end()) fail(Errc::NotLoaded, "table " + canonical + " not loaded");
  return it->second;
}

ColumnStats Database::compute_stats(const std::string& table_name, const std::string& key,
                                    const std::string& attribute) const {
  const Table& t = table(table_name);
  return column_stats(t.column(key).values, catalog_.attribute_domain(table_name, key),
                      t.column(attribute).values, catalog_.attribute_domain(table_name, attribute));
}

void Database::build_indices(EncodingPolicy policy, const EncodingOverrides& overrides) {
  indices_.clear();
  catalog_.columns().clear();
  built_ = true;

  auto build_one = [&](const std::string& tname, const std::string& key, bool singleton,
                       const std::vector<std::pair<std::string, ColumnRole>>& attrs,
                       std::optional<std::size_t> sort_attr) {
    const Table& t = table(tname);
    IndexInput in;
    in.table = tname;
    in.key = key;
    in.keys = t.column(key).values;
    in.key_domain = static_cast<std::uint32_t>(catalog_.attribute_domain(tname, key));
    in.singleton = singleton;
    in.sort_attribute = sort_attr;
    std::vector<ColumnMeta> metas;
    for (const auto& [attr, role] : attrs) {
      ColumnMeta m;
      m.table = tname;
      m.key = key;
      m.attribute = attr;
      m.role = role;
      const std::uint64_t domain = catalog_.attribute_domain(tname, attr);
      if (t.rows() > 0) {
        m.stats = column_stats(in.keys, in.key_domain, t.column(attr).values, domain);
      } else {
        m.stats.domain_size = domain;
      }
      auto ov = overrides.find(tname + "." + key + "." + attr);
      if (ov != overrides.end()) {
        m.encoding = ov->second;
        if (is_bitmap(m.encoding) && (role != ColumnRole::ForeignKey || !m.stats.unique_in_fragments))
          fail(Errc::EncodingNotApplicable, std::string(encoding_name(m.encoding)) + " not applicable to " +
                                                tname + "." + attr);
      } else if (policy == EncodingPolicy::AllUA || t.rows() == 0) {
        m.encoding = EncodingKind::UA;
      } else {
        m.encoding = choose_encoding(m.stats, role);
      }
      in.attributes.push_back({attr, role, t.column(attr).values, domain, m.encoding});
      metas.push_back(std::move(m));
    }
    FragmentIndex idx = FragmentIndex::build(in);
    for (std::size_t a = 0; a < metas.size(); ++a) {
      metas[a].offset_width = idx.attribute(a).offset_width;
      metas[a].byte_size = idx.attribute(a).bytes.size();
      catalog_.columns().push_back(std::move(metas[a]));
    }
    indices_.emplace(tname + "." + key, std::move(idx));
  };

  for (const auto& e : catalog_.schema().entities) {
    if (e.attributes.empty()) continue;
    if (!has_table(e.name)) fail(Errc::NotLoaded, "entity " + e.name + " has attributes but no data");
    std::vector<std::pair<std::string, ColumnRole>> attrs;
    for (const auto& a : e.attributes) attrs.emplace_back(a.name, ColumnRole::Measure);
    build_one(e.name, "ID", true, attrs, std::nullopt);
  }
  for (const auto& r : catalog_.schema().relationships) {
    if (!has_table(r.name)) fail(Errc::NotLoaded, "relationship " + r.name + " has no data");
    for (int side = 0; side < 2; ++side) {
      const auto& key = side == 0 ? r.fk1 : r.fk2;
      const auto& other = side == 0 ? r.fk2 : r.fk1;
      std::vector<std::pair<std::string, ColumnRole>> attrs{{other.name, ColumnRole::ForeignKey}};
      for (const auto& m : r.measures) attrs.emplace_back(m.name, ColumnRole::Measure);
      build_one(r.name, key.name, false, attrs, 0);
    }
  }
}

const FragmentIndex* Database::find_index(std::string_view table_name, std::string_view key) const {
  auto it = indices_.find(std::string(table_name) + "." + std::string(key));
  return it == indices_.end() ? nullptr : &it->second;
}

const FragmentIndex& Database::index(std::string_view table_name, std::string_view key) const {
  const auto* idx = find_index(table_name, key);
  if (!idx) fail(Errc::MissingIndex, "no index on " + std::string(table_name) + "." + std::string(key));
  return *idx;
}

std::uint64_t Database::index_bytes() const {
  std::uint64_t total = 0;
  for (const auto& [_, idx] : indices_) total += idx.total_bytes();
  return total;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(Errc::Io, "short write to " + path.string());
}

void Database::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_file(dir / "metadata.json", persist_metadata(catalog_));

  std::string tables(kTablesMagic);
  put_u64(tables, tables_.size());
  for (const auto& [name, t] : tables_) {
    put_u64(tables, name.size());
    tables += name;
    put_u64(tables, t.entity);
    put_u64(tables, t.columns.size());
    for (const auto& c : t.columns) {
      put_u64(tables, c.name.size());
      tables += c.name;
      put_u64(tables, c.values.size());
      tables.append(reinterpret_cast<const char*>(c.values.data()), c.values.size() * 4);
    }
  }
  write_file(dir / "tables.bin", tables);

  if (built_) {
    std::vector<std::uint8_t> bytes(kIndicesMagic.begin(), kIndicesMagic.end());
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(indices_.size() >> (8 * i)));
    for (const auto& [_, idx] : indices_) idx.serialize(bytes);
    write_file(dir / "indices.bin", std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } else {
    std::filesystem::remove(dir / "indices.bin");
  }
}

Database Database::open(const std::filesystem::path& dir) {
  Database db;
  db.catalog_ = load_metadata(read_file(dir / "metadata.json"));
  const std::string tables = read_file(dir / "tables.bin");
  if (tables.compare(0, kTablesMagic.size(), kTablesMagic) != 0)
    fail(Errc::VersionMismatch, "tables.bin has an unknown format");
  std::size_t pos = kTablesMagic.size();
  const std::uint64_t nt = get_u64(tables, pos);
  for (std::uint64_t i = 0; i < nt; ++i) {
    Table t;
    t.name = get_str(tables, pos);
    t.entity = get_u64(tables, pos) != 0;
    const std::uint64_t nc = get_u64(tables, pos);
    for (std::uint64_t c = 0; c < nc; ++c) {
      Column col;
      col.name = get_str(tables, pos);
      const std::uint64_t n = get_u64(tables, pos);
      if (pos + 4 * n > tables.size()) fail(Errc::CorruptMetadata, "table snapshot truncated");
      col.values.resize(n);
      std::memcpy(col.values.data(), tables.data() + pos, 4 * n);
      pos += 4 * n;
      t.columns.push_back(std::move(col));
    }
    db.tables_[t.name] = std::move(t);
  }
  if (std::filesystem::exists(dir / "indices.bin")) {
    const std::string raw = read_file(dir / "indices.bin");
    std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
    if (raw.compare(0, kIndicesMagic.size(), kIndicesMagic) != 0)
      fail(Errc::VersionMismatch, "indices.bin has an unknown format");
    std::size_t ip = kIndicesMagic.size();
    if (ip + 8 > raw.size()) fail(Errc::CorruptMetadata, "index snapshot truncated");
    std::uint64_t n = 0;
    for (int i = 0; i < 8; ++i) n |= std::uint64_t{bytes[ip + i]} << (8 * i);
    ip += 8;
    for (std::uint64_t i = 0; i < n; ++i) {
      FragmentIndex idx = FragmentIndex::deserialize(bytes, ip);
      const std::string key = idx.table() + "." + idx.key();
      db.indices_.emplace(key, std::move(idx));
    }
    db.built_ = true;
  }
  return db;
}

}  // namespace fragdb
