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

#include "fragdb/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include "fragdb/error.hpp"
#include "json.hpp"

namespace fragdb {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct SchemaToken {
  enum Kind { Ident, Number, Punct, End } kind;
  std::string text;
  int line;
};

std::vector<SchemaToken> tokenize_schema(std::string_view text) {
  std::vector<SchemaToken> out;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      out.push_back({SchemaToken::Ident, std::string(text.substr(i, j - i)), line});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({SchemaToken::Number, std::string(text.substr(i, j - i)), line});
      i = j;
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({SchemaToken::Punct, "->", line});
      i += 2;
    } else if (c == '(' || c == ')' || c == ',' || c == ';') {
      out.push_back({SchemaToken::Punct, std::string(1, c), line});
      ++i;
    } else {
      fail(Errc::SyntaxError, "schema line " + std::to_string(line) + ": unexpected '" +
                                  std::string(1, c) + "'");
    }
  }
  out.push_back({SchemaToken::End, "", line});
  return out;
}

class SchemaParser {
 public:
  explicit SchemaParser(std::vector<SchemaToken> tokens) : toks_(std::move(tokens)) {}

  Schema parse() {
    Schema schema;
    while (peek().kind != SchemaToken::End) {
      if (is_punct(";")) {
        ++pos_;
        continue;
      }
      const std::string kw = lower(expect_ident("declaration keyword"));
      if (kw == "entity") {
        schema.entities.push_back(parse_entity());
      } else if (kw == "relationship") {
        schema.relationships.push_back(parse_relationship());
      } else {
        error("expected 'entity' or 'relationship', got '" + kw + "'");
      }
    }
    return schema;
  }

 private:
  const SchemaToken& peek() const { return toks_[pos_]; }
  bool is_punct(std::string_view p) const {
    return peek().kind == SchemaToken::Punct && peek().text == p;
  }
  bool is_keyword(std::string_view k) const {
    return peek().kind == SchemaToken::Ident && lower(peek().text) == k;
  }
  [[noreturn]] void error(const std::string& msg) const {
    fail(Errc::SyntaxError, "schema line " + std::to_string(peek().line) + ": " + msg);
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != SchemaToken::Ident) error(std::string("expected ") + what);
    return toks_[pos_++].text;
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) error("expected '" + std::string(p) + "'");
    ++pos_;
  }
  ValueKind parse_kind() {
    const std::string k = lower(expect_ident("attribute type"));
    if (k == "int") return ValueKind::Int;
    if (k == "string") return ValueKind::String;
    error("unknown attribute type '" + k + "'");
  }
  std::vector<std::string> parse_aliases() {
    std::vector<std::string> aliases;
    while (is_keyword("aka")) {
      ++pos_;
      aliases.push_back(expect_ident("alias"));
    }
    return aliases;
  }

  EntityDef parse_entity() {
    EntityDef e;
    e.name = expect_ident("entity name");
    e.aliases = parse_aliases();
    if (is_keyword("size")) {
      ++pos_;
      if (peek().kind != SchemaToken::Number) error("expected entity size");
      const unsigned long long v = std::stoull(toks_[pos_++].text);
      if (v > 0xffffffffull) error("entity size too large");
      e.declared_size = static_cast<std::uint32_t>(v);
    }
    if (is_punct("(")) {
      ++pos_;
      do {
        AttributeDef a;
        a.name = expect_ident("attribute name");
        a.kind = parse_kind();
        e.attributes.push_back(a);
      } while (is_punct(",") && (++pos_, true));
      expect_punct(")");
    }
    return e;
  }

  RelationshipDef parse_relationship() {
    RelationshipDef r;
    r.name = expect_ident("relationship name");
    r.aliases = parse_aliases();
    expect_punct("(");
    std::vector<ForeignKeyDef> fks;
    do {
      const std::string name = expect_ident("column name");
      if (is_punct("->")) {
        ++pos_;
        fks.push_back({name, expect_ident("referenced entity")});
      } else {
        r.measures.push_back({name, parse_kind()});
      }
    } while (is_punct(",") && (++pos_, true));
    expect_punct(")");
    if (fks.size() != 2)
      fail(Errc::NonBinaryRelationship, "relationship " + r.name + " declares " +
                                            std::to_string(fks.size()) + " foreign keys");
    r.fk1 = fks[0];
    r.fk2 = fks[1];
    return r;
  }

  std::vector<SchemaToken> toks_;
  std::size_t pos_ = 0;
};

void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  auto claim = [&](const std::string& n) {
    if (!names.insert(lower(n)).second) fail(Errc::DuplicateTableName, "table name '" + n + "' declared twice");
  };
  for (const auto& e : schema.entities) {
    claim(e.name);
    for (const auto& a : e.aliases) claim(a);
    std::set<std::string> attrs{"id"};
    for (const auto& a : e.attributes)
      if (!attrs.insert(lower(a.name)).second)
        fail(Errc::SyntaxError, "duplicate attribute " + e.name + "." + a.name);
  }
  for (const auto& r : schema.relationships) {
    claim(r.name);
    for (const auto& a : r.aliases) claim(a);
    std::set<std::string> attrs;
    for (const auto* fk : {&r.fk1, &r.fk2}) {
      if (!attrs.insert(lower(fk->name)).second)
        fail(Errc::SyntaxError, "duplicate attribute " + r.name + "." + fk->name);
      const bool known = std::any_of(schema.entities.begin(), schema.entities.end(),
                                     [&](const EntityDef& e) { return e.name == fk->entity; });
      if (!known)
        fail(Errc::UnknownEntityRef, r.name + "." + fk->name + " references undeclared entity '" +
                                         fk->entity + "'");
    }
    for (const auto& m : r.measures)
      if (!attrs.insert(lower(m.name)).second)
        fail(Errc::SyntaxError, "duplicate attribute " + r.name + "." + m.name);
  }
}

std::string kind_name(ValueKind k) { return k == ValueKind::Int ? "int" : "string"; }

}  // namespace

Schema parse_schema(std::string_view text) {
  Schema schema = SchemaParser(tokenize_schema(text)).parse();
  validate_schema(schema);
  return schema;
}

std::string format_schema(const Schema& schema) {
  std::string out;
  auto attrs = [](const std::vector<AttributeDef>& list, std::string& s) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) s += ", ";
      s += list[i].name + " " + kind_name(list[i].kind);
    }
  };
  for (const auto& e : schema.entities) {
    out += "entity " + e.name;
    for (const auto& a : e.aliases) out += " aka " + a;
    if (e.declared_size) out += " size " + std::to_string(*e.declared_size);
    if (!e.attributes.empty()) {
      out += " (";
      attrs(e.attributes, out);
      out += ")";
    }
    out += "\n";
  }
  for (const auto& r : schema.relationships) {
    out += "relationship " + r.name;
    for (const auto& a : r.aliases) out += " aka " + a;
    out += " (" + r.fk1.name + " -> " + r.fk1.entity + ", " + r.fk2.name + " -> " + r.fk2.entity;
    if (!r.measures.empty()) {
      out += ", ";
      attrs(r.measures, out);
    }
    out += ")\n";
  }
  return out;
}

std::uint32_t Dictionary::intern(std::string_view value) {
  auto it = forward_.find(std::string(value));
  if (it != forward_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(reverse_.size());
  forward_.emplace(std::string(value), id);
  reverse_.emplace_back(value);
  return id;
}

std::optional<std::uint32_t> Dictionary::find(std::string_view value) const {
  auto it = forward_.find(std::string(value));
  if (it == forward_.end()) return std::nullopt;
  return it->second;
}

double entropy_bits(std::span<const std::uint32_t> values) {
  if (values.empty()) return 0.0;
  std::vector<std::uint32_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(values.size());
  double e = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double p = static_cast<double>(j - i) / n;
    e -= p * std::log2(p);
    i = j;
  }
  return e <= 0.0 ? 0.0 : e;
}

ColumnStats column_stats(std::span<const std::uint32_t> keys, std::uint64_t key_domain,
                         std::span<const std::uint32_t> values, std::uint64_t domain) {
  if (keys.size() != values.size()) fail(Errc::Internal, "key/value length mismatch");
  if (values.empty()) fail(Errc::EmptyColumn, "column has no rows");
  ColumnStats s;
  s.domain_size = domain;
  s.row_count = values.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (keys[i] >= key_domain) fail(Errc::KeyOutOfDomain, "key outside its domain");
    rows[i] = {keys[i], values[i]};
  }
  std::sort(rows.begin(), rows.end());
  s.unique_in_fragments = true;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i + 1;
    while (j < rows.size() && rows[j].first == rows[i].first) {
      if (rows[j].second == rows[j - 1].second) s.unique_in_fragments = false;
      ++j;
    }
    ++s.distinct_fragments;
    s.max_fragment_size = std::max<std::uint64_t>(s.max_fragment_size, j - i);
    i = j;
  }
  s.avg_fragment_size = static_cast<double>(s.row_count) / static_cast<double>(s.distinct_fragments);
  s.entropy = entropy_bits(values);
  return s;
}

Catalog::Catalog(Schema schema) : schema_(std::move(schema)) {
  validate_schema(schema_);
  for (const auto& e : schema_.entities)
    if (e.declared_size) entity_sizes_[e.name] = *e.declared_size;
}

std::optional<std::string> Catalog::resolve_table(std::string_view name) const {
  const std::string key = lower(name);
  for (const auto& e : schema_.entities) {
    if (lower(e.name) == key) return e.name;
    for (const auto& a : e.aliases)
      if (lower(a) == key) return e.name;
  }
  for (const auto& r : schema_.relationships) {
    if (lower(r.name) == key) return r.name;
    for (const auto& a : r.aliases)
      if (lower(a) == key) return r.name;
  }
  return std::nullopt;
}

const EntityDef* Catalog::entity(std::string_view canonical) const {
  for (const auto& e : schema_.entities)
    if (e.name == canonical) return &e;
  return nullptr;
}

const RelationshipDef* Catalog::relationship(std::string_view canonical) const {
  for (const auto& r : schema_.relationships)
    if (r.name == canonical) return &r;
  return nullptr;
}

std::uint64_t Catalog::row_count(const std::string& table) const {
  auto it = row_counts_.find(table);
  if (it == row_counts_.end()) fail(Errc::NotLoaded, "table " + table + " not loaded");
  return it->second;
}

std::optional<std::uint32_t> Catalog::try_entity_size(const std::string& entity) const {
  auto it = entity_sizes_.find(entity);
  if (it == entity_sizes_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Catalog::entity_size(const std::string& entity) const {
  auto h = try_entity_size(entity);
  if (!h) fail(Errc::NotLoaded, "entity " + entity + " has no loaded key domain");
  return *h;
}

const Dictionary* Catalog::find_key_dictionary(const std::string& entity) const {
  auto it = key_dicts_.find(entity);
  return it == key_dicts_.end() ? nullptr : &it->second;
}

Dictionary& Catalog::value_dictionary(const std::string& table, const std::string& attr) {
  return value_dicts_[table + "." + attr];
}

const Dictionary* Catalog::find_value_dictionary(const std::string& table,
                                                 const std::string& attr) const {
  auto it = value_dicts_.find(table + "." + attr);
  return it == value_dicts_.end() ? nullptr : &it->second;
}

std::uint64_t Catalog::attribute_domain(const std::string& table, const std::string& attr) const {
  if (const auto* e = entity(table)) {
    if (attr == "ID") return entity_size(e->name);
  } else if (const auto* r = relationship(table)) {
    if (attr == r->fk1.name) return entity_size(r->fk1.entity);
    if (attr == r->fk2.name) return entity_size(r->fk2.entity);
  } else {
    fail(Errc::UnknownTable, "unknown table " + table);
  }
  auto it = measure_domains_.find(table + "." + attr);
  if (it == measure_domains_.end())
    fail(Errc::NotLoaded, "no domain recorded for " + table + "." + attr);
  return it->second;
}

void Catalog::set_measure_domain(const std::string& table, const std::string& attr,
                                 std::uint64_t d) {
  measure_domains_[table + "." + attr] = d;
}

const ColumnMeta* Catalog::column(std::string_view table, std::string_view key,
                                  std::string_view attribute) const {
  for (const auto& c : columns_)
    if (c.table == table && c.key == key && c.attribute == attribute) return &c;
  return nullptr;
}

bool Catalog::has_index(std::string_view table, std::string_view key) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const ColumnMeta& c) { return c.table == table && c.key == key; });
}

// ---- metadata persistence ----

namespace {

using nlohmann::json;

json attrs_to_json(const std::vector<AttributeDef>& attrs) {
  json out = json::array();
  for (const auto& a : attrs) out.push_back({{"name", a.name}, {"kind", kind_name(a.kind)}});
  return out;
}

std::vector<AttributeDef> attrs_from_json(const json& j) {
  std::vector<AttributeDef> out;
  for (const auto& a : j) {
    const std::string kind = a.at("kind").get<std::string>();
    if (kind != "int" && kind != "string") fail(Errc::CorruptMetadata, "bad attribute kind " + kind);
    out.push_back({a.at("name").get<std::string>(), kind == "int" ? ValueKind::Int : ValueKind::String});
  }
  return out;
}

json stats_to_json(const ColumnStats& s) {
  return {{"D", s.domain_size},
          {"rows", s.row_count},
          {"fragments", s.distinct_fragments},
          {"avg_fragment", s.avg_fragment_size},
          {"max_fragment", s.max_fragment_size},
          {"entropy", s.entropy},
          {"unique", s.unique_in_fragments}};
}

ColumnStats stats_from_json(const json& j) {
  ColumnStats s;
  s.domain_size = j.at("D").get<std::uint64_t>();
  s.row_count = j.at("rows").get<std::uint64_t>();
  s.distinct_fragments = j.at("fragments").get<std::uint64_t>();
  s.avg_fragment_size = j.at("avg_fragment").get<double>();
  s.max_fragment_size = j.at("max_fragment").get<std::uint64_t>();
  s.entropy = j.at("entropy").get<double>();
  s.unique_in_fragments = j.at("unique").get<bool>();
  return s;
}

}  // namespace

std::string persist_metadata(const Catalog& c) {
  json schema = {{"entities", json::array()}, {"relationships", json::array()}};
  for (const auto& e : c.schema_.entities) {
    json je = {{"name", e.name}, {"aliases", e.aliases}, {"attributes", attrs_to_json(e.attributes)}};
    if (e.declared_size) je["size"] = *e.declared_size;
    schema["entities"].push_back(je);
  }
  for (const auto& r : c.schema_.relationships) {
    schema["relationships"].push_back(
        {{"name", r.name},
         {"aliases", r.aliases},
         {"fk1", {{"name", r.fk1.name}, {"entity", r.fk1.entity}}},
         {"fk2", {{"name", r.fk2.name}, {"entity", r.fk2.entity}}},
         {"measures", attrs_to_json(r.measures)}});
  }
  json dicts = json::object();
  for (const auto& [k, d] : c.key_dicts_) dicts[k] = d.values();
  json vdicts = json::object();
  for (const auto& [k, d] : c.value_dicts_) vdicts[k] = d.values();
  json cols = json::array();
  for (const auto& m : c.columns_) {
    cols.push_back({{"table", m.table},
                    {"key", m.key},
                    {"attribute", m.attribute},
                    {"role", m.role == ColumnRole::ForeignKey ? "fk" : "measure"},
                    {"encoding", encoding_name(m.encoding)},
                    {"offset_width", m.offset_width},
                    {"bytes", m.byte_size},
                    {"stats", stats_to_json(m.stats)}});
  }
  json root = {{"version", kMetadataVersion},
               {"schema", schema},
               {"entity_sizes", c.entity_sizes_},
               {"row_counts", c.row_counts_},
               {"measure_domains", c.measure_domains_},
               {"key_dictionaries", dicts},
               {"value_dictionaries", vdicts},
               {"columns", cols}};
  return root.dump(1) + "\n";
}

Catalog load_metadata(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::CorruptMetadata, std::string("metadata does not parse: ") + e.what());
  }
  try {
    if (!root.is_object() || !root.contains("version"))
      fail(Errc::CorruptMetadata, "metadata lacks a version");
    const std::string version = root.at("version").get<std::string>();
    if (version != kMetadataVersion)
      fail(Errc::VersionMismatch, "metadata version " + version + ", expected " +
                                      std::string(kMetadataVersion));
    Schema schema;
    for (const auto& je : root.at("schema").at("entities")) {
      EntityDef e;
      e.name = je.at("name").get<std::string>();
      e.aliases = je.at("aliases").get<std::vector<std::string>>();
      e.attributes = attrs_from_json(je.at("attributes"));
      if (je.contains("size")) e.declared_size = je.at("size").get<std::uint32_t>();
      schema.entities.push_back(std::move(e));
    }
    for (const auto& jr : root.at("schema").at("relationships")) {
      RelationshipDef r;
      r.name = jr.at("name").get<std::string>();
      r.aliases = jr.at("aliases").get<std::vector<std::string>>();
      r.fk1 = {jr.at("fk1").at("name").get<std::string>(), jr.at("fk1").at("entity").get<std::string>()};
      r.fk2 = {jr.at("fk2").at("name").get<std::string>(), jr.at("fk2").at("entity").get<std::string>()};
      r.measures = attrs_from_json(jr.at("measures"));
      schema.relationships.push_back(std::move(r));
    }
    Catalog c(std::move(schema));
    c.entity_sizes_ = root.at("entity_sizes").get<std::map<std::string, std::uint32_t>>();
    c.row_counts_ = root.at("row_counts").get<std::map<std::string, std::uint64_t>>();
    c.measure_domains_ = root.at("measure_domains").get<std::map<std::string, std::uint64_t>>();
    for (const auto& [k, v] : root.at("key_dictionaries").items())
      for (const auto& s : v) c.key_dicts_[k].intern(s.get<std::string>());
    for (const auto& [k, v] : root.at("value_dictionaries").items())
      for (const auto& s : v) c.value_dicts_[k].intern(s.get<std::string>());
    for (const auto& jc : root.at("columns")) {
      ColumnMeta m;
      m.table = jc.at("table").get<std::string>();
      m.key = jc.at("key").get<std::string>();
      m.attribute = jc.at("attribute").get<std::string>();
      const std::string role = jc.at("role").get<std::string>();
      if (role != "fk" && role != "measure") fail(Errc::CorruptMetadata, "bad column role " + role);
      m.role = role == "fk" ? ColumnRole::ForeignKey : ColumnRole::Measure;
      auto kind = parse_encoding(jc.at("encoding").get<std::string>());
      if (!kind) fail(Errc::CorruptMetadata, "unknown encoding kind");
      m.encoding = *kind;
      m.offset_width = jc.at("offset_width").get<unsigned>();
      m.byte_size = jc.at("bytes").get<std::uint64_t>();
      m.stats = stats_from_json(jc.at("stats"));
      c.columns_.push_back(std::move(m));
    }
    return c;
  } catch (const json::exception& e) {
    fail(Errc::CorruptMetadata, std::string("metadata malformed: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::VersionMismatch || e.code() == Errc::CorruptMetadata) throw;
    fail(Errc::CorruptMetadata, e.what());
  }
}

}  // namespace fragdb
