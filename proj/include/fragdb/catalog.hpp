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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fragdb/codecs.hpp"

namespace fragdb {

enum class ValueKind : std::uint8_t { Int, String };

struct AttributeDef {
  std::string name;
  ValueKind kind = ValueKind::Int;
  bool operator==(const AttributeDef&) const = default;
};

struct EntityDef {
  std::string name;
  std::vector<std::string> aliases;
  std::vector<AttributeDef> attributes;
  // Declared entities use identity keys 0..size-1 and need no key dictionary.
  std::optional<std::uint32_t> declared_size;
  bool operator==(const EntityDef&) const = default;
};

struct ForeignKeyDef {
  std::string name;
  std::string entity;
  bool operator==(const ForeignKeyDef&) const = default;
};

struct RelationshipDef {
  std::string name;
  std::vector<std::string> aliases;
  ForeignKeyDef fk1;
  ForeignKeyDef fk2;
  std::vector<AttributeDef> measures;
  bool operator==(const RelationshipDef&) const = default;
};

struct Schema {
  std::vector<EntityDef> entities;
  std::vector<RelationshipDef> relationships;
  bool operator==(const Schema&) const = default;
};

// Text format, one declaration per statement:
//   entity Doc aka Document size 1000 (Year int)
//   relationship DT (Doc -> Doc, Term -> Term, Fre int)
// '#' starts a comment that runs to the end of the line.
Schema parse_schema(std::string_view text);
std::string format_schema(const Schema& schema);

class Dictionary {
 public:
  std::uint32_t intern(std::string_view value);
  std::optional<std::uint32_t> find(std::string_view value) const;
  const std::string& decode(std::uint32_t id) const { return reverse_.at(id); }
  std::size_t size() const { return reverse_.size(); }
  const std::vector<std::string>& values() const { return reverse_; }

  bool operator==(const Dictionary& other) const { return reverse_ == other.reverse_; }

 private:
  std::unordered_map<std::string, std::uint32_t> forward_;
  std::vector<std::string> reverse_;
};

struct ColumnStats {
  std::uint64_t domain_size = 0;
  std::uint64_t row_count = 0;
  std::uint64_t distinct_fragments = 0;
  double avg_fragment_size = 0.0;
  std::uint64_t max_fragment_size = 0;
  double entropy = 0.0;
  // Every fragment holds strictly increasing values (duplicates absent).
  bool unique_in_fragments = false;
  bool operator==(const ColumnStats&) const = default;
};

double entropy_bits(std::span<const std::uint32_t> values);

// Statistics of `values` grouped into fragments by `keys` (same length).
ColumnStats column_stats(std::span<const std::uint32_t> keys, std::uint64_t key_domain,
                         std::span<const std::uint32_t> values, std::uint64_t domain);

enum class ColumnRole : std::uint8_t { ForeignKey, Measure };

// Encoding metadata for one attribute inside one fragment index.
struct ColumnMeta {
  std::string table;
  std::string key;
  std::string attribute;
  ColumnRole role = ColumnRole::Measure;
  EncodingKind encoding = EncodingKind::UA;
  unsigned offset_width = 0;
  std::uint64_t byte_size = 0;
  ColumnStats stats;
  bool operator==(const ColumnMeta&) const = default;
};

class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(Schema schema);

  const Schema& schema() const { return schema_; }

  // Case-insensitive, alias-aware; returns the canonical name.
  std::optional<std::string> resolve_table(std::string_view name) const;
  const EntityDef* entity(std::string_view canonical) const;
  const RelationshipDef* relationship(std::string_view canonical) const;

  bool loaded(const std::string& table) const { return row_counts_.count(table) != 0; }
  std::uint64_t row_count(const std::string& table) const;
  void set_row_count(const std::string& table, std::uint64_t rows) { row_counts_[table] = rows; }

  // h for entities; fails with NotLoaded before the entity has a known size.
  std::uint32_t entity_size(const std::string& entity) const;
  std::optional<std::uint32_t> try_entity_size(const std::string& entity) const;
  void set_entity_size(const std::string& entity, std::uint32_t h) { entity_sizes_[entity] = h; }

  Dictionary& key_dictionary(const std::string& entity) { return key_dicts_[entity]; }
  const Dictionary* find_key_dictionary(const std::string& entity) const;
  Dictionary& value_dictionary(const std::string& table, const std::string& attr);
  const Dictionary* find_value_dictionary(const std::string& table, const std::string& attr) const;

  // Value domain D of a non-key attribute, or of a foreign key (the referenced h).
  std::uint64_t attribute_domain(const std::string& table, const std::string& attr) const;
  void set_measure_domain(const std::string& table, const std::string& attr, std::uint64_t d);

  std::vector<ColumnMeta>& columns() { return columns_; }
  const std::vector<ColumnMeta>& columns() const { return columns_; }
  const ColumnMeta* column(std::string_view table, std::string_view key,
                           std::string_view attribute) const;
  bool has_index(std::string_view table, std::string_view key) const;

  bool operator==(const Catalog&) const = default;

 private:
  friend std::string persist_metadata(const Catalog&);
  friend Catalog load_metadata(std::string_view);

  Schema schema_;
  std::map<std::string, std::uint32_t> entity_sizes_;
  std::map<std::string, std::uint64_t> row_counts_;
  std::map<std::string, std::uint64_t> measure_domains_;
  std::map<std::string, Dictionary> key_dicts_;
  std::map<std::string, Dictionary> value_dicts_;
  std::vector<ColumnMeta> columns_;
};

inline constexpr std::string_view kMetadataVersion = "fragdb-metadata/1";

std::string persist_metadata(const Catalog& catalog);
Catalog load_metadata(std::string_view text);

}  // namespace fragdb
