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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fragdb/catalog.hpp"
#include "fragdb/index.hpp"

namespace fragdb {

struct Column {
  std::string name;
  std::vector<std::uint32_t> values;
  bool operator==(const Column&) const = default;
};

// Dense in-memory table. Entities hold "ID" (0..h-1) first, then attributes;
// relationships hold fk1, fk2, then measures.
struct Table {
  std::string name;
  bool entity = false;
  std::vector<Column> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].values.size(); }
  const Column* find(std::string_view column) const;
  const Column& column(std::string_view column) const;
  bool operator==(const Table&) const = default;
};

enum class EncodingPolicy { Chosen, AllUA };

// Per-column overrides, keyed "Table.Key.Attribute".
using EncodingOverrides = std::map<std::string, EncodingKind>;

class Database {
 public:
  Database() = default;
  explicit Database(Catalog catalog);
  static Database from_schema(std::string_view schema_text);

  Catalog& catalog() { return catalog_; }
  const Catalog& catalog() const { return catalog_; }

  // Ingests one table; returns its row count.
  std::uint64_t load_csv(std::string_view table_name, std::string_view csv_text);

  bool has_table(const std::string& canonical) const { return tables_.count(canonical) != 0; }
  const Table& table(const std::string& canonical) const;
  const std::map<std::string, Table>& tables() const { return tables_; }

  // Stats of an attribute with fragments grouped by `key`.
  ColumnStats compute_stats(const std::string& table, const std::string& key,
                            const std::string& attribute) const;

  // Builds both relationship indices per table and one ID index per entity with
  // attributes, recording encodings and stats in the catalog.
  void build_indices(EncodingPolicy policy = EncodingPolicy::Chosen,
                     const EncodingOverrides& overrides = {});
  bool indexed() const { return !indices_.empty() || built_; }

  const FragmentIndex* find_index(std::string_view table, std::string_view key) const;
  const FragmentIndex& index(std::string_view table, std::string_view key) const;
  const std::map<std::string, FragmentIndex>& indices() const { return indices_; }
  std::uint64_t index_bytes() const;

  // Directory layout: metadata.json, tables.bin, indices.bin.
  void save(const std::filesystem::path& dir) const;
  static Database open(const std::filesystem::path& dir);

 private:
  void ensure_declared_entities();

  Catalog catalog_;
  std::map<std::string, Table> tables_;
  std::map<std::string, FragmentIndex> indices_;  // "Table.Key"
  bool built_ = false;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace fragdb
