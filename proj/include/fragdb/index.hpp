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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fragdb/catalog.hpp"
#include "fragdb/codecs.hpp"

namespace fragdb {

struct FragmentRef {
  std::uint64_t offset = 0;
  std::uint64_t byte_len = 0;
  EncodingKind kind = EncodingKind::UA;
  std::string_view attribute;
};

// Bytes needed to store offsets up to and including `total`.
unsigned offset_width_for(std::uint64_t total);

struct IndexAttributeInput {
  std::string name;
  ColumnRole role = ColumnRole::Measure;
  std::span<const std::uint32_t> values;  // in table row order
  std::uint64_t domain = 1;
  EncodingKind kind = EncodingKind::UA;
};

struct IndexInput {
  std::string table;
  std::string key;
  std::span<const std::uint32_t> keys;  // in table row order
  std::uint32_t key_domain = 0;
  bool singleton = false;  // entity index: one row per key
  std::vector<IndexAttributeInput> attributes;
  // Attribute that orders rows inside a fragment (the other foreign key).
  std::optional<std::size_t> sort_attribute;
};

// Lookup table of (h+1) offset rows plus one encoded byte array per attribute,
// fragments of consecutive keys stored back to back.
class FragmentIndex {
 public:
  struct Attribute {
    std::string name;
    ColumnRole role = ColumnRole::Measure;
    Codec codec;
    std::vector<std::uint8_t> bytes;
    unsigned offset_width = 0;
    std::size_t lookup_offset = 0;  // byte position inside a lookup row
    bool operator==(const Attribute&) const = default;
  };

  static FragmentIndex build(const IndexInput& input);

  const std::string& table() const { return table_; }
  const std::string& key() const { return key_; }
  std::uint32_t key_domain() const { return key_domain_; }
  bool singleton() const { return singleton_; }
  std::uint64_t row_count() const { return rows_; }
  std::uint64_t max_fragment_size() const { return max_fragment_; }

  std::size_t attribute_count() const { return attrs_.size(); }
  const Attribute& attribute(std::size_t a) const { return attrs_[a]; }
  std::optional<std::size_t> find_attribute(std::string_view name) const;
  std::size_t require_attribute(std::string_view name) const;

  // Unchecked hot-path accessors (c <= h for offsets, c < h otherwise).
  std::uint64_t offset(std::size_t a, std::uint32_t c) const {
    return read_cell(c, attrs_[a].lookup_offset, attrs_[a].offset_width);
  }
  std::span<const std::uint8_t> fragment(std::size_t a, std::uint32_t c) const {
    const std::uint64_t begin = offset(a, c);
    const std::uint64_t end = offset(a, c + 1);
    return {attrs_[a].bytes.data() + begin, static_cast<std::size_t>(end - begin)};
  }
  std::size_t cardinality(std::uint32_t c) const;
  std::size_t decode(std::size_t a, std::uint32_t c, std::size_t n, std::uint32_t* out) const {
    return attrs_[a].codec.decode(fragment(a, c), n, out);
  }

  // Checked accessors.
  FragmentRef get_fragment(std::size_t a, std::uint32_t c) const;
  std::size_t read_fragment(std::size_t a, std::uint32_t c, std::span<std::uint32_t> scratch) const;
  std::vector<std::uint32_t> read_fragment(std::size_t a, std::uint32_t c) const;

  // How fragment cardinality is obtained when no attribute is cheaply countable.
  bool has_count_column() const { return count_width_ > 0; }
  std::optional<std::size_t> count_attribute() const { return count_attr_; }

  std::uint64_t lookup_bytes() const { return (std::uint64_t{key_domain_} + 1) * stride_; }
  std::uint64_t data_bytes() const;
  std::uint64_t book_bytes() const;
  std::uint64_t total_bytes() const { return lookup_bytes() + data_bytes() + book_bytes(); }

  void serialize(std::vector<std::uint8_t>& out) const;
  static FragmentIndex deserialize(std::span<const std::uint8_t> in, std::size_t& pos);

  bool operator==(const FragmentIndex&) const = default;

 private:
  std::uint64_t read_cell(std::uint32_t row, std::size_t at, unsigned width) const;

  std::string table_;
  std::string key_;
  std::uint32_t key_domain_ = 0;
  bool singleton_ = false;
  std::uint64_t rows_ = 0;
  std::uint64_t max_fragment_ = 0;
  std::vector<Attribute> attrs_;
  std::optional<std::size_t> count_attr_;
  std::size_t count_offset_ = 0;
  unsigned count_width_ = 0;
  std::size_t stride_ = 0;
  std::vector<std::uint8_t> lookup_;  // padded by 8 bytes for unaligned loads
};

}  // namespace fragdb
