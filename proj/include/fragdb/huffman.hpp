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
#include <span>
#include <vector>

namespace fragdb {

// Canonical prefix code over the symbols that occur, decoded MSB-first through a
// table of width min(max length, 16) bits with chained subtables for longer codes.
class HuffmanBook {
 public:
  static constexpr unsigned kMaxRootBits = 16;

  // histogram[s] = occurrences of symbol s.
  static HuffmanBook build(std::span<const std::uint64_t> histogram);
  static HuffmanBook build_from_values(std::span<const std::uint32_t> values);
  // Parallel arrays: strictly increasing symbols and their code lengths.
  static HuffmanBook from_lengths(std::vector<std::uint32_t> symbols, std::vector<std::uint8_t> lengths);
  // Dense form: lengths[s] for s = 0..size-1, zero for unused symbols.
  static HuffmanBook from_lengths(const std::vector<std::uint8_t>& dense);

  const std::vector<std::uint32_t>& symbols() const { return symbols_; }
  const std::vector<std::uint8_t>& symbol_lengths() const { return lengths_; }
  std::vector<std::uint8_t> dense_lengths() const;

  unsigned length(std::uint32_t symbol) const {
    const std::int64_t i = position(symbol);
    return i < 0 ? 0 : lengths_[static_cast<std::size_t>(i)];
  }
  std::uint64_t code(std::uint32_t symbol) const { return codes_[static_cast<std::size_t>(position(symbol))]; }
  unsigned max_length() const { return max_length_; }
  unsigned root_bits() const { return root_bits_; }
  std::size_t table_entries() const { return table_.size(); }
  // Bytes to store the book: one length per domain value, or (symbol, length) pairs when sparse.
  std::uint64_t storage_bytes() const;

  // Sum of code lengths over values (unpadded bit count).
  std::uint64_t data_bits(std::span<const std::uint32_t> values) const;

  void encode(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out) const;
  void decode(std::span<const std::uint8_t> bytes, std::size_t n, std::uint32_t* out) const;

  bool operator==(const HuffmanBook& other) const {
    return symbols_ == other.symbols_ && lengths_ == other.lengths_;
  }

 private:
  struct Entry {
    std::uint32_t value;  // symbol, or subtable base for links
    std::uint8_t bits;    // bits consumed (leaf) or subtable width (link)
    std::uint8_t link;    // 1 when value points at a subtable
  };

  static HuffmanBook from_counts(std::vector<std::uint32_t> symbols, const std::vector<std::uint64_t>& counts);
  std::int64_t position(std::uint32_t symbol) const;
  void finish();
  void fill_table(std::size_t base, unsigned width, unsigned consumed,
                  std::span<const std::uint32_t> positions);

  std::vector<std::uint32_t> symbols_;
  std::vector<std::uint8_t> lengths_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::int32_t> dense_position_;  // symbol -> position, when the alphabet is small
  std::vector<Entry> table_;
  unsigned max_length_ = 0;
  unsigned root_bits_ = 0;
};

}  // namespace fragdb
