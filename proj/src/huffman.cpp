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

#include "fragdb/huffman.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>
#include <queue>
#include <tuple>

#include "fragdb/error.hpp"

namespace fragdb {
namespace {

// Reads `width` (<= 57) bits MSB-first starting at bit `pos`; bits past the end read as 0.
inline std::uint64_t peek_bits(const std::uint8_t* data, std::size_t size, std::uint64_t pos,
                               unsigned width) {
  const std::size_t byte = pos >> 3;
  std::uint64_t x = 0;
  if (byte + 8 <= size) {
    std::memcpy(&x, data + byte, 8);
    if constexpr (std::endian::native == std::endian::little) x = __builtin_bswap64(x);
  } else {
    for (std::size_t i = 0; i < 8; ++i) {
      x <<= 8;
      if (byte + i < size) x |= data[byte + i];
    }
  }
  x <<= (pos & 7);
  return x >> (64 - width);
}

class MsbBitWriter {
 public:
  explicit MsbBitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t code, unsigned len) {
    while (len > 32) {
      len -= 32;
      put32(static_cast<std::uint32_t>(code >> len), 32);
    }
    put32(static_cast<std::uint32_t>(code & ((std::uint64_t{1} << len) - 1)), len);
  }

  void finish() {
    if (fill_ > 0) out_.push_back(static_cast<std::uint8_t>(acc_ << (8 - fill_)));
    fill_ = 0;
    acc_ = 0;
  }

 private:
  void put32(std::uint32_t bits, unsigned len) {
    acc_ = (acc_ << len) | bits;
    fill_ += len;
    while (fill_ >= 8) {
      fill_ -= 8;
      out_.push_back(static_cast<std::uint8_t>(acc_ >> fill_));
    }
    acc_ &= (std::uint64_t{1} << fill_) - 1;
  }

  std::vector<std::uint8_t>& out_;
  std::uint64_t acc_ = 0;
  unsigned fill_ = 0;
};

}  // namespace

HuffmanBook HuffmanBook::build(std::span<const std::uint64_t> histogram) {
  std::vector<std::uint32_t> symbols;
  std::vector<std::uint64_t> counts;
  for (std::size_t s = 0; s < histogram.size(); ++s)
    if (histogram[s] > 0) {
      symbols.push_back(static_cast<std::uint32_t>(s));
      counts.push_back(histogram[s]);
    }
  return from_counts(std::move(symbols), counts);
}

HuffmanBook HuffmanBook::build_from_values(std::span<const std::uint32_t> values) {
  std::vector<std::uint32_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint32_t> symbols;
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    symbols.push_back(sorted[i]);
    counts.push_back(j - i);
    i = j;
  }
  return from_counts(std::move(symbols), counts);
}

HuffmanBook HuffmanBook::from_counts(std::vector<std::uint32_t> symbols,
                                     const std::vector<std::uint64_t>& counts) {
  if (symbols.empty()) fail(Errc::EmptyHistogram, "histogram has no occurrences");
  const std::size_t k = symbols.size();
  std::vector<std::uint8_t> lengths(k, 1);
  if (k > 1) {
    // Node ids: leaves 0..k-1 in symbol order, internal nodes after. Ties break on id.
    std::vector<std::size_t> parent(2 * k - 1, 0);
    using Item = std::pair<std::uint64_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t i = 0; i < k; ++i) heap.emplace(counts[i], i);
    std::size_t next = k;
    while (heap.size() > 1) {
      auto [wa, a] = heap.top();
      heap.pop();
      auto [wb, b] = heap.top();
      heap.pop();
      parent[a] = next;
      parent[b] = next;
      heap.emplace(wa + wb, next);
      ++next;
    }
    const std::size_t root = next - 1;
    std::vector<std::uint8_t> depth(2 * k - 1, 0);
    for (std::size_t n = root; n-- > 0;) {
      const unsigned d = depth[parent[n]] + 1u;
      if (d > 64) fail(Errc::Internal, "huffman code longer than 64 bits");
      depth[n] = static_cast<std::uint8_t>(d);
    }
    for (std::size_t i = 0; i < k; ++i) lengths[i] = depth[i];
  }
  return from_lengths(std::move(symbols), std::move(lengths));
}

HuffmanBook HuffmanBook::from_lengths(const std::vector<std::uint8_t>& dense) {
  std::vector<std::uint32_t> symbols;
  std::vector<std::uint8_t> lengths;
  for (std::size_t s = 0; s < dense.size(); ++s)
    if (dense[s]) {
      symbols.push_back(static_cast<std::uint32_t>(s));
      lengths.push_back(dense[s]);
    }
  return from_lengths(std::move(symbols), std::move(lengths));
}

HuffmanBook HuffmanBook::from_lengths(std::vector<std::uint32_t> symbols,
                                      std::vector<std::uint8_t> lengths) {
  if (symbols.size() != lengths.size()) fail(Errc::CorruptMetadata, "huffman symbol/length mismatch");
  if (symbols.empty()) fail(Errc::EmptyHistogram, "huffman book has no symbols");
  HuffmanBook book;
  book.symbols_ = std::move(symbols);
  book.lengths_ = std::move(lengths);
  for (std::size_t i = 0; i < book.lengths_.size(); ++i) {
    if (book.lengths_[i] == 0 || book.lengths_[i] > 64) fail(Errc::CorruptMetadata, "huffman length out of range");
    if (i > 0 && book.symbols_[i] <= book.symbols_[i - 1]) fail(Errc::CorruptMetadata, "huffman symbols not sorted");
    book.max_length_ = std::max<unsigned>(book.max_length_, book.lengths_[i]);
  }
  book.finish();
  return book;
}

std::vector<std::uint8_t> HuffmanBook::dense_lengths() const {
  std::vector<std::uint8_t> out(std::size_t{symbols_.back()} + 1, 0);
  for (std::size_t i = 0; i < symbols_.size(); ++i) out[symbols_[i]] = lengths_[i];
  return out;
}

std::uint64_t HuffmanBook::storage_bytes() const {
  const std::uint64_t dense = std::uint64_t{symbols_.back()} + 1;
  return std::min<std::uint64_t>(dense, 5 * symbols_.size());
}

std::int64_t HuffmanBook::position(std::uint32_t symbol) const {
  if (!dense_position_.empty()) return symbol < dense_position_.size() ? dense_position_[symbol] : -1;
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
  if (it == symbols_.end() || *it != symbol) return -1;
  return it - symbols_.begin();
}

void HuffmanBook::finish() {
  const std::size_t k = symbols_.size();
  const std::uint64_t span = std::uint64_t{symbols_.back()} + 1;
  if (span <= std::max<std::uint64_t>(1u << 16, 8 * k)) {
    dense_position_.assign(span, -1);
    for (std::size_t i = 0; i < k; ++i) dense_position_[symbols_[i]] = static_cast<std::int32_t>(i);
  }

  // Canonical codes: ordered by (length, symbol).
  codes_.assign(k, 0);
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return lengths_[a] < lengths_[b]; });
  std::uint64_t code = 0;
  unsigned prev = lengths_[order.front()];
  for (std::size_t i = 0; i < k; ++i) {
    const unsigned len = lengths_[order[i]];
    if (i > 0) {
      if (code == ~std::uint64_t{0}) fail(Errc::CorruptMetadata, "lengths violate Kraft inequality");
      ++code;
      code <<= (len - prev);
    }
    if (len < 64 && (code >> len) != 0) fail(Errc::CorruptMetadata, "lengths violate Kraft inequality");
    codes_[order[i]] = code;
    prev = len;
  }

  root_bits_ = std::min(max_length_, kMaxRootBits);
  table_.assign(std::size_t{1} << root_bits_, Entry{0, 0, 0});
  std::vector<std::uint32_t> all(k);
  std::iota(all.begin(), all.end(), 0u);
  fill_table(0, root_bits_, 0, all);
}

void HuffmanBook::fill_table(std::size_t base, unsigned width, unsigned consumed,
                             std::span<const std::uint32_t> positions) {
  // Codes longer than this level are grouped by their next `width` bits.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> longer;
  for (auto p : positions) {
    const unsigned rest = lengths_[p] - consumed;
    const std::uint64_t code = codes_[p];
    if (rest <= width) {
      const std::uint64_t suffix = rest == 64 ? code : code & ((std::uint64_t{1} << rest) - 1);
      const std::size_t start = static_cast<std::size_t>(suffix << (width - rest));
      const std::size_t count = std::size_t{1} << (width - rest);
      for (std::size_t i = 0; i < count; ++i)
        table_[base + start + i] = Entry{symbols_[p], static_cast<std::uint8_t>(rest), 0};
    } else {
      const std::uint64_t prefix = (code >> (rest - width)) & ((std::uint64_t{1} << width) - 1);
      longer.emplace_back(prefix, p);
    }
  }
  std::stable_sort(longer.begin(), longer.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < longer.size();) {
    std::size_t j = i;
    unsigned deepest = 0;
    std::vector<std::uint32_t> group;
    while (j < longer.size() && longer[j].first == longer[i].first) {
      group.push_back(longer[j].second);
      deepest = std::max<unsigned>(deepest, lengths_[longer[j].second]);
      ++j;
    }
    const unsigned sub_width = std::min(deepest - consumed - width, kMaxRootBits);
    const std::size_t sub_base = table_.size();
    table_.resize(sub_base + (std::size_t{1} << sub_width), Entry{0, 0, 0});
    table_[base + longer[i].first] =
        Entry{static_cast<std::uint32_t>(sub_base), static_cast<std::uint8_t>(sub_width), 1};
    fill_table(sub_base, sub_width, consumed + width, group);
    i = j;
  }
}

std::uint64_t HuffmanBook::data_bits(std::span<const std::uint32_t> values) const {
  std::uint64_t bits = 0;
  for (auto v : values) bits += length(v);
  return bits;
}

void HuffmanBook::encode(std::span<const std::uint32_t> values,
                         std::vector<std::uint8_t>& out) const {
  MsbBitWriter writer(out);
  for (auto v : values) {
    const std::int64_t p = position(v);
    if (p < 0) fail(Errc::ValueOutOfDomain, "symbol " + std::to_string(v) + " not in huffman book");
    writer.put(codes_[static_cast<std::size_t>(p)], lengths_[static_cast<std::size_t>(p)]);
  }
  writer.finish();
}

void HuffmanBook::decode(std::span<const std::uint8_t> bytes, std::size_t n,
                         std::uint32_t* out) const {
  const std::uint8_t* data = bytes.data();
  const std::size_t size = bytes.size();
  const Entry* table = table_.data();
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t base = 0;
    unsigned width = root_bits_;
    for (;;) {
      const Entry e = table[base + peek_bits(data, size, pos, width)];
      if (!e.link) {
        if (e.bits == 0) fail(Errc::Internal, "invalid huffman code in fragment");
        out[i] = e.value;
        pos += e.bits;
        break;
      }
      pos += width;
      base = e.value;
      width = e.bits;
    }
  }
}

}  // namespace fragdb
