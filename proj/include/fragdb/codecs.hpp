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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fragdb {

class HuffmanBook;

enum class EncodingKind : std::uint8_t { UA, BCA, BB, HUF, UB };

inline constexpr std::array<EncodingKind, 5> kAllEncodings = {
    EncodingKind::UA, EncodingKind::BCA, EncodingKind::BB, EncodingKind::HUF, EncodingKind::UB};

std::string_view encoding_name(EncodingKind kind);
std::optional<EncodingKind> parse_encoding(std::string_view name);

// Bitmap kinds need strictly increasing values.
constexpr bool is_bitmap(EncodingKind kind) {
  return kind == EncodingKind::BB || kind == EncodingKind::UB;
}

// Bits per value for BCA; at least one so a single-value domain still occupies space.
unsigned bca_width(std::uint64_t domain);

// Raw codec entry points. Decoders write into caller storage and never read
// past the given byte span.
void encode_ua(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out);
std::size_t decode_ua(std::span<const std::uint8_t> bytes, std::uint32_t* out);

void encode_bca(std::span<const std::uint32_t> values, unsigned width,
                std::vector<std::uint8_t>& out);
std::size_t decode_bca(std::span<const std::uint8_t> bytes, unsigned width, std::size_t n,
                       std::uint32_t* out);

void encode_bb(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out);
std::size_t decode_bb(std::span<const std::uint8_t> bytes, std::uint32_t* out);
std::size_t bb_count(std::span<const std::uint8_t> bytes);

void encode_ub(std::span<const std::uint32_t> values, std::uint64_t domain,
               std::vector<std::uint8_t>& out);
std::size_t decode_ub(std::span<const std::uint8_t> bytes, std::uint32_t* out);
std::size_t ub_count(std::span<const std::uint8_t> bytes);

// Per-column codec: kind plus the parameters needed to decode any fragment.
class Codec {
 public:
  Codec() = default;
  static Codec make(EncodingKind kind, std::uint64_t domain,
                    std::shared_ptr<const HuffmanBook> book = nullptr);

  EncodingKind kind() const { return kind_; }
  std::uint64_t domain() const { return domain_; }
  unsigned width() const { return width_; }
  const HuffmanBook* book() const { return book_.get(); }
  const std::shared_ptr<const HuffmanBook>& shared_book() const { return book_; }

  // Validates domain and, for bitmaps, strict monotonicity; appends to out.
  void encode(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out) const;

  // Fragment cardinality is recoverable from the bytes alone.
  bool self_delimiting() const;
  std::size_t count(std::span<const std::uint8_t> bytes) const;

  // n is the fragment cardinality (ignored by self-delimiting kinds). Returns n.
  std::size_t decode(std::span<const std::uint8_t> bytes, std::size_t n,
                     std::uint32_t* out) const;
  // Checked variant: ScratchOverflow when the fragment does not fit.
  std::size_t decode_checked(std::span<const std::uint8_t> bytes, std::size_t n,
                             std::span<std::uint32_t> out) const;

  bool operator==(const Codec& other) const;

 private:
  EncodingKind kind_ = EncodingKind::UA;
  std::uint64_t domain_ = 1;
  unsigned width_ = 32;
  std::shared_ptr<const HuffmanBook> book_;
};

// Convenience wrappers used by tests and tools. HUF needs a book.
std::vector<std::uint8_t> encode(EncodingKind kind, std::span<const std::uint32_t> values,
                                 std::uint64_t domain, const HuffmanBook* book = nullptr);
std::vector<std::uint32_t> decode(EncodingKind kind, std::span<const std::uint8_t> bytes,
                                  std::uint64_t domain, std::optional<std::size_t> n = {},
                                  const HuffmanBook* book = nullptr);

// Intersection computed on the encoded gap streams; output is canonical BB.
std::vector<std::uint8_t> intersect_bb(std::span<const std::uint8_t> a,
                                       std::span<const std::uint8_t> b);
std::vector<std::uint8_t> intersect_bb(std::span<const std::span<const std::uint8_t>> inputs);
// Checks that both sides are BB over the same domain (MixedEncodings otherwise).
std::vector<std::uint8_t> intersect_bb(const Codec& ca, std::span<const std::uint8_t> a,
                                       const Codec& cb, std::span<const std::uint8_t> b);
// Same, but decodes the intersection straight into out. Returns its size.
std::size_t intersect_bb_decode(std::span<const std::span<const std::uint8_t>> inputs,
                                std::uint32_t* out);

}  // namespace fragdb
