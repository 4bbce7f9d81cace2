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

#include "fragdb/codecs.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "fragdb/error.hpp"
#include "fragdb/huffman.hpp"

namespace fragdb {
namespace {

inline std::uint64_t load_le64(const std::uint8_t* data, std::size_t size, std::size_t byte) {
  std::uint64_t x = 0;
  if (byte + 8 <= size) {
    std::memcpy(&x, data + byte, 8);
    if constexpr (std::endian::native == std::endian::big) x = __builtin_bswap64(x);
    return x;
  }
  for (std::size_t i = 0; byte + i < size && i < 8; ++i)
    x |= std::uint64_t{data[byte + i]} << (8 * i);
  return x;
}

inline void put_varint(std::uint64_t gap, std::vector<std::uint8_t>& out) {
  while (gap >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(0x80 | (gap & 0x7f)));
    gap >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(gap));
}

// Cursor over a BB gap stream yielding absolute positions.
struct BbCursor {
  const std::uint8_t* p;
  const std::uint8_t* end;
  std::int64_t value = -1;

  bool next() {
    if (p == end) return false;
    std::uint64_t gap = 0;
    unsigned shift = 0;
    std::uint8_t b;
    do {
      b = *p++;
      gap |= std::uint64_t{b & 0x7fu} << shift;
      shift += 7;
    } while ((b & 0x80) && p != end);
    value += static_cast<std::int64_t>(gap) + 1;
    return true;
  }
};

void check_domain(std::span<const std::uint32_t> values, std::uint64_t domain) {
  for (auto v : values)
    if (v >= domain)
      fail(Errc::ValueOutOfDomain,
           "value " + std::to_string(v) + " outside domain " + std::to_string(domain));
}

void check_increasing(std::span<const std::uint32_t> values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      fail(Errc::NonMonotonicBitmapInput,
           "bitmap input not strictly increasing at position " + std::to_string(i));
}

}  // namespace

std::string_view encoding_name(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::UA: return "UA";
    case EncodingKind::BCA: return "BCA";
    case EncodingKind::BB: return "BB";
    case EncodingKind::HUF: return "HUF";
    case EncodingKind::UB: return "UB";
  }
  return "?";
}

std::optional<EncodingKind> parse_encoding(std::string_view name) {
  for (auto k : kAllEncodings)
    if (encoding_name(k) == name) return k;
  return std::nullopt;
}

unsigned bca_width(std::uint64_t domain) {
  unsigned w = domain <= 1 ? 0 : static_cast<unsigned>(std::bit_width(domain - 1));
  return std::max(w, 1u);
}

void encode_ua(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out) {
  const std::size_t at = out.size();
  out.resize(at + 4 * values.size());
  std::uint8_t* p = out.data() + at;
  for (auto v : values) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
    p += 4;
  }
}

std::size_t decode_ua(std::span<const std::uint8_t> bytes, std::uint32_t* out) {
  const std::size_t n = bytes.size() / 4;
  if constexpr (std::endian::native == std::endian::little) {
    if (n) std::memcpy(out, bytes.data(), 4 * n);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t* p = bytes.data() + 4 * i;
      out[i] = p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t{p[3]} << 24);
    }
  }
  return n;
}

void encode_bca(std::span<const std::uint32_t> values, unsigned width,
                std::vector<std::uint8_t>& out) {
  std::uint64_t acc = 0;
  unsigned fill = 0;
  for (auto v : values) {
    acc |= std::uint64_t{v} << fill;
    fill += width;
    while (fill >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc));
      acc >>= 8;
      fill -= 8;
    }
  }
  if (fill > 0) out.push_back(static_cast<std::uint8_t>(acc));
}

std::size_t decode_bca(std::span<const std::uint8_t> bytes, unsigned width, std::size_t n,
                       std::uint32_t* out) {
  const std::uint8_t* data = bytes.data();
  const std::size_t size = bytes.size();
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  std::uint64_t bit = 0;
  for (std::size_t i = 0; i < n; ++i, bit += width) {
    const std::uint64_t x = load_le64(data, size, bit >> 3);
    out[i] = static_cast<std::uint32_t>((x >> (bit & 7)) & mask);
  }
  return n;
}

void encode_bb(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out) {
  std::int64_t prev = -1;
  for (auto v : values) {
    put_varint(static_cast<std::uint64_t>(std::int64_t{v} - prev - 1), out);
    prev = v;
  }
}

std::size_t decode_bb(std::span<const std::uint8_t> bytes, std::uint32_t* out) {
  BbCursor c{bytes.data(), bytes.data() + bytes.size()};
  std::size_t n = 0;
  while (c.next()) out[n++] = static_cast<std::uint32_t>(c.value);
  return n;
}

std::size_t bb_count(std::span<const std::uint8_t> bytes) {
  std::size_t n = 0;
  for (auto b : bytes) n += (b & 0x80) == 0;
  return n;
}

void encode_ub(std::span<const std::uint32_t> values, std::uint64_t domain,
               std::vector<std::uint8_t>& out) {
  if (values.empty()) return;
  const std::size_t at = out.size();
  out.resize(at + (domain + 7) / 8, 0);
  for (auto v : values) out[at + (v >> 3)] |= static_cast<std::uint8_t>(0x80u >> (v & 7));
}

std::size_t decode_ub(std::span<const std::uint8_t> bytes, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < bytes.size(); ++j) {
    unsigned b = bytes[j];
    while (b) {
      const unsigned lead = std::countl_zero(static_cast<std::uint8_t>(b));
      out[n++] = static_cast<std::uint32_t>(j * 8 + lead);
      b &= ~(0x80u >> lead);
    }
  }
  return n;
}

std::size_t ub_count(std::span<const std::uint8_t> bytes) {
  std::size_t n = 0;
  for (auto b : bytes) n += std::popcount(b);
  return n;
}

Codec Codec::make(EncodingKind kind, std::uint64_t domain,
                  std::shared_ptr<const HuffmanBook> book) {
  Codec c;
  c.kind_ = kind;
  c.domain_ = std::max<std::uint64_t>(domain, 1);
  c.width_ = kind == EncodingKind::BCA ? bca_width(c.domain_) : 32;
  if (kind == EncodingKind::HUF) {
    if (!book) fail(Errc::KindNotApplicable, "HUF codec needs a huffman book");
    c.book_ = std::move(book);
  }
  return c;
}

void Codec::encode(std::span<const std::uint32_t> values, std::vector<std::uint8_t>& out) const {
  check_domain(values, domain_);
  switch (kind_) {
    case EncodingKind::UA: encode_ua(values, out); break;
    case EncodingKind::BCA: encode_bca(values, width_, out); break;
    case EncodingKind::BB:
      check_increasing(values);
      encode_bb(values, out);
      break;
    case EncodingKind::UB:
      check_increasing(values);
      encode_ub(values, domain_, out);
      break;
    case EncodingKind::HUF: book_->encode(values, out); break;
  }
}

bool Codec::self_delimiting() const {
  switch (kind_) {
    case EncodingKind::UA:
    case EncodingKind::BB:
    case EncodingKind::UB: return true;
    case EncodingKind::BCA: return width_ >= 8;
    case EncodingKind::HUF: return false;
  }
  return false;
}

std::size_t Codec::count(std::span<const std::uint8_t> bytes) const {
  switch (kind_) {
    case EncodingKind::UA: return bytes.size() / 4;
    case EncodingKind::BB: return bb_count(bytes);
    case EncodingKind::UB: return ub_count(bytes);
    case EncodingKind::BCA:
      if (width_ >= 8) return bytes.size() * 8 / width_;
      break;
    case EncodingKind::HUF: break;
  }
  fail(Errc::Internal, "fragment cardinality not derivable from bytes");
}

std::size_t Codec::decode(std::span<const std::uint8_t> bytes, std::size_t n,
                          std::uint32_t* out) const {
  switch (kind_) {
    case EncodingKind::UA: return decode_ua(bytes, out);
    case EncodingKind::BCA: return decode_bca(bytes, width_, n, out);
    case EncodingKind::BB: return decode_bb(bytes, out);
    case EncodingKind::UB: return decode_ub(bytes, out);
    case EncodingKind::HUF: book_->decode(bytes, n, out); return n;
  }
  return 0;
}

std::size_t Codec::decode_checked(std::span<const std::uint8_t> bytes, std::size_t n,
                                  std::span<std::uint32_t> out) const {
  const std::size_t need = self_delimiting() ? count(bytes) : n;
  if (need > out.size())
    fail(Errc::ScratchOverflow, "fragment of " + std::to_string(need) +
                                    " values exceeds scratch of " + std::to_string(out.size()));
  return decode(bytes, need, out.data());
}

bool Codec::operator==(const Codec& other) const {
  if (kind_ != other.kind_ || domain_ != other.domain_ || width_ != other.width_) return false;
  if (!book_ || !other.book_) return !book_ && !other.book_;
  return *book_ == *other.book_;
}

std::vector<std::uint8_t> encode(EncodingKind kind, std::span<const std::uint32_t> values,
                                 std::uint64_t domain, const HuffmanBook* book) {
  std::shared_ptr<const HuffmanBook> shared;
  if (book) shared = std::shared_ptr<const HuffmanBook>(book, [](const HuffmanBook*) {});
  std::vector<std::uint8_t> out;
  Codec::make(kind, domain, shared).encode(values, out);
  return out;
}

std::vector<std::uint32_t> decode(EncodingKind kind, std::span<const std::uint8_t> bytes,
                                  std::uint64_t domain, std::optional<std::size_t> n,
                                  const HuffmanBook* book) {
  std::shared_ptr<const HuffmanBook> shared;
  if (book) shared = std::shared_ptr<const HuffmanBook>(book, [](const HuffmanBook*) {});
  const Codec codec = Codec::make(kind, domain, shared);
  std::size_t count;
  if (codec.self_delimiting()) {
    count = codec.count(bytes);
  } else if (n) {
    count = *n;
  } else if (kind == EncodingKind::BCA) {
    count = bytes.size() * 8 / codec.width();  // may include padding slots
  } else {
    fail(Errc::KindNotApplicable, "HUF decode needs the element count");
  }
  std::vector<std::uint32_t> out(count);
  codec.decode(bytes, count, out.data());
  return out;
}

std::size_t intersect_bb_decode(std::span<const std::span<const std::uint8_t>> inputs,
                                std::uint32_t* out) {
  if (inputs.empty()) return 0;
  std::vector<BbCursor> cur;
  cur.reserve(inputs.size());
  for (auto in : inputs) {
    cur.push_back(BbCursor{in.data(), in.data() + in.size()});
    if (!cur.back().next()) return 0;
  }
  std::size_t n = 0;
  for (;;) {
    std::int64_t hi = cur[0].value;
    for (auto& c : cur) hi = std::max(hi, c.value);
    bool equal = true;
    for (auto& c : cur) {
      while (c.value < hi)
        if (!c.next()) return n;
      equal &= c.value == hi;
    }
    if (!equal) continue;
    out[n++] = static_cast<std::uint32_t>(hi);
    for (auto& c : cur)
      if (!c.next()) return n;
  }
}

std::vector<std::uint8_t> intersect_bb(std::span<const std::span<const std::uint8_t>> inputs) {
  if (inputs.empty()) return {};
  std::size_t cap = bb_count(inputs[0]);
  for (auto in : inputs) cap = std::min(cap, bb_count(in));
  std::vector<std::uint32_t> tmp(cap);
  tmp.resize(intersect_bb_decode(inputs, tmp.data()));
  std::vector<std::uint8_t> out;
  encode_bb(tmp, out);
  return out;
}

std::vector<std::uint8_t> intersect_bb(std::span<const std::uint8_t> a,
                                       std::span<const std::uint8_t> b) {
  const std::span<const std::uint8_t> both[2] = {a, b};
  return intersect_bb(std::span<const std::span<const std::uint8_t>>(both, 2));
}

std::vector<std::uint8_t> intersect_bb(const Codec& ca, std::span<const std::uint8_t> a,
                                       const Codec& cb, std::span<const std::uint8_t> b) {
  if (ca.kind() != EncodingKind::BB || cb.kind() != EncodingKind::BB)
    fail(Errc::MixedEncodings, std::string("cannot intersect ") + std::string(encoding_name(ca.kind())) +
                                   " with " + std::string(encoding_name(cb.kind())) + " on encoded bytes");
  if (ca.domain() != cb.domain())
    fail(Errc::MixedEncodings, "bitmaps over different domains");
  return intersect_bb(a, b);
}

}  // namespace fragdb
