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

#include "fragdb/index.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <numeric>

#include "fragdb/error.hpp"
#include "fragdb/huffman.hpp"

namespace fragdb {
namespace {

void put_le(std::vector<std::uint8_t>& out, std::size_t at, std::uint64_t v, unsigned width) {
  for (unsigned i = 0; i < width; ++i) out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void bytes(const std::vector<std::uint8_t>& b) {
    u64(b.size());
    out_.insert(out_.end(), b.begin(), b.end());
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::size_t& pos) : in_(in), pos_(pos) {}
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<std::uint8_t> bytes() {
    const std::uint64_t n = u64();
    need(n);
    std::vector<std::uint8_t> b(in_.begin() + pos_, in_.begin() + pos_ + n);
    pos_ += n;
    return b;
  }

 private:
  void need(std::uint64_t n) const {
    if (pos_ + n > in_.size()) fail(Errc::CorruptMetadata, "index snapshot truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t& pos_;
};

bool cheap_count(const Codec& c) {
  return c.kind() == EncodingKind::UA || (c.kind() == EncodingKind::BCA && c.width() >= 8);
}

}  // namespace

unsigned offset_width_for(std::uint64_t total) {
  unsigned w = 0;
  while (total > 0) {
    ++w;
    total >>= 8;
  }
  return w;
}

FragmentIndex FragmentIndex::build(const IndexInput& in) {
  const std::size_t n = in.keys.size();
  for (const auto& a : in.attributes)
    if (a.values.size() != n) fail(Errc::Internal, "attribute length differs from key column");

  FragmentIndex idx;
  idx.table_ = in.table;
  idx.key_ = in.key;
  idx.key_domain_ = in.key_domain;
  idx.singleton_ = in.singleton;
  idx.rows_ = n;

  // Counting sort by key, then order each fragment by the sort attribute.
  const std::size_t h = in.key_domain;
  std::vector<std::uint64_t> start(h + 1, 0);
  for (auto k : in.keys) {
    if (k >= h) fail(Errc::KeyOutOfDomain, in.table + "." + in.key + " value outside domain");
    ++start[k + 1];
  }
  for (std::size_t c = 0; c < h; ++c) {
    idx.max_fragment_ = std::max(idx.max_fragment_, start[c + 1]);
    start[c + 1] += start[c];
  }
  if (in.singleton && n != h) fail(Errc::IncompleteEntity, in.table + " must have one row per key");
  std::vector<std::uint32_t> perm(n);
  {
    std::vector<std::uint64_t> fill(start.begin(), start.end() - 1);
    for (std::size_t r = 0; r < n; ++r) perm[fill[in.keys[r]]++] = static_cast<std::uint32_t>(r);
  }
  if (in.sort_attribute) {
    const auto& sv = in.attributes[*in.sort_attribute].values;
    for (std::size_t c = 0; c < h; ++c)
      std::stable_sort(perm.begin() + start[c], perm.begin() + start[c + 1],
                       [&](std::uint32_t a, std::uint32_t b) { return sv[a] < sv[b]; });
  }

  std::vector<std::vector<std::uint64_t>> ends;
  std::vector<std::uint32_t> frag;
  for (const auto& a : in.attributes) {
    if (is_bitmap(a.kind) && a.role != ColumnRole::ForeignKey)
      fail(Errc::EncodingNotApplicable, encoding_name(a.kind).data() + std::string(" on measure ") +
                                            in.table + "." + a.name);
    std::shared_ptr<const HuffmanBook> book;
    if (a.kind == EncodingKind::HUF) {
      if (n == 0) fail(Errc::EncodingNotApplicable, "HUF on empty column " + in.table + "." + a.name);
      book = std::make_shared<const HuffmanBook>(HuffmanBook::build_from_values(a.values));
    }
    Attribute attr;
    attr.name = a.name;
    attr.role = a.role;
    attr.codec = Codec::make(a.kind, a.domain, book);
    std::vector<std::uint64_t> offs(h + 1, 0);
    for (std::size_t c = 0; c < h; ++c) {
      frag.clear();
      for (auto r = start[c]; r < start[c + 1]; ++r) frag.push_back(a.values[perm[r]]);
      try {
        attr.codec.encode(frag, attr.bytes);
      } catch (const Error& e) {
        if (e.code() == Errc::NonMonotonicBitmapInput)
          fail(Errc::EncodingNotApplicable, in.table + "." + a.name + " fragments are not duplicate-free");
        throw;
      }
      offs[c + 1] = attr.bytes.size();
    }
    attr.offset_width = offset_width_for(attr.bytes.size());
    ends.push_back(std::move(offs));
    idx.attrs_.push_back(std::move(attr));
  }

  if (!in.singleton) {
    for (std::size_t a = 0; a < idx.attrs_.size(); ++a)
      if (cheap_count(idx.attrs_[a].codec)) {
        idx.count_attr_ = a;
        break;
      }
    if (!idx.count_attr_) idx.count_width_ = std::max(1u, offset_width_for(n));
  }

  std::size_t at = 0;
  for (auto& a : idx.attrs_) {
    a.lookup_offset = at;
    at += a.offset_width;
  }
  idx.count_offset_ = at;
  at += idx.count_width_;
  idx.stride_ = at;
  idx.lookup_.assign((h + 1) * idx.stride_ + 8, 0);
  for (std::size_t row = 0; row <= h; ++row) {
    const std::size_t base = row * idx.stride_;
    for (std::size_t a = 0; a < idx.attrs_.size(); ++a)
      put_le(idx.lookup_, base + idx.attrs_[a].lookup_offset, ends[a][row], idx.attrs_[a].offset_width);
    if (idx.count_width_) put_le(idx.lookup_, base + idx.count_offset_, start[row], idx.count_width_);
  }
  return idx;
}

std::uint64_t FragmentIndex::read_cell(std::uint32_t row, std::size_t at, unsigned width) const {
  if (width == 0) return 0;
  std::uint64_t v;
  std::memcpy(&v, lookup_.data() + std::size_t{row} * stride_ + at, 8);
  return width >= 8 ? v : v & ((std::uint64_t{1} << (8 * width)) - 1);
}

std::size_t FragmentIndex::cardinality(std::uint32_t c) const {
  if (singleton_) return 1;
  if (count_width_)
    return read_cell(c + 1, count_offset_, count_width_) - read_cell(c, count_offset_, count_width_);
  const std::size_t a = *count_attr_;
  return attrs_[a].codec.count(fragment(a, c));
}

std::optional<std::size_t> FragmentIndex::find_attribute(std::string_view name) const {
  for (std::size_t a = 0; a < attrs_.size(); ++a)
    if (attrs_[a].name == name) return a;
  return std::nullopt;
}

std::size_t FragmentIndex::require_attribute(std::string_view name) const {
  auto a = find_attribute(name);
  if (!a) fail(Errc::UnknownAttribute, table_ + " index on " + key_ + " has no attribute " + std::string(name));
  return *a;
}

FragmentRef FragmentIndex::get_fragment(std::size_t a, std::uint32_t c) const {
  if (a >= attrs_.size()) fail(Errc::UnknownAttribute, "attribute position out of range");
  if (c >= key_domain_)
    fail(Errc::KeyOutOfDomain, table_ + "." + key_ + " key " + std::to_string(c) + " outside [0," +
                                   std::to_string(key_domain_) + ")");
  const std::uint64_t begin = offset(a, c);
  return FragmentRef{begin, offset(a, c + 1) - begin, attrs_[a].codec.kind(), attrs_[a].name};
}

std::size_t FragmentIndex::read_fragment(std::size_t a, std::uint32_t c,
                                         std::span<std::uint32_t> scratch) const {
  get_fragment(a, c);
  return attrs_[a].codec.decode_checked(fragment(a, c), cardinality(c), scratch);
}

std::vector<std::uint32_t> FragmentIndex::read_fragment(std::size_t a, std::uint32_t c) const {
  get_fragment(a, c);
  std::vector<std::uint32_t> out(cardinality(c));
  attrs_[a].codec.decode_checked(fragment(a, c), out.size(), out);
  return out;
}

std::uint64_t FragmentIndex::data_bytes() const {
  std::uint64_t total = 0;
  for (const auto& a : attrs_) total += a.bytes.size();
  return total;
}

std::uint64_t FragmentIndex::book_bytes() const {
  std::uint64_t total = 0;
  for (const auto& a : attrs_)
    if (a.codec.book()) total += a.codec.book()->storage_bytes();
  return total;
}

void FragmentIndex::serialize(std::vector<std::uint8_t>& out) const {
  Writer w(out);
  w.str(table_);
  w.str(key_);
  w.u64(key_domain_);
  w.u64(singleton_);
  w.u64(rows_);
  w.u64(max_fragment_);
  w.u64(attrs_.size());
  for (const auto& a : attrs_) {
    w.str(a.name);
    w.u64(static_cast<std::uint64_t>(a.role));
    w.u64(static_cast<std::uint64_t>(a.codec.kind()));
    w.u64(a.codec.domain());
    if (const HuffmanBook* b = a.codec.book()) {
      w.u64(b->symbols().size());
      for (auto sym : b->symbols()) w.u64(sym);
      w.bytes(b->symbol_lengths());
    } else {
      w.u64(0);
    }
    w.u64(a.offset_width);
    w.u64(a.lookup_offset);
    w.bytes(a.bytes);
  }
  w.u64(count_attr_ ? *count_attr_ + 1 : 0);
  w.u64(count_offset_);
  w.u64(count_width_);
  w.u64(stride_);
  w.bytes(lookup_);
}

FragmentIndex FragmentIndex::deserialize(std::span<const std::uint8_t> in, std::size_t& pos) {
  Reader r(in, pos);
  FragmentIndex idx;
  idx.table_ = r.str();
  idx.key_ = r.str();
  idx.key_domain_ = static_cast<std::uint32_t>(r.u64());
  idx.singleton_ = r.u64() != 0;
  idx.rows_ = r.u64();
  idx.max_fragment_ = r.u64();
  const std::uint64_t na = r.u64();
  if (na > 4096) fail(Errc::CorruptMetadata, "implausible attribute count in snapshot");
  for (std::uint64_t i = 0; i < na; ++i) {
    Attribute a;
    a.name = r.str();
    a.role = static_cast<ColumnRole>(r.u64());
    const auto kind = static_cast<EncodingKind>(r.u64());
    const std::uint64_t domain = r.u64();
    const std::uint64_t nsym = r.u64();
    if (nsym > (std::uint64_t{1} << 32)) fail(Errc::CorruptMetadata, "implausible huffman book");
    std::vector<std::uint32_t> symbols;
    for (std::uint64_t i = 0; i < nsym; ++i) symbols.push_back(static_cast<std::uint32_t>(r.u64()));
    std::shared_ptr<const HuffmanBook> book;
    if (nsym > 0) {
      auto lengths = r.bytes();
      book = std::make_shared<const HuffmanBook>(HuffmanBook::from_lengths(std::move(symbols), std::move(lengths)));
    }
    a.codec = Codec::make(kind, domain, book);
    a.offset_width = static_cast<unsigned>(r.u64());
    a.lookup_offset = r.u64();
    a.bytes = r.bytes();
    idx.attrs_.push_back(std::move(a));
  }
  const std::uint64_t ca = r.u64();
  if (ca) idx.count_attr_ = ca - 1;
  idx.count_offset_ = r.u64();
  idx.count_width_ = static_cast<unsigned>(r.u64());
  idx.stride_ = r.u64();
  idx.lookup_ = r.bytes();
  if (idx.lookup_.size() != (std::size_t{idx.key_domain_} + 1) * idx.stride_ + 8)
    fail(Errc::CorruptMetadata, "lookup table size mismatch in snapshot");
  return idx;
}

}  // namespace fragdb
