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

#include "fragdb/size_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "fragdb/error.hpp"

namespace fragdb {
namespace {

double ceil8(double bits) { return 8.0 * std::ceil(bits / 8.0 - 1e-12); }

std::uint64_t ceil8(std::uint64_t bits) { return 8 * ((bits + 7) / 8); }

// Words of 32 bits needed per value: ceil(log_{2^32} D), at least one.
unsigned ua_words(std::uint64_t domain) {
  unsigned bits = domain <= 1 ? 0 : static_cast<unsigned>(std::bit_width(domain - 1));
  return std::max(1u, (bits + 31) / 32);
}

constexpr int kTieOrder[] = {0, 1, 2, 4, 3};  // indexed by EncodingKind: UA BCA BB HUF UB

}  // namespace

unsigned bb_bytes_per_value(double n, std::uint64_t domain) {
  if (n <= 0) return 1;
  const long double ratio = (static_cast<long double>(domain) - n) / n;
  unsigned b = 1;
  long double p = 128;
  while (p < ratio) {
    p *= 128;
    ++b;
  }
  return b;
}

double model_size(EncodingKind kind, double n, std::uint64_t domain, double entropy,
                  bool unique) {
  if (is_bitmap(kind)) {
    if (!unique) fail(Errc::KindNotApplicable, "bitmap encodings need duplicate-free fragments");
    if (n > static_cast<double>(domain))
      fail(Errc::KindNotApplicable, "fragment larger than its domain");
  }
  switch (kind) {
    case EncodingKind::UA: return 32.0 * n * ua_words(domain);
    case EncodingKind::BCA: return ceil8(n * bca_width(domain));
    case EncodingKind::BB: return n <= 0 ? 0.0 : n * 8.0 * bb_bytes_per_value(n, domain);
    case EncodingKind::HUF: return ceil8(n * entropy + static_cast<double>(domain));
    case EncodingKind::UB: return ceil8(static_cast<double>(domain));
  }
  return 0.0;
}

std::uint64_t model_bits(EncodingKind kind, std::uint64_t n, std::uint64_t domain,
                         double entropy) {
  switch (kind) {
    case EncodingKind::UA: return 32 * n * ua_words(domain);
    case EncodingKind::BCA: return ceil8(n * bca_width(domain));
    case EncodingKind::BB:
      return n == 0 ? 0 : n * 8 * bb_bytes_per_value(static_cast<double>(n), domain);
    case EncodingKind::HUF: return huffman_bounds(n, domain, entropy).first;
    case EncodingKind::UB: return ceil8(domain);
  }
  return 0;
}

std::pair<std::uint64_t, std::uint64_t> huffman_bounds(std::uint64_t n, std::uint64_t domain,
                                                       double entropy) {
  const double lo = static_cast<double>(n) * entropy + static_cast<double>(domain);
  const double hi = lo + static_cast<double>(n);
  return {static_cast<std::uint64_t>(ceil8(lo)), static_cast<std::uint64_t>(ceil8(hi))};
}

double column_cost(EncodingKind kind, const ColumnStats& stats) {
  const double fragments = static_cast<double>(stats.distinct_fragments);
  const double n = stats.avg_fragment_size;
  // Every Huffman codeword is at least one bit, so entropy below 1 undercounts.
  if (kind == EncodingKind::HUF)
    return fragments * ceil8(n * std::max(stats.entropy, 1.0)) + static_cast<double>(stats.domain_size);
  return fragments * model_size(kind, n, stats.domain_size, stats.entropy, true);
}

EncodingKind choose_encoding(const ColumnStats& stats, ColumnRole role) {
  const bool bitmaps = role == ColumnRole::ForeignKey && stats.unique_in_fragments;
  EncodingKind best = EncodingKind::UA;
  double best_cost = std::numeric_limits<double>::infinity();
  for (auto kind : kAllEncodings) {
    if (is_bitmap(kind) && !bitmaps) continue;
    const double cost = column_cost(kind, stats);
    const bool better =
        cost < best_cost ||
        (cost == best_cost && kTieOrder[static_cast<int>(kind)] < kTieOrder[static_cast<int>(best)]);
    if (better) {
      best = kind;
      best_cost = cost;
    }
  }
  return best;
}

std::optional<EncodingKind> predict_unique_region(std::uint64_t domain, std::uint64_t n) {
  const long double d = static_cast<long double>(domain);
  const long double nn = static_cast<long double>(n);
  if (n == 0 || n > domain) return std::nullopt;
  if (domain <= 8) return EncodingKind::UB;
  if (domain > 128) {
    if (nn >= d / 8) return EncodingKind::UB;
    if (nn >= d / 129) return EncodingKind::BB;
  } else if (nn >= d / 129 && nn <= d / 8) {
    return EncodingKind::BCA;
  }
  // Bands D/(128^x+1) <= N < D/(128^(x-1)+1) for x >= 2.
  long double lower = 128.0L * 128.0L;
  long double upper = 128.0L;
  for (unsigned x = 2; x <= 6; ++x) {
    if (nn >= d / (lower + 1) && nn < d / (upper + 1)) {
      const long double pivot = std::ldexp(1.0L, static_cast<int>(8 * x - 1));
      return d > pivot ? EncodingKind::BB : EncodingKind::BCA;
    }
    upper = lower;
    lower *= 128.0L;
  }
  return std::nullopt;
}

EncodingKind formula_min_unique(std::uint64_t domain, std::uint64_t n) {
  EncodingKind best = EncodingKind::BCA;
  std::uint64_t best_bits = model_bits(best, n, domain);
  for (auto kind : {EncodingKind::BB, EncodingKind::UB}) {
    const std::uint64_t bits = model_bits(kind, n, domain);
    if (bits < best_bits) {
      best = kind;
      best_bits = bits;
    }
  }
  return best;
}

}  // namespace fragdb
