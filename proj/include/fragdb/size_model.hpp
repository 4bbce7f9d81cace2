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
#include <utility>

#include "fragdb/catalog.hpp"
#include "fragdb/codecs.hpp"

namespace fragdb {

// Closed-form fragment sizes in bits. N may be fractional (average fragment size).
// UA and BCA use at least one bit/word per value so a domain of one still occupies space;
// BB charges at least one byte per element.
double model_size(EncodingKind kind, double n, std::uint64_t domain, double entropy,
                  bool unique = true);

// Exact integer form for whole fragments.
std::uint64_t model_bits(EncodingKind kind, std::uint64_t n, std::uint64_t domain,
                         double entropy = 0.0);

// [lower, upper) bounds of a Huffman fragment including the D-bit book.
std::pair<std::uint64_t, std::uint64_t> huffman_bounds(std::uint64_t n, std::uint64_t domain,
                                                       double entropy);

// Smallest b >= 1 with 128^b >= (D - N) / N, i.e. bytes per gap in the BB estimate.
unsigned bb_bytes_per_value(double n, std::uint64_t domain);

// Estimated bits for a whole column of `fragments` fragments averaging n values.
// The Huffman book is charged once per column.
double column_cost(EncodingKind kind, const ColumnStats& stats);

// Argmin of column_cost over the kinds applicable to the role; ties go to the
// faster decoder (UA, BCA, BB, UB, HUF).
EncodingKind choose_encoding(const ColumnStats& stats, ColumnRole role);

// Minimal kind among BCA/BB/UB for a unique fragment of n values over [0, D),
// derived from the closed-form region analysis. Empty when (D, N) falls in the
// small-domain region the analysis leaves to a table lookup.
std::optional<EncodingKind> predict_unique_region(std::uint64_t domain, std::uint64_t n);

// Argmin of model_bits over BCA/BB/UB (the table used for the small-domain region).
EncodingKind formula_min_unique(std::uint64_t domain, std::uint64_t n);

}  // namespace fragdb
