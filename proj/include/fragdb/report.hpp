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
#include <string>
#include <vector>

#include "fragdb/database.hpp"

// Actual per-column sizes under every applicable encoding.
namespace fragdb {

struct CodecSize {
  EncodingKind kind = EncodingKind::UA;
  std::uint64_t bytes = 0;  // encoded data, plus the code-length table for HUF
  double model_bits = 0;    // cost-model estimate
};

struct ColumnReport {
  std::string table;
  std::string key;
  std::string attribute;
  ColumnRole role = ColumnRole::Measure;
  EncodingKind chosen = EncodingKind::UA;  // the cost model's pick
  std::vector<CodecSize> sizes;

  EncodingKind smallest() const;
  std::uint64_t bytes_of(EncodingKind kind) const;
};

// One row per indexed column; every kind is encoded for real.
std::vector<ColumnReport> codec_report(const Database& db);
std::string format_codec_report(const std::vector<ColumnReport>& report);

}  // namespace fragdb
