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


#include <cmath>

#include "fragdb/datagen.hpp"
#include "fragdb/error.hpp"

namespace fragdb {

std::uint64_t ZipfSpec::row_count() const {
  if (rows == 0 && fanout) return static_cast<std::uint64_t>(std::llround(*fanout * static_cast<double>(domain)));
  return rows;
}

ZipfSampler::ZipfSampler(double s, std::uint64_t domain) {
  if (!(s > 0)) fail(Errc::Usage, "zipf exponent must be positive");
  if (domain == 0 || domain > (1ull << 28)) fail(Errc::Usage, "zipf domain must be in [1, 2^28]");
  weights_.resize(domain);
  for (std::uint64_t k = 0; k < domain; ++k) {
    weights_[k] = std::pow(static_cast<double>(k + 1), -s);
    total_ += weights_[k];
  }
  dist_ = std::discrete_distribution<std::uint64_t>(weights_.begin(), weights_.end());
}

double ZipfSampler::pmf(std::uint64_t value) const { return value < weights_.size() ? weights_[value] / total_ : 0.0; }

std::vector<std::uint32_t> gen_column(const ZipfSpec& spec) {
  ZipfSampler z(spec.s, spec.domain);
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint32_t> out(spec.row_count());
  for (auto& v : out) v = z(rng);
  return out;
}

}  // namespace fragdb
