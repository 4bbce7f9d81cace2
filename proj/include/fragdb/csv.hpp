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

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fragdb {

// Calls `row` once per record of comma-separated text. Fields may be quoted with
// "..." and embed "" for a literal quote. Blank lines are skipped.
void for_each_csv_record(std::string_view text,
                         const std::function<void(std::span<const std::string_view>, std::size_t line)>& row);

std::string csv_escape(std::string_view field);

}  // namespace fragdb
