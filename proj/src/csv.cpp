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

#include "fragdb/csv.hpp"

#include <deque>

#include "fragdb/error.hpp"

namespace fragdb {

void for_each_csv_record(std::string_view text,
                         const std::function<void(std::span<const std::string_view>, std::size_t)>& row) {
  std::vector<std::string_view> fields;
  std::deque<std::string> unquoted;  // stable storage for fields that needed unescaping
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t record_line = line;
    fields.clear();
    unquoted.clear();
    if (text[i] == '\n' || text[i] == '\r') {
      if (text[i] == '\n') ++line;
      ++i;
      continue;
    }
    for (;;) {
      if (i < text.size() && text[i] == '"') {
        std::string value;
        ++i;
        for (;;) {
          if (i >= text.size())
            fail(Errc::SyntaxError, "csv line " + std::to_string(record_line) + ": unterminated quote");
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              value += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          value += text[i++];
        }
        unquoted.push_back(std::move(value));
        fields.emplace_back(unquoted.back());
      } else {
        std::size_t j = i;
        while (j < text.size() && text[j] != ',' && text[j] != '\n' && text[j] != '\r') ++j;
        fields.push_back(text.substr(i, j - i));
        i = j;
      }
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i < text.size() && text[i] == '\r') ++i;
    if (i < text.size() && text[i] == '\n') {
      ++i;
      ++line;
    } else if (i < text.size()) {
      fail(Errc::SyntaxError, "csv line " + std::to_string(record_line) + ": text after closing quote");
    }
    row(fields, record_line);
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos && !field.empty()) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace fragdb
