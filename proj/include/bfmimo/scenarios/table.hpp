// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The bfmimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bfmimo/core/error.hpp"

namespace bfmimo {

/// Shortest round-trip decimal form of a double.
inline std::string format_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return {buf, end};
}

/// In-memory CSV table (RFC 4180). Cells are numbers, text or empty.
class CsvTable {
 public:
  using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    detail::require(row.size() <= header_.size(), "CSV row is wider than the header");
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& row : rows_) {
      std::vector<std::string> text;
      text.reserve(row.size());
      for (const auto& cell : row) text.push_back(to_text(cell));
      write_line(os, text);
    }
  }

  static std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + '"';
  }

 private:
  static std::string to_text(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) return format_number(std::get<double>(cell));
    if (std::holds_alternative<std::int64_t>(cell)) return std::to_string(std::get<std::int64_t>(cell));
    if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
    return {};
  }

  static void write_line(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os << ',';
      os << quote(fields[i]);
    }
    os << "\r\n";
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

inline CsvTable::Cell cell(double x) { return x; }
inline CsvTable::Cell cell(std::size_t x) { return static_cast<std::int64_t>(x); }
inline CsvTable::Cell cell(std::string s) { return s; }

}  // namespace bfmimo
