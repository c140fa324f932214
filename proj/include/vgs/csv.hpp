// Copyright 2026 The vgsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vgs::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RFC 4180 quoting, only when the field needs it.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

/// Shortest text that parses back to exactly `value`.
std::string format_double(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws CsvError when absent.
  [[nodiscard]] std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

double to_double(std::string_view field);
std::int64_t to_int(std::string_view field);

}  // namespace vgs::csv
