#pragma once

/* Deterministic CSV emission.
 *
 * Every artifact the experiment front end writes is a plain CSV file with a
 * '#'-prefixed metadata header: one `# key = value` line per parameter that
 * produced the data (full provenance plus the code version), then a column
 * name row, then data rows.  Numbers are rendered with std::to_chars, the
 * shortest representation that round-trips a double exactly, so identical
 * inputs produce bitwise-identical files on any machine with the same
 * floating-point arithmetic, independent of locale.
 */

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include "ringgas/common.hpp"

namespace ringgas {

/* Shortest decimal string that parses back to exactly `value`.  Handles
 * nan/inf (to_chars writes "nan"/"inf", which strtod round-trips). */
inline std::string format_double(double value) {
  char buf[64];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), value);
  RG_REQUIRE(r.ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, r.ptr);
}

inline std::string format_int(std::int64_t value) {
  char buf[32];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), value);
  RG_REQUIRE(r.ec == std::errc(), "format_int: conversion failed");
  return std::string(buf, r.ptr);
}

/* Ordered key/value provenance block.  Insertion order is preserved so the
 * emitted header is deterministic. */
class CsvMetadata {
 public:
  void add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, const char* value) {
    entries_.emplace_back(std::move(key), std::string(value));
  }
  void add(std::string key, double value) {
    entries_.emplace_back(std::move(key), format_double(value));
  }
  void add(std::string key, std::int64_t value) {
    entries_.emplace_back(std::move(key), format_int(value));
  }
  void add(std::string key, int value) {
    add(std::move(key), static_cast<std::int64_t>(value));
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/* Streaming CSV writer: metadata header, one column row, then data rows.
 * Cells may be double, any integral type, or string-like; strings must not
 * contain commas or newlines (the formats emitted here never need quoting,
 * so the writer rejects them instead of escaping). */
class CsvFile {
 public:
  explicit CsvFile(const std::filesystem::path& path) : out_(path) {
    RG_REQUIRE(out_.good(), "cannot open output file ", path.string());
    out_.imbue(std::locale::classic());
  }

  void comment(std::string_view key, std::string_view value) {
    RG_REQUIRE(!header_written_, "metadata must precede the column header");
    out_ << "# " << key << " = " << value << "\n";
  }

  void metadata(const CsvMetadata& meta) {
    for (const auto& [key, value] : meta.entries()) comment(key, value);
  }

  template <class... Names>
  void columns(const Names&... names) {
    RG_REQUIRE(!header_written_, "column header already written");
    header_written_ = true;
    n_columns_ = sizeof...(names);
    write_row(names...);
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    RG_REQUIRE(header_written_, "data row before column header");
    RG_REQUIRE(sizeof...(cells) == n_columns_, "row width ", sizeof...(cells),
               " != column count ", n_columns_);
    write_row(cells...);
  }

  /* Flushes and reports stream health; errors at close must not pass
   * silently or the artifact would be truncated without notice. */
  void close() {
    out_.flush();
    RG_REQUIRE(out_.good(), "write failure while emitting CSV");
    out_.close();
  }

 private:
  template <class T>
  static std::string cell(const T& value) {
    if constexpr (std::is_floating_point_v<std::decay_t<T>>) {
      return format_double(value);
    } else if constexpr (std::is_integral_v<std::decay_t<T>>) {
      return format_int(static_cast<std::int64_t>(value));
    } else {
      std::string s(value);
      RG_REQUIRE(s.find_first_of(",\n\"") == std::string::npos,
                 "CSV cell needs quoting, which this writer does not do: ", s);
      return s;
    }
  }

  template <class... Cells>
  void write_row(const Cells&... cells) {
    std::size_t i = 0;
    ((out_ << cell(cells) << (++i < sizeof...(cells) ? "," : "\n")), ...);
  }

  std::ofstream out_;
  bool header_written_ = false;
  std::size_t n_columns_ = 0;
};

}  // namespace ringgas
